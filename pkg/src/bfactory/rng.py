"""Randomness primitives: keyed uniform streams, exponential draws, alias sampling.

Everything downstream consumes randomness through :class:`RngStream`, a
counter-based generator keyed by ``(seed, stream_id)``.  Two streams with the
same key always produce the same sequence of draws, independent of how many
other streams exist or in which order they are consumed — that is what makes
trial-level parallelism reproducible.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_INF = float("inf")

# Uniforms are pulled from the generator in blocks and handed out one at a
# time.  The block schedule depends only on the number of draws made, so the
# logical sequence of a stream is unaffected by buffering.
_BUF_START = 16
_BUF_MAX = 256


class RngStream:
    """A single reproducible stream of uniforms keyed by ``(seed, stream_id)``."""

    __slots__ = ("seed", "stream_id", "_bg", "_gen", "_buf", "_pos")

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = seed & _MASK64
        self.stream_id = stream_id & _MASK64
        self._bg = np.random.Philox(key=[self.seed, self.stream_id])
        self._gen = np.random.Generator(self._bg)
        self._buf: list[float] = []
        self._pos = 0

    def rekey(self, stream_id: int) -> "RngStream":
        """Point this object at a fresh stream ``(seed, stream_id)``.

        Equivalent to constructing ``RngStream(seed, stream_id)`` but without
        paying generator setup again; used by the harness when running many
        trials back to back.
        """
        sid = stream_id & _MASK64
        st = self._bg.state
        st["state"]["key"][1] = sid
        st["state"]["counter"][:] = 0
        st["buffer_pos"] = 4  # marks the counter buffer as empty
        st["has_uint32"] = 0
        st["uinteger"] = 0
        self._bg.state = st
        self.stream_id = sid
        self._buf = []
        self._pos = 0
        return self

    def uniform(self) -> float:
        """Next uniform draw on [0, 1)."""
        pos = self._pos
        buf = self._buf
        if pos >= len(buf):
            want = _BUF_START if not buf else min(4 * len(buf), _BUF_MAX)
            buf = self._buf = self._gen.random(want).tolist()
            pos = 0
        self._pos = pos + 1
        return buf[pos]

    def exponential(self, rate: float) -> float:
        """Exponential draw with the given rate (mean ``1/rate``).

        Consumes exactly one uniform, via inversion: ``-log(1 - U) / rate``.
        """
        if not (0.0 < rate < _INF):
            raise ValueError(f"rate must be a positive finite real, got {rate!r}")
        return -math.log1p(-self.uniform()) / rate

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


class AliasTable:
    """Discrete sampler over ``{0, .., k-1}`` with probabilities ``w_i / sum(w)``.

    Built once by :func:`build_alias_table`; each draw costs O(1) and consumes
    exactly one uniform.  The invariant tying the table back to its weights is
    ``(cell_probability[i] + sum of donations to i) / k == w_i / total_weight``;
    :meth:`reconstructed_probabilities` evaluates the left-hand side.
    """

    __slots__ = ("k", "cell_probability", "cell_alias", "total_weight")

    def __init__(self, k: int, cell_probability: tuple[float, ...],
                 cell_alias: tuple[int, ...], total_weight: float):
        self.k = k
        self.cell_probability = cell_probability
        self.cell_alias = cell_alias
        self.total_weight = total_weight

    def sample(self, stream: RngStream) -> int:
        # One uniform supplies both the cell index and the accept/alias test:
        # x = u * k splits into int part (cell) and fractional part (test).
        x = stream.uniform() * self.k
        cell = int(x)
        if x - cell < self.cell_probability[cell]:
            return cell
        return self.cell_alias[cell]

    def reconstructed_probabilities(self) -> list[float]:
        """Per-index sampling probabilities implied by the table itself."""
        probs = [p for p in self.cell_probability]
        for cell, target in enumerate(self.cell_alias):
            probs[target] += 1.0 - self.cell_probability[cell]
        return [p / self.k for p in probs]


def build_alias_table(weights) -> AliasTable:
    """Construct an :class:`AliasTable` from nonnegative weights.

    Standard two-worklist construction: indices with scaled weight below 1
    borrow the remainder of their cell from an index above 1.  Ties are broken
    by ascending index so the table is a pure function of the weight vector.
    """
    weights = [float(w) for w in weights]
    k = len(weights)
    if k == 0:
        raise ValueError("weights must be nonempty")
    for i, w in enumerate(weights):
        if not (0.0 <= w < _INF):
            raise ValueError(f"weights[{i}] must be finite and >= 0, got {w!r}")
    total = math.fsum(weights)
    if total <= 0.0:
        raise ValueError("at least one weight must be positive")

    scaled = [w * k / total for w in weights]
    small = [i for i in range(k) if scaled[i] < 1.0]
    large = [i for i in range(k) if scaled[i] >= 1.0]
    prob = [1.0] * k
    alias = list(range(k))

    si = li = 0
    while si < len(small) and li < len(large):
        s, l = small[si], large[li]
        prob[s] = scaled[s]
        alias[s] = l
        # index l donated (1 - scaled[s]) of its mass to cell s
        scaled[l] -= 1.0 - scaled[s]
        si += 1
        if scaled[l] < 1.0:
            small.append(l)
            li += 1
    # Anything left over (numerically ~1) keeps its own cell.
    for rest in (small[si:], large[li:]):
        for i in rest:
            prob[i] = 1.0
            alias[i] = i

    return AliasTable(k, tuple(prob), tuple(alias), total)
