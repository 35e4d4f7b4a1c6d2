"""Coins a factory is allowed to flip, and the accounting of those flips.

The central contract is :class:`CoinSource`: a factory may ask how many coins
exist and may flip coin ``i``, but it gets no read access to the underlying
biases.  Everything a factory learns about ``p_1..p_k`` comes through flip
outcomes, which is exactly the setting the algorithms are designed for.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

from .rng import RngStream


class FlipLedger:
    """Running per-coin and total flip counts for one trial."""

    __slots__ = ("per_coin", "total")

    def __init__(self, k: int):
        self.per_coin = [0] * k
        self.total = 0

    def reset(self) -> None:
        per = self.per_coin
        for i in range(len(per)):
            per[i] = 0
        self.total = 0


class CoinSource(ABC):
    """What a factory may see: the number of coins and their flip outcomes."""

    @property
    @abstractmethod
    def k(self) -> int:
        """Number of coins available."""

    @abstractmethod
    def flip(self, i: int, stream: RngStream) -> int:
        """Flip coin ``i`` (0-based); returns 1 for heads, 0 for tails."""

    @property
    @abstractmethod
    def flips_taken(self) -> int:
        """Total flips consumed so far (used for budget enforcement)."""


class CoinEnsemble(CoinSource):
    """``k`` independent coins with fixed biases, with a flip ledger.

    The biases are visible to harness code that constructed the ensemble (it
    needs them to compute ground truth) but are not part of the
    :class:`CoinSource` interface that factories program against.
    """

    __slots__ = ("_biases", "ledger")

    def __init__(self, biases):
        bs = tuple(float(p) for p in biases)
        if not bs:
            raise ValueError("need at least one coin")
        for i, p in enumerate(bs):
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"biases[{i}] must lie in [0, 1], got {p!r}")
        self._biases = bs
        self.ledger = FlipLedger(len(bs))

    @property
    def k(self) -> int:
        return len(self._biases)

    @property
    def biases(self) -> tuple[float, ...]:
        return self._biases

    @property
    def flips_taken(self) -> int:
        return self.ledger.total

    def flip(self, i: int, stream: RngStream) -> int:
        if not 0 <= i < len(self._biases):
            raise IndexError(f"coin index {i} out of range for k={len(self._biases)}")
        ledger = self.ledger
        ledger.per_coin[i] += 1
        ledger.total += 1
        return 1 if stream.uniform() < self._biases[i] else 0

    def reset_ledger(self) -> None:
        self.ledger.reset()
