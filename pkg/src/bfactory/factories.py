"""The factory algorithms: turn flips of unknown-bias coins into one exact bit.

Every public function here consumes coin flips through the
:class:`~bfactory.coins.CoinSource` contract and auxiliary randomness through
an :class:`~bfactory.rng.RngStream`, and emits a single 0/1 draw whose exact
law is a known function of r = C_1 p_1 + ... + C_k p_k:

=============================  ============================================
logistic_factory               Bernoulli(r / (1 + r))
walk_to_zero_factory           Bernoulli(r (1 - r^(m-1)) / (1 - r^m))
high_power_logistic_factory    Bernoulli((br)^m / (1 + br + ... + (br)^m))
residual_factory               Bernoulli((m-1)(br)^(m-1) / (1 + ... + (br)^(m-2)))
linear_factory                 Bernoulli(r), given r <= 1 - epsilon
small_r_factory                Bernoulli(r), given r <= M < 1/2
=============================  ============================================

The factories never read the biases; everything they learn about p comes from
flip outcomes.  Scaling the constants by some gamma > 1 only changes the rate
of the internal exponential race, never the alias table (ratios are
unchanged), so one table per constants vector serves every scaled subcall.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .coins import CoinSource
from .rng import AliasTable, RngStream, build_alias_table

_INF = float("inf")


class BudgetExceededError(RuntimeError):
    """An explicit abort: the invocation hit its flip or depth budget.

    Raised instead of returning a (necessarily biased) bit, so callers can
    tell "ran out of budget" apart from any legitimate outcome.
    """

    def __init__(self, message: str, flips_taken: int = 0):
        super().__init__(message)
        self.flips_taken = flips_taken


@dataclass(frozen=True)
class Budget:
    """Optional abort limits; ``None`` means run to natural termination."""

    max_flips: Optional[int] = None
    max_depth: Optional[int] = None

    def __post_init__(self):
        for name in ("max_flips", "max_depth"):
            v = getattr(self, name)
            if v is not None and (v != int(v) or v < 1):
                raise ValueError(f"{name} must be a positive integer, got {v!r}")


class InvocationStats:
    """Call-tree bookkeeping for one top-level factory invocation.

    ``recursion_calls`` counts linear-factory entries anywhere in the call
    tree (the top-level one included), ``max_depth`` the deepest nesting of
    those entries, and ``aborted`` is set by harness code when a budget abort
    was caught.
    """

    __slots__ = ("recursion_calls", "max_depth", "aborted", "_depth")

    def __init__(self):
        self.recursion_calls = 0
        self.max_depth = 0
        self.aborted = False
        self._depth = 0

    def reset(self) -> None:
        self.recursion_calls = 0
        self.max_depth = 0
        self.aborted = False
        self._depth = 0


@dataclass(frozen=True)
class FactoryParams:
    """Validated constants plus exactly one slack figure (or none).

    Mostly a convenience for configuration plumbing; the factory functions
    themselves take plain arguments.
    """

    constants: tuple[float, ...]
    epsilon: Optional[float] = None
    mean_bound: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "constants", tuple(float(c) for c in self.constants))
        _check_constants(self.constants)
        if self.epsilon is not None and self.mean_bound is not None:
            raise ValueError("give epsilon or mean_bound, not both")
        if self.epsilon is not None and not (0.0 < self.epsilon < 1.0):
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if self.mean_bound is not None and not (0.0 < self.mean_bound < 0.5):
            raise ValueError(
                f"mean bound must satisfy M ∈ (0, 1/2), got {self.mean_bound!r}")

    @property
    def k(self) -> int:
        return len(self.constants)

    @property
    def total(self) -> float:
        """C = sum of the constants."""
        return math.fsum(self.constants)

    @property
    def m(self) -> Optional[int]:
        if self.epsilon is None:
            return None
        return linear_params(self.epsilon)[0]

    @property
    def beta(self) -> Optional[float]:
        if self.epsilon is not None:
            return linear_params(self.epsilon)[1]
        if self.mean_bound is not None:
            return 1.0 / (1.0 - 2.0 * self.mean_bound)
        return None


def linear_params(epsilon: float) -> tuple[int, float]:
    """The walk length and inflation factor used by :func:`linear_factory`:
    ``m = ceil(4.5/epsilon) + 1`` and ``beta = 1 + 1/(m-1)``."""
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    m = math.ceil(4.5 / epsilon) + 1
    return m, 1.0 + 1.0 / (m - 1)


# -- shared validation -------------------------------------------------------


def _check_constants(constants) -> tuple[float, ...]:
    cs = tuple(float(c) for c in constants)
    if not cs:
        raise ValueError("constants must be nonempty")
    for i, c in enumerate(cs):
        if not (0.0 <= c < _INF):
            raise ValueError(f"constants[{i}] must be finite and >= 0, got {c!r}")
    if not any(c > 0.0 for c in cs):
        raise ValueError("at least one constant must be positive")
    return cs


def _prepare(coins: CoinSource, constants) -> tuple[AliasTable, float]:
    cs = _check_constants(constants)
    if len(cs) != coins.k:
        raise ValueError(f"got {len(cs)} constants for a {coins.k}-coin source")
    return build_alias_table(cs), math.fsum(cs)


def _flip_limit(coins: CoinSource, budget: Optional[Budget]) -> Optional[int]:
    if budget is None or budget.max_flips is None:
        return None
    return coins.flips_taken + budget.max_flips


# -- core loops --------------------------------------------------------------
#
# The underscore functions are the hot paths: parameters pre-validated, alias
# table prebuilt, budget reduced to an absolute flip limit.  The harness binds
# straight to these so per-trial overhead stays flat.


def _logistic(coins, table, rate, stream, limit) -> int:
    # Race a fixed Exp(1) alarm against successive Exp(rate) arrival gaps;
    # each arrival is attributed to coin I ~ C_i/C and kept only if that flip
    # lands heads.  P(some kept arrival precedes the alarm) = r/(1+r).
    alarm = stream.exponential(1.0)
    t = stream.exponential(rate)
    while t < alarm:
        if limit is not None and coins.flips_taken >= limit:
            raise BudgetExceededError(
                f"flip budget exhausted at {coins.flips_taken} flips",
                coins.flips_taken)
        if coins.flip(table.sample(stream), stream):
            return 1
        t += stream.exponential(rate)
    return 0


def _walk_to_zero(coins, table, rate, m, stream, limit) -> int:
    # Nearest-neighbor walk on {0..m} from 1; a logistic heads steps down.
    pos = 1
    while 0 < pos < m:
        pos += 1 - 2 * _logistic(coins, table, rate, stream, limit)
    return 1 if pos == 0 else 0


def _high_power(coins, table, rate, m, stream, limit) -> int:
    # Walk on {0..m+1} from 1, but a logistic heads steps *up*; success means
    # winning m logistic draws net, hence the (br)^m numerator.
    if m == 0:
        return 1
    s = 1
    while 1 <= s <= m:
        s += 2 * _logistic(coins, table, rate, stream, limit) - 1
    return 1 if s == m + 1 else 0


def _residual(coins, table, C, epsilon, m, beta, stream, limit, budget, stats) -> int:
    eps_inner = 1.0 - (1.0 - epsilon) * beta
    if eps_inner <= 0.0:
        raise ValueError(
            f"1 - (1 - epsilon) * beta > 0 violated (got {eps_inner}); "
            "the beta * r < 1 margin does not hold")
    mm = m
    while True:
        # One fresh br-coin per pass, built by the exact factory at the
        # margin eps_inner that beta leaves available.
        b1 = _linear(coins, table, beta * C, eps_inner, stream, limit, budget, stats)
        if b1 == 0:
            return 0
        if _high_power(coins, table, beta * C, mm - 2, stream, limit):
            return 1
        # mm never drops below 2: at mm=2 the power above was 0, a sure 1.
        mm -= 1


def _linear(coins, table, C, epsilon, stream, limit, budget, stats) -> int:
    stats.recursion_calls += 1
    depth = stats._depth + 1
    stats._depth = depth
    if depth > stats.max_depth:
        stats.max_depth = depth
    if budget is not None and budget.max_depth is not None and depth > budget.max_depth:
        stats._depth = depth - 1
        raise BudgetExceededError(
            f"recursion depth budget exhausted at depth {depth}",
            coins.flips_taken)
    try:
        m, beta = linear_params(epsilon)
        if _walk_to_zero(coins, table, beta * C, m, stream, limit) == 0:
            return 0
        # Auxiliary Bernoulli(1/beta): one uniform, zero coin flips.
        if stream.uniform() < 1.0 / beta:
            return 1
        return _residual(coins, table, C, epsilon, m, beta, stream, limit, budget, stats)
    finally:
        stats._depth = depth - 1


def _small_r(coins, table, C, mean_bound, stream, limit, budget, stats) -> int:
    beta = 1.0 / (1.0 - 2.0 * mean_bound)
    if _logistic(coins, table, beta * C, stream, limit) == 0:
        return 0
    if stream.uniform() < 1.0 / beta:
        return 1
    # Residual branch: target r * beta/(beta-1) = r/(2M) <= 1/2, so slack 1/2
    # is guaranteed; constants scale by the same factor.
    return _linear(coins, table, C / (2.0 * mean_bound), 0.5, stream, limit, budget, stats)


# -- public API --------------------------------------------------------------


def logistic_factory(coins: CoinSource, constants, stream: RngStream,
                     budget: Optional[Budget] = None) -> int:
    """One Bernoulli(r/(1+r)) draw.  Expected flips consumed: exactly C/(1+r)."""
    table, C = _prepare(coins, constants)
    return _logistic(coins, table, C, stream, _flip_limit(coins, budget))


def walk_to_zero_factory(coins: CoinSource, m: int, constants, stream: RngStream,
                         budget: Optional[Budget] = None) -> int:
    """One Bernoulli(r(1-r^(m-1))/(1-r^m)) draw; expected flips at most C(m-1).

    Finite expected time needs r < 1, which the factory cannot observe; the
    caller is responsible for it.
    """
    if m != int(m) or m < 2:
        raise ValueError(f"m must be an integer >= 2, got {m!r}")
    table, C = _prepare(coins, constants)
    return _walk_to_zero(coins, table, C, int(m), stream, _flip_limit(coins, budget))


def high_power_logistic_factory(coins: CoinSource, m: int, beta: float, constants,
                                stream: RngStream,
                                budget: Optional[Budget] = None) -> int:
    """One Bernoulli((br)^m / (1 + br + ... + (br)^m)) draw, b = beta.

    Caller guarantees beta * r < 1; expected flips at most beta*C/(1 - beta*r).
    ``m = 0`` returns 1 without touching the coins or the stream.
    """
    if m != int(m) or m < 0:
        raise ValueError(f"m must be an integer >= 0, got {m!r}")
    if not (1.0 < beta < _INF):
        raise ValueError(f"beta must be a finite real > 1, got {beta!r}")
    table, C = _prepare(coins, constants)
    return _high_power(coins, table, beta * C, int(m), stream,
                       _flip_limit(coins, budget))


def residual_factory(coins: CoinSource, epsilon: float, m: int, beta: float,
                     constants, stream: RngStream,
                     stats: Optional[InvocationStats] = None,
                     budget: Optional[Budget] = None) -> int:
    """One draw of the residual law (m-1)(br)^(m-1) / (1 + ... + (br)^(m-2)).

    This is the correction distribution that, mixed with the overshoot walk,
    makes :func:`linear_factory` exact.  Requires the inner margin
    ``1 - (1-epsilon)*beta > 0``; violating it raises ValueError.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if m != int(m) or m < 2:
        raise ValueError(f"m must be an integer >= 2, got {m!r}")
    if not (1.0 < beta < _INF):
        raise ValueError(f"beta must be a finite real > 1, got {beta!r}")
    table, C = _prepare(coins, constants)
    if stats is None:
        stats = InvocationStats()
    return _residual(coins, table, C, epsilon, int(m), beta, stream,
                     _flip_limit(coins, budget), budget, stats)


def linear_factory(coins: CoinSource, epsilon: float, constants, stream: RngStream,
                   stats: Optional[InvocationStats] = None,
                   budget: Optional[Budget] = None) -> int:
    """One exact Bernoulli(r) draw, given the caller's guarantee r <= 1 - epsilon.

    Expected flips at most 7.67 * C / epsilon, and the expected number of
    linear-factory entries in the whole call tree is at most 1.4 (tracked in
    ``stats.recursion_calls``).
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    table, C = _prepare(coins, constants)
    if stats is None:
        stats = InvocationStats()
    return _linear(coins, table, C, epsilon, stream,
                   _flip_limit(coins, budget), budget, stats)


def small_r_factory(coins: CoinSource, M: float, constants, stream: RngStream,
                    stats: Optional[InvocationStats] = None,
                    budget: Optional[Budget] = None) -> int:
    """One exact Bernoulli(r) draw, given the caller's guarantee r <= M < 1/2.

    Built to be cheap when r is small: expected flips at most
    ``C/((1-2M)(1+r)) + r * 15.2 C/(1-2M+r)``, which tends to C as M -> 0.
    """
    if not (0.0 < M < 0.5):
        raise ValueError(f"mean bound must satisfy M ∈ (0, 1/2), got {M!r}")
    table, C = _prepare(coins, constants)
    if stats is None:
        stats = InvocationStats()
    return _small_r(coins, table, C, M, stream,
                    _flip_limit(coins, budget), budget, stats)
