"""Run many independent factory trials and test them against the oracle.

Trial ``j`` of a run is driven by its own random stream keyed ``(seed, j)``,
so a :class:`TrialSummary` is a pure function of (configuration, seed, n):
chunking, worker count, and scheduling cannot change it.  All summary moments
are integer sums, which makes merging chunk results exact and associative.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional

from . import factories
from .coins import CoinEnsemble, CoinSource
from .factories import Budget, BudgetExceededError, InvocationStats
from .oracle import FactoryKind, exact_output_mean, expected_flip_bound
from .rng import RngStream, build_alias_table

_CHUNK = 25_000  # trials per work item; fixed so results never depend on workers


@dataclass(frozen=True)
class TrialSummary:
    """Integer-exact aggregates over one batch of independent trials.

    Aborted trials (budget hits) are excluded from ``heads`` and from all
    flip/recursion moments; they are only counted in ``aborted_count``.
    """

    n: int
    heads: int
    flip_total_sum: int
    flip_total_sum_sq: int
    per_coin_flip_sums: tuple[int, ...]
    recursion_call_sum: int
    recursion_call_sum_sq: int
    max_flips_seen: int
    max_depth_seen: int
    aborted_count: int
    seed: int
    elapsed: float

    @property
    def completed(self) -> int:
        return self.n - self.aborted_count

    @property
    def head_rate(self) -> float:
        return self.heads / self.completed if self.completed else float("nan")

    @property
    def mean_flips(self) -> float:
        return self.flip_total_sum / self.completed if self.completed else float("nan")

    @property
    def mean_recursion_calls(self) -> float:
        return (self.recursion_call_sum / self.completed
                if self.completed else float("nan"))

    def without_timing(self) -> "TrialSummary":
        """Copy with ``elapsed`` zeroed, for bit-identical comparisons."""
        return replace(self, elapsed=0.0)


@dataclass(frozen=True)
class Verdict:
    """Outcome of testing one summary against the oracle's law and cost."""

    target_mean: float
    p_hat: float
    z: float
    mean_interval: tuple[float, float]
    flip_mean: float
    flip_bound: float
    flip_bound_is_exact: bool
    flip_ratio: float
    recursion_mean: float
    recursion_se: float
    aborted_count: int
    pass_mean: bool
    pass_flips: bool
    z_threshold: float

    @property
    def passed(self) -> bool:
        # Aborts under valid preconditions are hard failures.
        return self.pass_mean and self.pass_flips and self.aborted_count == 0

    def as_dict(self) -> dict:
        return {
            "target_mean": self.target_mean,
            "p_hat": self.p_hat,
            "z": self.z,
            "mean_interval": list(self.mean_interval),
            "flip_mean": self.flip_mean,
            "flip_bound": self.flip_bound,
            "flip_bound_is_exact": self.flip_bound_is_exact,
            "flip_ratio": self.flip_ratio,
            "recursion_mean": self.recursion_mean,
            "recursion_se": self.recursion_se,
            "aborted_count": self.aborted_count,
            "pass_mean": self.pass_mean,
            "pass_flips": self.pass_flips,
            "z_threshold": self.z_threshold,
            "passed": self.passed,
        }


# -- statistics helpers ------------------------------------------------------


def wilson_interval(heads: int, n: int, z: float) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion at ``z`` normal units."""
    if n < 1 or not 0 <= heads <= n:
        raise ValueError(f"need 0 <= heads <= n with n >= 1, got heads={heads}, n={n}")
    if not z > 0.0:
        raise ValueError(f"z must be positive, got {z!r}")
    p = heads / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom
    # At the extremes the score bound is exactly 0 (resp. 1); computing it in
    # floats leaves a ~1e-17 residue of either sign, so pin those cases.
    lo = 0.0 if heads == 0 else max(0.0, center - half)
    hi = 1.0 if heads == n else min(1.0, center + half)
    return (lo, hi)


def proportion_z(p_hat: float, p0: float, n: int) -> float:
    """z-statistic of an observed rate against a hypothesized one.

    ``p0`` must lie strictly inside (0, 1); degenerate targets call for exact
    zero/one checks, not a z-test.
    """
    if not (0.0 < p0 < 1.0):
        raise ValueError(f"p0 must lie strictly in (0, 1), got {p0!r}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    return (p_hat - p0) / math.sqrt(p0 * (1.0 - p0) / n)


def _sample_se(total: int, total_sq: int, n: int) -> float:
    """Standard error of the mean from integer sum and sum of squares."""
    if n < 2:
        return 0.0
    var = (total_sq - total * total / n) / (n - 1)
    return math.sqrt(max(var, 0.0) / n)


# -- running trials ----------------------------------------------------------


def bind_factory(kind: FactoryKind, constants,
                 budget: Optional[Budget] = None) -> Callable:
    """Prebuild everything a trial needs; returns ``fn(coins, stream, stats) -> bit``.

    The alias table and parameter checks are done once here, not per trial.
    """
    cs = factories._check_constants(constants)
    table = build_alias_table(cs)
    C = math.fsum(cs)
    max_flips = budget.max_flips if budget is not None else None

    def limit_for(coins):
        return None if max_flips is None else coins.flips_taken + max_flips

    tag = kind.tag
    if tag == "logistic":
        def run(coins, stream, stats):
            return factories._logistic(coins, table, C, stream, limit_for(coins))
    elif tag == "walk_to_zero":
        m = kind.m

        def run(coins, stream, stats):
            return factories._walk_to_zero(coins, table, C, m, stream,
                                           limit_for(coins))
    elif tag == "high_power":
        m, rate = kind.m, kind.beta * C

        def run(coins, stream, stats):
            return factories._high_power(coins, table, rate, m, stream,
                                         limit_for(coins))
    elif tag == "residual":
        m, beta, eps = kind.m, kind.beta, kind.epsilon

        def run(coins, stream, stats):
            return factories._residual(coins, table, C, eps, m, beta, stream,
                                       limit_for(coins), budget, stats)
    elif tag == "linear":
        eps = kind.epsilon

        def run(coins, stream, stats):
            return factories._linear(coins, table, C, eps, stream,
                                     limit_for(coins), budget, stats)
    elif tag == "small_r":
        M = kind.mean_bound

        def run(coins, stream, stats):
            return factories._small_r(coins, table, C, M, stream,
                                      limit_for(coins), budget, stats)
    else:  # pragma: no cover - FactoryKind already rejects unknown tags
        raise ValueError(f"unknown factory tag {tag!r}")
    return run


def _accumulate(fn, coins: CoinSource, stream_seed: int, start: int, count: int):
    """Run trials [start, start+count) on fresh per-trial state; integer sums out."""
    ledger = coins.ledger
    stats = InvocationStats()
    stream = RngStream(stream_seed, start)
    k = len(ledger.per_coin)
    heads = fsum = fsq = rec = recsq = 0
    maxf = maxd = aborted = 0
    percoin = [0] * k
    for j in range(start, start + count):
        stream.rekey(j)
        ledger.reset()
        stats.reset()
        try:
            bit = fn(coins, stream, stats)
        except BudgetExceededError:
            aborted += 1
            continue
        t = ledger.total
        heads += bit
        fsum += t
        fsq += t * t
        rc = stats.recursion_calls
        rec += rc
        recsq += rc * rc
        if t > maxf:
            maxf = t
        if stats.max_depth > maxd:
            maxd = stats.max_depth
        pc = ledger.per_coin
        for i in range(k):
            percoin[i] += pc[i]
    return (heads, fsum, fsq, tuple(percoin), rec, recsq, maxf, maxd, aborted)


def _run_range(args):
    kind, constants, biases, budget, seed, start, count = args
    coins = CoinEnsemble(biases)
    fn = bind_factory(kind, constants, budget)
    return _accumulate(fn, coins, seed, start, count)


def _merge(parts, k: int):
    heads = fsum = fsq = rec = recsq = maxf = maxd = aborted = 0
    percoin = [0] * k
    for (h, fs, fq, pc, rc, rq, mf, md, ab) in parts:
        heads += h
        fsum += fs
        fsq += fq
        rec += rc
        recsq += rq
        maxf = max(maxf, mf)
        maxd = max(maxd, md)
        aborted += ab
        for i in range(k):
            percoin[i] += pc[i]
    return dict(heads=heads, flip_total_sum=fsum, flip_total_sum_sq=fsq,
                per_coin_flip_sums=tuple(percoin), recursion_call_sum=rec,
                recursion_call_sum_sq=recsq, max_flips_seen=maxf,
                max_depth_seen=maxd, aborted_count=aborted)


def run_trials(kind: FactoryKind, constants, biases, n: int, seed: int = 0,
               workers: int = 1, budget: Optional[Budget] = None) -> TrialSummary:
    """``n`` independent trials of the given factory; see module docstring.

    Raises :class:`~bfactory.oracle.PreconditionError` before any sampling if
    the oracle's preconditions fail for this configuration.  Budget aborts are
    recorded in the summary, never raised.
    """
    if n != int(n) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if workers != int(workers) or workers < 1:
        raise ValueError(f"workers must be a positive integer, got {workers!r}")
    cs = tuple(float(c) for c in constants)
    ps = tuple(float(p) for p in biases)
    exact_output_mean(kind, cs, ps)  # precondition gate

    t0 = time.perf_counter()
    work = [(kind, cs, ps, budget, seed, s, min(_CHUNK, n - s))
            for s in range(0, n, _CHUNK)]
    if workers == 1:
        parts = [_run_range(a) for a in work]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_range, work))
    merged = _merge(parts, len(cs))
    return TrialSummary(n=n, seed=seed, elapsed=time.perf_counter() - t0, **merged)


def run_trials_with(factory_fn: Callable, biases, n: int, seed: int = 0,
                    make_coins: Callable = CoinEnsemble) -> TrialSummary:
    """Like :func:`run_trials` but for an arbitrary trial function (serial only).

    ``factory_fn(coins, stream, stats) -> bit`` may be anything — a mock, an
    instrumented wrapper — as long as it honors the coin-source contract.
    """
    if n != int(n) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    coins = make_coins(tuple(float(p) for p in biases))
    t0 = time.perf_counter()
    parts = [_accumulate(factory_fn, coins, seed, s, min(_CHUNK, n - s))
             for s in range(0, n, _CHUNK)]
    merged = _merge(parts, coins.k)
    return TrialSummary(n=n, seed=seed, elapsed=time.perf_counter() - t0, **merged)


def judge(summary: TrialSummary, kind: FactoryKind, constants, biases,
          z_threshold: float = 4.0) -> Verdict:
    """Test a summary against the oracle's exact mean and expected-flip figure.

    The mean check is a two-sided z-test (exact count check when the target
    is 0 or 1).  The flip check is one-sided against upper bounds and
    two-sided against exact expectations, both with ``z_threshold`` sample
    standard errors of slack.
    """
    if not z_threshold > 0.0:
        raise ValueError(f"z_threshold must be positive, got {z_threshold!r}")
    target = exact_output_mean(kind, constants, biases)
    bound = expected_flip_bound(kind, constants, biases)
    completed = summary.completed
    inf = float("inf")

    if completed <= 0:
        return Verdict(target_mean=target, p_hat=float("nan"), z=inf,
                       mean_interval=(0.0, 1.0), flip_mean=float("nan"),
                       flip_bound=bound.value, flip_bound_is_exact=bound.is_exact,
                       flip_ratio=float("nan"), recursion_mean=float("nan"),
                       recursion_se=0.0, aborted_count=summary.aborted_count,
                       pass_mean=False, pass_flips=False, z_threshold=z_threshold)

    heads = summary.heads
    p_hat = heads / completed
    if target <= 0.0 or target >= 1.0:
        ok = heads == 0 if target <= 0.0 else heads == completed
        z = 0.0 if ok else math.copysign(inf, p_hat - target)
        pass_mean = ok
    else:
        z = proportion_z(p_hat, target, completed)
        pass_mean = abs(z) <= z_threshold

    flip_mean = summary.flip_total_sum / completed
    flip_se = _sample_se(summary.flip_total_sum, summary.flip_total_sum_sq, completed)
    if bound.is_exact:
        pass_flips = abs(flip_mean - bound.value) <= z_threshold * flip_se
    else:
        pass_flips = flip_mean <= bound.value + z_threshold * flip_se

    return Verdict(
        target_mean=target,
        p_hat=p_hat,
        z=z,
        mean_interval=wilson_interval(heads, completed, z_threshold),
        flip_mean=flip_mean,
        flip_bound=bound.value,
        flip_bound_is_exact=bound.is_exact,
        flip_ratio=flip_mean / bound.value,
        recursion_mean=summary.recursion_call_sum / completed,
        recursion_se=_sample_se(summary.recursion_call_sum,
                                summary.recursion_call_sum_sq, completed),
        aborted_count=summary.aborted_count,
        pass_mean=pass_mean,
        pass_flips=pass_flips,
        z_threshold=z_threshold,
    )
