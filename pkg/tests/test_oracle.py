"""Closed-form oracles, the tridiagonal absorption solver, and preconditions.

The closed forms here are the ground truth the whole harness tests against,
so this file leans on values derivable by hand (small rational cases) and on
the built-in cross-check between the closed forms and the independent
linear-system solver.
"""

import math

import numpy as np
import pytest

from bfactory.oracle import (FactoryKind, FlipBound, PreconditionError,
                             absorption_probability,
                             equivalent_flip_lower_bound, exact_output_mean,
                             expected_absorption_time, expected_flip_bound,
                             geometric_sum)


# -- FactoryKind -------------------------------------------------------------

def test_kind_requires_exactly_the_right_parameters():
    with pytest.raises(PreconditionError, match="missing parameter 'm'"):
        FactoryKind("walk_to_zero")
    with pytest.raises(PreconditionError, match="unexpected parameter 'm'"):
        FactoryKind("linear", m=3, epsilon=0.5)
    with pytest.raises(PreconditionError, match="unknown factory tag"):
        FactoryKind("bogus")
    # the constructors fill the bundle correctly
    assert FactoryKind.logistic().tag == "logistic"
    assert FactoryKind.residual(3, 1.25, 0.5).epsilon == 0.5


def test_kind_parameter_ranges():
    with pytest.raises(PreconditionError, match="m must be >= 2"):
        FactoryKind.walk_to_zero(1)
    with pytest.raises(PreconditionError, match="m must be >= 0"):
        FactoryKind.high_power(-1, 1.5)
    with pytest.raises(PreconditionError, match="beta"):
        FactoryKind.high_power(2, 1.0)
    with pytest.raises(PreconditionError, match="epsilon"):
        FactoryKind.linear(0.0)
    with pytest.raises(PreconditionError, match=r"M ∈ \(0, 1/2\)"):
        FactoryKind.small_r(0.5)
    assert FactoryKind.high_power(0, 1.5).m == 0  # m = 0 is legal here


def test_slack_kind_property():
    assert FactoryKind.linear(0.2).slack_kind == "epsilon"
    assert FactoryKind.small_r(0.1).slack_kind == "mean_bound"
    assert FactoryKind.logistic().slack_kind is None
    assert FactoryKind.residual(3, 1.25, 0.5).slack_kind is None


# -- geometric sums ----------------------------------------------------------

def test_geometric_sum_small_cases():
    assert geometric_sum(0.5, 0) == 1.0
    assert geometric_sum(0.5, 2) == 1.75
    assert geometric_sum(0.0, 5) == 1.0
    assert geometric_sum(1.0, 99) == 100.0
    with pytest.raises(ValueError):
        geometric_sum(0.5, -1)


def test_geometric_sum_closed_form_matches_direct():
    rng = np.random.default_rng(5)
    for _ in range(100):
        x = float(rng.uniform(0, 1.5))
        d = int(rng.integers(65, 200))
        direct = math.fsum(x**j for j in range(d + 1))
        assert geometric_sum(x, d) == pytest.approx(direct, rel=1e-12)


def test_geometric_sum_stable_near_one():
    # finite and monotone in x right up to the edge, even for huge degree
    degree = 10**5
    values = [geometric_sum(x, degree)
              for x in (0.0, 0.5, 0.9, 0.99, 0.9999, 1 - 1e-6)]
    assert all(math.isfinite(v) for v in values)
    assert values == sorted(values)
    assert values[-1] < degree + 1


# -- exact output means ------------------------------------------------------

def test_logistic_mean():
    assert exact_output_mean(FactoryKind.logistic(), (1.0, 2.0), (0.5, 0.25)) == 0.5
    assert exact_output_mean(FactoryKind.logistic(), (2.0,), (0.25,)) == pytest.approx(1 / 3)
    assert exact_output_mean(FactoryKind.logistic(), (1.0,), (0.0,)) == 0.0


def test_walk_mean_small_cases():
    # m=3, r=1/2: r(1-r^2)/(1-r^3) = 3/7
    kind = FactoryKind.walk_to_zero(3)
    assert exact_output_mean(kind, (1.0,), (0.5,)) == pytest.approx(3 / 7, abs=1e-15)
    # m=2 degenerates to a single logistic step
    kind2 = FactoryKind.walk_to_zero(2)
    assert exact_output_mean(kind2, (1.0,), (0.5,)) == pytest.approx(1 / 3, abs=1e-15)
    # r=1 is fine through the geometric-sum form: m/(m+... ) -> (m-1)/m
    kind10 = FactoryKind.walk_to_zero(10)
    assert exact_output_mean(kind10, (2.0,), (0.5,)) == pytest.approx(9 / 10, abs=1e-15)


def test_walk_mean_equals_solver_complement():
    # The walk emits 1 exactly when it is absorbed at 0, and moves away from
    # 0 with the logistic tails probability 1/(1+r).
    for m in (2, 3, 5, 10, 17):
        for r in (0.1, 0.3, 0.5, 0.7, 0.9, 0.999):
            law = exact_output_mean(FactoryKind.walk_to_zero(m), (1.0,), (r,))
            hit = absorption_probability(m, 1.0 / (1.0 + r), 1)
            assert abs(law - (1.0 - hit)) < 1e-12


def test_high_power_mean():
    kind = FactoryKind.high_power(2, 1.25)
    # beta*r = 1/2: (1/4)/(1+1/2+1/4) = 1/7
    assert exact_output_mean(kind, (1.0,), (0.4,)) == pytest.approx(1 / 7, abs=1e-15)
    kind1 = FactoryKind.high_power(1, 1.25)
    assert exact_output_mean(kind1, (1.0,), (0.4,)) == pytest.approx(1 / 3, abs=1e-15)
    kind0 = FactoryKind.high_power(0, 1.25)
    assert exact_output_mean(kind0, (1.0,), (0.4,)) == 1.0


def test_high_power_rejects_br_at_least_one():
    with pytest.raises(PreconditionError, match=r"beta \* r < 1 violated"):
        exact_output_mean(FactoryKind.high_power(2, 1.25), (1.0,), (0.8,))


def test_residual_mean():
    # beta*r = 1/2 throughout
    beta, p = 1.25, 0.4
    assert exact_output_mean(FactoryKind.residual(2, beta, 0.5), (1.0,), (p,)) \
        == pytest.approx(0.5, abs=1e-15)
    assert exact_output_mean(FactoryKind.residual(3, beta, 0.5), (1.0,), (p,)) \
        == pytest.approx(1 / 3, abs=1e-15)
    assert exact_output_mean(FactoryKind.residual(4, beta, 0.5), (1.0,), (p,)) \
        == pytest.approx(3 / 14, abs=1e-15)


def test_residual_rejects_bad_margin():
    # 1 - (1-eps)*beta <= 0 means the inflation ate the whole slack
    with pytest.raises(PreconditionError, match=r"1 - \(1 - epsilon\) \* beta"):
        exact_output_mean(FactoryKind.residual(3, 1.2, 0.1), (1.0,), (0.1,))


def test_linear_mean_is_exactly_r():
    kind = FactoryKind.linear(0.5)
    assert exact_output_mean(kind, (2.0,), (0.25,)) == 0.5
    r = exact_output_mean(FactoryKind.linear(0.2), (1.0, 2.0, 1.0), (0.1, 0.15, 0.1))
    assert r == math.fsum((0.1, 0.3, 0.1))


def test_linear_rejects_r_above_slack():
    with pytest.raises(PreconditionError, match="r <= 1 - epsilon violated"):
        exact_output_mean(FactoryKind.linear(0.5), (2.0,), (0.3,))


def test_small_r_mean_and_rejection():
    assert exact_output_mean(FactoryKind.small_r(0.1), (1.0,), (0.05,)) == 0.05
    with pytest.raises(PreconditionError, match="r <= M violated"):
        exact_output_mean(FactoryKind.small_r(0.1), (1.0,), (0.2,))


def test_input_validation():
    kind = FactoryKind.logistic()
    with pytest.raises(PreconditionError, match="nonempty"):
        exact_output_mean(kind, (), ())
    with pytest.raises(PreconditionError, match="finite and >= 0"):
        exact_output_mean(kind, (-1.0,), (0.5,))
    with pytest.raises(PreconditionError, match="at least one constant"):
        exact_output_mean(kind, (0.0, 0.0), (0.5, 0.5))
    with pytest.raises(PreconditionError, match="biases"):
        exact_output_mean(kind, (1.0,), (1.5,))
    with pytest.raises(PreconditionError, match="got 2 biases for 1"):
        exact_output_mean(kind, (1.0,), (0.5, 0.5))


# -- flip bounds -------------------------------------------------------------

def test_logistic_bound_is_exact():
    bound = expected_flip_bound(FactoryKind.logistic(), (3.0,), (1 / 3,))
    assert bound == FlipBound(1.5, True)


def test_walk_bound():
    bound = expected_flip_bound(FactoryKind.walk_to_zero(10), (1.0,), (0.5,))
    assert bound == FlipBound(9.0, False)


def test_high_power_bound():
    bound = expected_flip_bound(FactoryKind.high_power(2, 1.25), (1.0,), (0.4,))
    assert bound.value == pytest.approx(1.25 / 0.5)
    assert not bound.is_exact


def test_linear_bound():
    bound = expected_flip_bound(FactoryKind.linear(0.5), (2.0,), (0.25,))
    assert bound.value == pytest.approx(7.67 * 2.0 / 0.5)
    assert not bound.is_exact


def test_small_r_bound_value():
    # C/((1-2M)(1+r)) + r*15.2*C/(1-2M+r) at M=0.01, r=0.005, C=1
    bound = expected_flip_bound(FactoryKind.small_r(0.01), (1.0,), (0.005,))
    assert bound.value == pytest.approx(1.0924888661427146, abs=1e-12)
    assert bound.value < 1.1
    assert not bound.is_exact


def test_bounds_positive_and_means_in_range():
    rng = np.random.default_rng(12)
    kinds = [FactoryKind.logistic(), FactoryKind.walk_to_zero(5),
             FactoryKind.high_power(3, 1.25), FactoryKind.linear(0.4),
             FactoryKind.small_r(0.2)]
    for _ in range(200):
        k = int(rng.integers(1, 4))
        cs = tuple(float(c) for c in rng.uniform(0.1, 1.0, k))
        # r stays below 0.18, inside every kind's precondition above
        ps = tuple(float(p) for p in rng.uniform(0.0, 0.06, k))
        for kind in kinds:
            mean = exact_output_mean(kind, cs, ps)
            assert 0.0 <= mean <= 1.0
            assert expected_flip_bound(kind, cs, ps).value > 0.0


# -- absorption solver -------------------------------------------------------

def test_absorption_boundaries():
    assert absorption_probability(5, 0.3, 0) == 0.0
    assert absorption_probability(5, 0.3, 5) == 1.0


def test_absorption_known_values():
    # q/p = 1/2: (1 - 1/2)/(1 - 1/8) = 4/7
    assert absorption_probability(3, 2 / 3, 1) == pytest.approx(4 / 7, abs=1e-12)
    # q/p = 2: (1 - 2)/(1 - 4) = 1/3
    assert absorption_probability(2, 1 / 3, 1) == pytest.approx(1 / 3, abs=1e-12)
    # symmetric walk: start/m
    assert absorption_probability(4, 0.5, 1) == pytest.approx(0.25, abs=1e-12)


def test_absorption_validation():
    with pytest.raises(ValueError):
        absorption_probability(0, 0.5, 0)
    with pytest.raises(ValueError):
        absorption_probability(3, 0.0, 1)
    with pytest.raises(ValueError):
        absorption_probability(3, 0.5, 4)


def test_absorption_solver_vs_closed_form_random():
    # The function itself raises if its two routes disagree; drive it over a
    # spread of instances, including strong drifts and larger m.
    rng = np.random.default_rng(2024)
    for _ in range(500):
        m = int(rng.integers(1, 21))
        up = float(rng.uniform(0.02, 0.98))
        start = int(rng.integers(0, m + 1))
        value = absorption_probability(m, up, start)
        assert 0.0 <= value <= 1.0


def test_expected_time_known_values():
    # m=2, up=1/3: (start - m*P)/(q-p) = (1 - 2/3)/(1/3) = 1
    assert expected_absorption_time(2, 1 / 3, 1) == pytest.approx(1.0, abs=1e-12)
    # The down-biased walk the factories use at r=1/2, m=3:
    # (1+r)[m/(1-r^m) - 1/(1-r)] = 15/7
    assert expected_absorption_time(3, 2 / 3, 1) == pytest.approx(15 / 7, abs=1e-12)
    assert expected_absorption_time(5, 0.3, 0) == 0.0
    assert expected_absorption_time(5, 0.3, 5) == 0.0


def test_expected_time_rejects_half():
    with pytest.raises(ValueError, match="1/2"):
        expected_absorption_time(3, 0.5, 1)


def test_expected_time_solver_vs_formula_random():
    rng = np.random.default_rng(77)
    for _ in range(500):
        m = int(rng.integers(1, 21))
        up = float(rng.uniform(0.02, 0.98))
        if abs(up - 0.5) < 1e-3:
            continue
        start = int(rng.integers(0, m + 1))
        assert expected_absorption_time(m, up, start) >= 0.0


def test_expected_time_walk_bound():
    # Started at 1 with up = 1/(1+r), the expected time stays below
    # (m-1)(1+r)/(1-r): that is what caps the walk factory at C(m-1) flips.
    for m in (2, 5, 10):
        for r in (0.1, 0.3, 0.5, 0.7, 0.9):
            t = expected_absorption_time(m, 1.0 / (1.0 + r), 1)
            assert t <= (m - 1) * (1 + r) / (1 - r) + 1e-9


# -- information floor -------------------------------------------------------

def test_equivalent_flip_lower_bound():
    assert equivalent_flip_lower_bound(1.0, 0.3) == 1.0
    assert equivalent_flip_lower_bound(2.0, 0.25) == pytest.approx(3.0)
    assert equivalent_flip_lower_bound(5.0, 0.0) == 5.0


def test_equivalent_flip_lower_bound_validation():
    with pytest.raises(ValueError, match=r"C \* p < 1"):
        equivalent_flip_lower_bound(2.0, 0.5)
    with pytest.raises(ValueError):
        equivalent_flip_lower_bound(0.0, 0.5)
    with pytest.raises(ValueError):
        equivalent_flip_lower_bound(1.0, 1.5)
