import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from critreg.exact_pl import Interval, bump, invert
from critreg.stochastic import (
    SeqWeight,
    expectation_bound,
    geometric_weight,
    omega_sum_monte_carlo,
    ping_orbit_sums,
    ping_powers,
    test_weight as length_weight,
)

F = Fraction
LEFT = bump(0, F(3, 4), F(1, 4), F(1, 2))       # moves right on (0, 3/4)
RIGHT = bump(F(1, 4), 1, F(1, 2), F(3, 4))      # moves right on (1/4, 1)
U0 = Interval(F(7, 16), F(1, 2))


def test_zero_weight_gives_zero():
    zero = SeqWeight(d=2, by_length=lambda n: np.zeros(n.shape), total_mass=0.0)
    stats = omega_sum_monte_carlo(zero, 0.5, 20, 50, seed=1)
    assert stats.mean == 0.0 and stats.max == 0.0


def test_geometric_weight_is_deterministic():
    stats = omega_sum_monte_carlo(geometric_weight(2), 0.5, 40, 100, seed=2)
    expected = sum(2.0**-n for n in range(1, 41))
    assert stats.mean == pytest.approx(expected)
    assert stats.max < 1


def test_length_weight_mean_below_bound():
    stats = omega_sum_monte_carlo(length_weight(2), 0.5, 200, 2000, seed=0)
    partial, closed = expectation_bound(2, 0.5, 200)
    assert stats.mean <= partial + 3 * stats.stderr
    # the weight depends on length only, so each path sum is sum_n (2^-n / (n(n+1)))^(1/2)
    direct = sum(math.sqrt(2.0**-n / (n * (n + 1))) for n in range(1, 201))
    assert stats.mean == pytest.approx(direct, rel=1e-12)


def test_word_dependent_weight():
    # weight on the first letter only: alpha(v) = 2^-|v| / (|v|(|v|+1)) if v starts with 0, else 0
    alpha = SeqWeight(d=2, weight=lambda v: 2.0 ** -len(v) / (len(v) * (len(v) + 1)) if v[0] == 0 else 0.0)
    stats = omega_sum_monte_carlo(alpha, 1.0, 10, 400, seed=4)
    full = sum(2.0**-n / (n * (n + 1)) for n in range(1, 11))
    assert set(np.round(stats.sums, 12)) <= {0.0, round(full, 12)}
    assert stats.mean <= expectation_bound(2, 1.0, 10)[0]


def test_expectation_bound_examples():
    partial, closed = expectation_bound(2, 1.0, 60)
    assert partial == pytest.approx(1.0) and closed == pytest.approx(1.0)
    assert expectation_bound(2, 0.5, 1)[0] == pytest.approx(2**-0.5)
    assert expectation_bound(2, 0.5, 10**4)[1] == pytest.approx(1 / (math.sqrt(2) - 1))
    with pytest.raises(ValueError):
        expectation_bound(1, 0.5, 3)


def test_reproducible_and_chunk_independent():
    a = omega_sum_monte_carlo(length_weight(3), 0.7, 50, 1000, seed=9)
    b = omega_sum_monte_carlo(length_weight(3), 0.7, 50, 1000, seed=9, chunk=77)
    assert a.mean == b.mean and np.array_equal(a.sums, b.sums)
    assert a.checkpoint_steps == (12, 25, 50)
    assert len(a.csv_rows()) == 1000


def test_input_validation():
    with pytest.raises(ValueError):
        SeqWeight(d=1, by_length=lambda n: n)
    with pytest.raises(ValueError):
        SeqWeight(d=2)
    with pytest.raises(ValueError):
        omega_sum_monte_carlo(length_weight(2), 0.0, 10, 10, seed=0)


def test_ping_configuration_and_disjointness():
    g2 = invert(RIGHT)
    m, n = ping_powers(LEFT, g2, U0)
    rep = ping_orbit_sums(LEFT ** m, g2 ** n, U0, 0.5, 60, 500, seed=5)
    assert rep.disjoint
    assert rep.words_checked == 2 + 4 + 8 + 16 + 32 + 64
    assert rep.max_layer_mass <= 1
    assert rep.stats.mean <= rep.bound + 3 * rep.stats.stderr


def test_ping_requires_configuration():
    with pytest.raises(ValueError):
        ping_orbit_sums(LEFT, RIGHT, U0, 0.5, 10, 10, seed=0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 1.0))
def test_mean_below_bound_for_any_seed(seed, tau):
    stats = omega_sum_monte_carlo(length_weight(2), tau, 60, 200, seed=seed)
    assert stats.mean <= expectation_bound(2, tau, 60)[0] + 3 * stats.stderr + 1e-12
