import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from critreg.feasibility import (
    GOLDEN_THRESHOLD,
    Q_GRID,
    check_conditions,
    consolidated_window,
    emit_region,
    exact_window,
    find_feasible,
    reconstruct,
    sup_tau,
    upper_is_increasing,
    window_limit,
)
from critreg.tsuboi import Params, build_generators, build_level_structure


def test_residual_examples():
    res = check_conditions(Params(tau=0.5, p=4, q=4, q_prime=4, r=4))
    assert res.b == pytest.approx(0.25)
    assert res.d == pytest.approx(-0.5)
    assert not res.feasible


def test_small_tau_relaxes_a_d_e():
    res = check_conditions(Params(tau=1e-9, p=4, q=4, q_prime=3, r=4))
    assert res.a_left == pytest.approx(0.75, abs=1e-6)
    assert res.d > 0 and res.e > 0


def test_strictness_matches_the_inequalities():
    # (D) tight at zero slack is still feasible; (B) at zero slack is not
    tau, r = 0.5, 2.0
    p = 1 / (tau * (1 - 1 / r))
    res = check_conditions(Params(tau=tau, p=p, q=64, q_prime=8, r=r))
    assert res.d == pytest.approx(0.0, abs=1e-15)
    assert not check_conditions(Params(tau=0.1, p=3, q=3, q_prime=3, r=3)).feasible


def test_window_examples():
    lo, hi = consolidated_window(0.6, 1e9)
    assert lo == pytest.approx(1.5)
    assert hi == pytest.approx(16 / 9, rel=1e-6)
    assert window_limit(0.6) == pytest.approx(16 / 9)
    lo, hi = consolidated_window(0.63, 2.0**20)
    assert lo == pytest.approx(0.63 / 0.37)
    assert hi < lo
    phi = GOLDEN_THRESHOLD
    assert window_limit(phi) == pytest.approx(phi / (1 - phi))
    with pytest.raises(ValueError):
        consolidated_window(0.5, 1.0)


def test_exact_window_is_inside_consolidated():
    for tau in (0.1, 0.3, 0.5, 0.6):
        for q in (4.0, 64.0, 2.0**20):
            assert exact_window(tau, q)[1] <= consolidated_window(tau, q)[1] + 1e-9


def test_window_limit_error_at_finite_q():
    # upper(tau, q) = ((1-tau^2) q - tau)/(tau^2 q + tau) falls short of the limit by exactly 1/(tau^2 (tau q + 1))
    q = 2.0**20
    for tau in np.linspace(0.02, 0.98, 50):
        gap = window_limit(tau) - consolidated_window(tau, q)[1]
        assert gap == pytest.approx(1 / (tau**2 * (tau * q + 1)), rel=1e-6)


def test_find_feasible_examples():
    for tau in (0.1, 0.5, 0.6):
        params = find_feasible(tau)
        assert params is not None and params.tau == tau
        res = check_conditions(params)
        assert res.feasible and all(v >= 0 for v in res.as_dict().values())
    assert find_feasible(0.63) is None
    assert find_feasible(0.7) is None


def test_feasible_tuples_build():
    st = build_level_structure(find_feasible(0.6), 3)
    assert build_generators(st).structure is st


def test_sup_tau_brackets_golden_ratio():
    assert abs(sup_tau(1e-4) - GOLDEN_THRESHOLD) <= 2e-4
    assert abs(sup_tau(1e-1) - 0.618) <= 0.1
    with pytest.raises(ValueError):
        sup_tau(0)


def test_emit_region_rows():
    rows = emit_region([0.6, 0.63, 0.99], [1000.0])
    assert [r["feasible"] for r in rows] == [True, False, False]
    assert rows[2]["lower"] == pytest.approx(99)
    assert set(rows[0]) == {"tau", "q", "lower", "upper", "feasible"}
    with pytest.raises(ValueError):
        emit_region([], [2.0])


def test_golden_root_closes_window():
    phi = GOLDEN_THRESHOLD
    assert phi**2 + phi - 1 == pytest.approx(0.0, abs=1e-15)
    assert (1 - phi**2) / phi**2 == pytest.approx(phi / (1 - phi))


@settings(max_examples=60)
@given(st.floats(0.01, 0.61))
def test_reconstructions_round_trip(tau):
    for q in Q_GRID:
        params = reconstruct(tau, q)
        if params is not None:
            assert check_conditions(params).feasible
    assert find_feasible(tau) is not None


@given(st.floats(0.02, 0.98))
def test_upper_increasing_in_q(tau):
    assert upper_is_increasing(tau, Q_GRID)


@given(st.floats(0.62, 0.99))
def test_no_tuple_above_threshold(tau):
    assert find_feasible(tau) is None
    assert window_limit(tau) <= tau / (1 - tau) + 1e-12
    assert not math.isnan(window_limit(tau))
