"""Acceptance checks, one per criterion. Run with ``pytest tests/test_acceptance.py -s``
to see the PASS/FAIL line each criterion prints."""

import time

import numpy as np
import pytest

from critreg.dynamics import (
    ActionSpec,
    f_disjoint_commutators_check,
    find_crossed_pair,
    find_two_chain,
    is_two_chain,
    translation_nesting_example,
)
from critreg.exact_pl import commutator, compose, invert, support_components, thompson_generators
from critreg.feasibility import GOLDEN_THRESHOLD, Q_GRID, check_conditions, consolidated_window, find_feasible, sup_tau
from critreg.regularity import k_tau_lower_bound, min_k_for_tau, verify_nesting_witness
from critreg.stochastic import omega_sum_monte_carlo, test_weight as length_weight
from critreg.tsuboi import (
    block_displacement_check,
    build_generators,
    build_level_structure,
    junction_mismatch,
    sampled_derivative_holder,
    verify_commutations,
)

from support import commuting_pair, oracle_boundary_moved, random_action

pytestmark = pytest.mark.slow


def verdict(number: int, ok: bool, detail: str) -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def action8():
    return build_generators(build_level_structure(find_feasible(0.5), 8))


def test_criterion_1_golden_threshold():
    start = time.perf_counter()
    value = sup_tau(1e-4)
    elapsed = time.perf_counter() - start
    inside = find_feasible(0.60)
    residuals = check_conditions(inside).as_dict() if inside else {}
    ok = (abs(value - 0.61803399) <= 2e-4 and elapsed < 5.0 and inside is not None
          and all(v >= 0 for v in residuals.values()) and find_feasible(0.63) is None)
    verdict(1, ok, f"sup_tau={value:.8f} (golden {GOLDEN_THRESHOLD:.8f}) in {elapsed:.2f}s; "
                   f"min residual at 0.60 = {min(residuals.values()):.3g}; none at 0.63")


def test_criterion_2_window_algebra():
    taus = np.linspace(0.02, 0.98, 50)
    qs = sorted(set(Q_GRID) | {2.0**20})
    increasing = all(np.all(np.diff([consolidated_window(t, q)[1] for q in qs]) > 0) for t in taus)
    errors = [abs(consolidated_window(t, 2.0**20)[1] - (1 - t * t) / (t * t)) for t in taus]
    worst = max(errors)
    verdict(2, increasing and worst <= 1e-6,
            f"increasing in q: {increasing}; worst |upper(tau, 2^20) - limit| = {worst:.3g} "
            f"at tau={taus[int(np.argmax(errors))]:.3f} (tolerance 1e-6)")


def test_criterion_3_construction(action8):
    comm = verify_commutations(action8, 1000, seed=0)
    junction = max(junction_mismatch(action8).values())
    action16 = build_generators(build_level_structure(action8.structure.params, 16))
    changes = {}
    for name in ("a", "t"):
        h8 = sampled_derivative_holder(action8, name, 6).value
        h16 = sampled_derivative_holder(action16, name, 6).value
        changes[name] = abs(h16 - h8) / h8
    ok = comm["max"] <= 1e-9 and junction <= 1e-12 and all(c < 0.05 for c in changes.values())
    verdict(3, ok, f"commutators {comm['max']:.3g}; junctions {junction:.3g}; "
                   f"N=8 -> 16 change [Da']={changes['a']:.1%} [Dt']={changes['t']:.1%} (limit 5%)")


def test_criterion_4_displacement(action8):
    rep = block_displacement_check(action8, 1000)
    verdict(4, rep["passed"] and rep["blocks"] == 17**3,
            f"{rep['blocks']} blocks, worst ratio {rep['worst_ratio']:.4f}, {len(rep['failed'])} failures")


def test_criterion_5_thompson():
    A, B = thompson_generators()
    ab = compose(A, invert(B))
    exact = [commutator(ab, compose(invert(A), compose(B, A))).is_identity(),
             commutator(ab, compose(invert(A ** 2), compose(B, A ** 2))).is_identity()]
    start = time.perf_counter()
    disjoint = f_disjoint_commutators_check(3)
    elapsed = time.perf_counter() - start
    verdict(5, all(exact) and disjoint and elapsed < 10.0,
            f"relations exact: {exact}; disjoint commutator supports at budget 3: {disjoint} in {elapsed:.2f}s")


def test_criterion_6_diagnostic_equivalence():
    disagreements = []
    for seed in range(100):
        gens = random_action(seed)
        action = ActionSpec(gens, 4)
        answers = (oracle_boundary_moved(gens, 4), find_two_chain(action) is not None,
                   find_crossed_pair(action) is not None, find_crossed_pair(action, "ping") is not None)
        if len(set(answers)) > 1:
            disagreements.append((seed, answers))
    verdict(6, not disagreements, f"100 actions at budget 4, disagreements: {disagreements}")


def test_criterion_7_commuting_pairs():
    chains = []
    for seed in range(100):
        f, g = commuting_pair(seed)
        comps = support_components(f) + support_components(g)
        if any(is_two_chain(J, K) for J in comps for K in comps):
            chains.append(seed)
        elif find_two_chain(ActionSpec({"f": f, "g": g}, 2)) is not None:
            chains.append(seed)
    verdict(7, not chains, f"100 commuting pairs, pairs with a two-chain: {chains}")


def _perturbed(w, step, level):
    def broken(n):
        s, cert = w.rule(n)
        if n == step:
            cert = list(cert)
            cert[level - 2] = 0
        return s, cert
    return type(w)(maps=w.maps, intervals=w.intervals, u=w.u, rule=broken, names=w.names)


def test_criterion_8_nesting():
    w = translation_nesting_example(3)
    rep = verify_nesting_witness(w, 40, 1e-6)
    bad = verify_nesting_witness(_perturbed(w, 7, 3), 40, 1e-6)
    ok = (rep.accepted and rep.condition_ii and not bad.accepted and bad.failing_step == (7, 3)
          and min_k_for_tau(0.5) == 4 and k_tau_lower_bound(0.5) == 3)
    verdict(8, ok, f"example accepted: {rep.accepted}; perturbation at (7, 3) rejected at {bad.failing_step}; "
                   f"min_k(0.5)={min_k_for_tau(0.5)}, lower bound {k_tau_lower_bound(0.5)}")


def test_criterion_9_stochastic():
    first = omega_sum_monte_carlo(length_weight(2), 0.5, 200, 10**4, seed=2024)
    second = omega_sum_monte_carlo(length_weight(2), 0.5, 200, 10**4, seed=2024)
    bound = 2.4142 + 3 * first.stderr
    identical = first.sums.tobytes() == second.sums.tobytes() and first.mean == second.mean
    verdict(9, first.mean <= bound and identical,
            f"mean {first.mean:.6f} <= {bound:.6f}; bit-identical rerun: {identical}")
