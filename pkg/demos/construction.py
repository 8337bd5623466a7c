"""Build the three-generator smooth action at tau = 0.5 and run its checks.

Usage: python demos/construction.py [N]   (default N = 6; the displacement check grows with N cubed)
"""

import sys
import time

from critreg.feasibility import find_feasible
from critreg.tsuboi import (
    block_displacement_check,
    build_generators,
    build_level_structure,
    junction_mismatch,
    nested_support_check,
    sampled_derivative_holder,
    verify_commutations,
)


def main(N: int = 6):
    params = find_feasible(0.5)
    action = build_generators(build_level_structure(params, N))
    print(f"params: p={params.p:.4f} q={params.q:g} q'={params.q_prime:.4f} r={params.r:.4f}")
    print(f"blocks: {action.structure.count}, tail mass beyond N: {action.structure.tail_mass:.3g}")
    for relator, dev in verify_commutations(action, 1000).items():
        print(f"{relator:>14}: {dev:.3g}")
    print(f"worst junction mismatch: {max(junction_mismatch(action).values()):.3g}")
    print(f"nested supports: {nested_support_check(action)}")
    for name in "abt":
        print(f"[D{name}']_tau on max-norm <= {N - 2}: {sampled_derivative_holder(action, name, N - 2).value:.4f}")
    start = time.perf_counter()
    rep = block_displacement_check(action, 1000)
    print(f"displacement: {rep['blocks']} blocks, worst ratio {rep['worst_ratio']:.4f}, "
          f"passed {rep['passed']} ({time.perf_counter() - start:.0f}s)")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 6)
