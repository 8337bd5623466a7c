"""Monte Carlo check of the random-path summability bound, for a length
weight and for orbit images in a ping-pong configuration."""

from fractions import Fraction

from critreg.exact_pl import Interval, bump, invert
from critreg.stochastic import expectation_bound, omega_sum_monte_carlo, ping_orbit_sums, ping_powers, test_weight

F = Fraction


def main():
    for tau in (0.25, 0.5, 1.0):
        stats = omega_sum_monte_carlo(test_weight(2), tau, 200, 10**4, seed=0)
        partial, closed = expectation_bound(2, tau, 200)
        print(f"tau={tau}: mean {stats.mean:.5f} +- {stats.stderr:.1e}, bound {partial:.5f} (limit {closed:.5f})")

    left = bump(0, F(3, 4), F(1, 4), F(1, 2))
    right = invert(bump(F(1, 4), 1, F(1, 2), F(3, 4)))
    u0 = Interval(F(7, 16), F(1, 2))
    m, n = ping_powers(left, right, u0)
    rep = ping_orbit_sums(left ** m, right ** n, u0, 0.5, 60, 2000, seed=1)
    print(f"ping powers ({m}, {n}); {rep.words_checked} images disjoint: {rep.disjoint}; "
          f"mean {rep.stats.mean:.5f} <= {rep.bound:.5f}")


if __name__ == "__main__":
    main()
