"""Scan the feasible window for the construction parameters and locate the
largest exponent tau that admits a tuple."""

import numpy as np

from critreg.feasibility import GOLDEN_THRESHOLD, check_conditions, consolidated_window, find_feasible, sup_tau


def main():
    print(f"sup tau = {sup_tau(1e-6):.8f} (closed form {GOLDEN_THRESHOLD:.8f})")
    print("tau     lower     upper(q=2^20)  tuple")
    for tau in np.linspace(0.1, 0.7, 7):
        lo, hi = consolidated_window(tau, 2.0**20)
        params = find_feasible(tau)
        if params is None:
            found = "none"
        else:
            slack = min(check_conditions(params).as_dict().values())
            found = f"p={params.p:.3f} q={params.q:g} q'={params.q_prime:.3f} r={params.r:.3f} (slack {slack:.2g})"
        print(f"{tau:.2f}  {lo:8.4f}  {hi:12.4f}   {found}")


if __name__ == "__main__":
    main()
