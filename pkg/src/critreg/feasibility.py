"""Parameter system for the nested lamplighter construction.

Five inequalities on (tau, p, q, q', r) decide whether the three-level block
construction is C^{1,tau}:

    (A)  r*tau <= q'/q < 1
    (B)  1/p + 1/q + 1/r < 1
    (C)  1/q' + 1/r < 1
    (D)  tau*p*(1 - 1/r) <= 1
    (E)  tau*q'*(1 - 1/r) <= 1

Eliminating q' and r leaves a window for q/p whose q -> infinity limit closes
at the positive root of tau^2 + tau - 1, i.e. at the golden ratio minus one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .tsuboi import Params

__all__ = [
    "GOLDEN_THRESHOLD",
    "Residuals",
    "check_conditions",
    "consolidated_window",
    "exact_window",
    "window_limit",
    "reconstruct",
    "find_feasible",
    "sup_tau",
    "emit_region",
    "Q_GRID",
]

GOLDEN_THRESHOLD = (math.sqrt(5.0) - 1.0) / 2.0
Q_GRID = tuple(2.0**k for k in range(1, 21))


@dataclass(frozen=True)
class Residuals:
    """Slack of each inequality; positive means satisfied with room."""

    a_left: float   # q'/q - r*tau            >= 0
    a_right: float  # 1 - q'/q                 > 0
    b: float        # 1 - (1/p + 1/q + 1/r)    > 0
    c: float        # 1 - (1/q' + 1/r)         > 0
    d: float        # 1 - tau*p*(1 - 1/r)     >= 0
    e: float        # 1 - tau*q'*(1 - 1/r)    >= 0

    STRICT = ("a_right", "b", "c")

    @property
    def feasible(self) -> bool:
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name in self.STRICT:
                if not v > 0:
                    return False
            elif not v >= 0:
                return False
        return True

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def check_conditions(params: Params) -> Residuals:
    tau, p, q, qp, r = params.tau, params.p, params.q, params.q_prime, params.r
    return Residuals(
        a_left=qp / q - r * tau,
        a_right=1.0 - qp / q,
        b=1.0 - (1.0 / p + 1.0 / q + 1.0 / r),
        c=1.0 - (1.0 / qp + 1.0 / r),
        d=1.0 - tau * p * (1.0 - 1.0 / r),
        e=1.0 - tau * qp * (1.0 - 1.0 / r),
    )


def consolidated_window(tau: float, q: float) -> Tuple[float, float]:
    """(lower, upper) bounds on q/p in the published single-condition form."""
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")
    if not q > 1:
        raise ValueError("q must exceed 1")
    lower = tau / (1.0 - tau)
    upper = min((1.0 - tau) * q - 1.0, ((1.0 - tau**2) * q - tau) / (tau**2 * q + tau))
    return lower, upper


def exact_window(tau: float, q: float) -> Tuple[float, float]:
    """(lower, upper) on q/p obtained by eliminating q' and r from (A)-(E).

    With x = 1/r the inequalities force x > tau (A), x >= tau^2 q/(tau^2 q+1)
    ((A) with (E)), and tau*q*(1-x) <= q/p < q*(1-x) - 1 ((D), (B)).
    Slightly narrower than :func:`consolidated_window` at finite q; both share
    the q -> infinity limit.
    """
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")
    lower = tau / (1.0 - tau)
    x_min = max(tau, tau**2 * q / (tau**2 * q + 1.0))
    return lower, q * (1.0 - x_min) - 1.0


def window_limit(tau: float) -> float:
    """lim_{q->inf} of the upper window bound: (1 - tau^2)/tau^2."""
    return (1.0 - tau**2) / tau**2


def _mid(lo: float, hi: float) -> float:
    return 0.5 * (lo + hi)


def reconstruct(tau: float, q: float) -> Optional[Params]:
    """Rebuild (p, q', r) for a given q, or None if the window is empty.

    Order: q/p at the window midpoint, then x = 1/r in the middle of its
    admissible range (which puts (D) and (B) strictly inside), then q' in the
    middle of the interval cut out by (A), (C), (E).
    """
    lower, upper = exact_window(tau, q)
    if not lower < upper:
        return None
    ratio = _mid(lower, upper)
    p = q / ratio
    if p <= 1:
        return None
    x_min = max(tau, tau**2 * q / (tau**2 * q + 1.0), 1.0 - ratio / (tau * q))
    x_max = 1.0 - (ratio + 1.0) / q
    if not x_min < x_max:
        return None
    x = _mid(x_min, x_max)
    r = 1.0 / x
    qp_lo = max(r * tau * q, r / (r - 1.0))
    qp_hi = min(q, 1.0 / (tau * (1.0 - x)))
    if not qp_lo < qp_hi:
        return None
    qp = _mid(qp_lo, qp_hi)
    params = Params(tau=tau, p=p, q=q, q_prime=qp, r=r)
    return params if check_conditions(params).feasible else None


def find_feasible(tau: float, q_grid: Iterable[float] = Q_GRID) -> Optional[Params]:
    """First q on the grid admitting a full feasible tuple."""
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")
    for q in q_grid:
        params = reconstruct(tau, q)
        if params is not None:
            return params
    return None


def sup_tau(tolerance: float, q_grid: Iterable[float] = Q_GRID) -> float:
    """Bisect tau on feasibility verdicts; returns the midpoint of the final
    bracket, whose half-width is below ``tolerance``."""
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    grid = tuple(q_grid)
    lo, hi = 1e-6, 1.0 - 1e-6
    if find_feasible(lo, grid) is None:
        return 0.0
    while (hi - lo) / 2 >= tolerance:
        mid = _mid(lo, hi)
        if find_feasible(mid, grid) is not None:
            lo = mid
        else:
            hi = mid
    return _mid(lo, hi)


def emit_region(tau_grid: Iterable[float], q_grid: Iterable[float]) -> List[dict]:
    """Rows (tau, q, lower, upper, feasible) of the published window."""
    taus = list(tau_grid)
    qs = list(q_grid)
    if not taus or not qs:
        raise ValueError("grids must be nonempty")
    rows = []
    for tau in taus:
        for q in qs:
            lower, upper = consolidated_window(tau, q)
            rows.append(
                {"tau": tau, "q": q, "lower": lower, "upper": upper, "feasible": bool(lower < upper)}
            )
    return rows


def upper_is_increasing(tau: float, q_values) -> bool:
    uppers = np.array([consolidated_window(tau, q)[1] for q in q_values])
    return bool(np.all(np.diff(uppers) > 0))
