"""Hölder-norm estimates, the fixed-point displacement bound, (k,u)-nesting
witnesses and the commuting-pair sequence diagnostic.

All Hölder norms here are grid maxima, hence lower bounds for the true norm.
Where an inequality needs the true norm on the large side the estimate is
inflated by ``SAFETY`` (1%).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "SAFETY",
    "HolderEstimate",
    "holder_norm",
    "DisplacementReport",
    "check_displacement",
    "NestingWitness",
    "NestingReport",
    "verify_nesting_witness",
    "KnestReport",
    "knest_contradiction_quantities",
    "Z2Report",
    "z2_sequence_diagnostic",
    "min_k_for_tau",
    "k_tau_lower_bound",
]

SAFETY = 1.01
EXHAUSTIVE_LIMIT = 4096
_CHUNK = 512


@dataclass(frozen=True)
class HolderEstimate:
    tau: float
    value: float
    witness: Tuple[float, float]
    exhaustive: bool = True

    def __float__(self):
        return self.value


def _pairs_max(x, f, rows, cols, tau):
    """Best quotient over the index grid rows x cols (only x[col] > x[row])."""
    dx = x[cols][None, :] - x[rows][:, None]
    df = np.abs(f[cols][None, :] - f[rows][:, None])
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(dx > 0, df / np.where(dx > 0, dx, 1.0) ** tau, -np.inf)
    flat = int(np.argmax(q))
    r, c = divmod(flat, q.shape[1])
    return float(q[r, c]), int(rows[r]), int(cols[c])


def holder_norm(x, fx, tau: float, window: int = 256, anchors: Sequence[int] = (),
                coarse: int = 1024) -> HolderEstimate:
    """Largest |f(x)-f(y)|/|x-y|^tau over sample pairs.

    Up to ``EXHAUSTIVE_LIMIT`` samples every pair is examined. Beyond that the
    search covers each point against its ``window`` sorted neighbours, all
    pairs of an evenly thinned subset of ``coarse`` points, and every pair
    involving the sample indices listed in ``anchors``.
    """
    if not 0 <= tau < 1:
        raise ValueError("tau must lie in [0, 1)")
    x = np.asarray(x, dtype=float).ravel()
    f = np.asarray(fx, dtype=float).ravel()
    if x.shape != f.shape or x.size < 2:
        raise ValueError("need at least two paired samples")
    order = np.argsort(x, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    x, f = x[order], f[order]
    n = x.size
    best = (0.0, 0, 1)

    def consider(cand):
        nonlocal best
        if cand[0] > best[0]:
            best = cand

    exhaustive = n <= EXHAUSTIVE_LIMIT
    if exhaustive:
        everything = np.arange(n)
        for start in range(0, n, _CHUNK):
            consider(_pairs_max(x, f, everything[start:start + _CHUNK], everything, tau))
    else:
        for d in range(1, min(window, n - 1) + 1):
            dx = x[d:] - x[:-d]
            with np.errstate(divide="ignore", invalid="ignore"):
                q = np.where(dx > 0, np.abs(f[d:] - f[:-d]) / np.where(dx > 0, dx, 1.0) ** tau, -np.inf)
            i = int(np.argmax(q))
            consider((float(q[i]), i, i + d))
        thin = np.unique(np.linspace(0, n - 1, coarse).astype(int))
        for start in range(0, thin.size, _CHUNK):
            consider(_pairs_max(x, f, thin[start:start + _CHUNK], thin, tau))
        everything = np.arange(n)
        for a in anchors:
            j = int(rank[a])
            consider(_pairs_max(x, f, np.array([j]), everything, tau))
            consider(_pairs_max(x, f, everything, np.array([j]), tau))
    value, i, j = best
    return HolderEstimate(tau=tau, value=max(value, 0.0), witness=(float(x[i]), float(x[j])), exhaustive=exhaustive)


@dataclass(frozen=True)
class DisplacementReport:
    holder: HolderEstimate
    safety: float
    worst_ratio: float   # max |f(x)-x| / (safety * H * |x-a|^(1+tau)); <= 1 means the bound holds
    violations: int
    points: int
    ratios: np.ndarray = field(repr=False, default=None)

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _round_off(xs):
    return 8 * np.finfo(float).eps * np.maximum(1.0, np.abs(xs))


def check_displacement(f: Callable, df: Callable, a: float, b: float, tau: float, grid=1000,
                       safety: float = SAFETY, holder: Optional[HolderEstimate] = None,
                       holder_samples: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> DisplacementReport:
    """Test |f(x)-x| <= safety*[Df]_tau*|x-a|^(1+tau) at interior grid points.

    ``a`` must be fixed by ``f``; ``b`` is the other end and may lie on either
    side. ``grid`` is a point count or an explicit array. The Hölder constant is
    estimated from derivative samples on the grid plus both ends unless
    ``holder`` or ``holder_samples`` is supplied.
    """
    fa = float(np.asarray(f(a), dtype=float).ravel()[0])
    if abs(fa - a) > 1e-12 * max(1.0, abs(a)):
        raise ValueError("f must fix a")
    lo, hi = min(a, b), max(a, b)
    if np.ndim(grid) == 0:
        xs = np.linspace(lo, hi, int(grid) + 2)[1:-1]
    else:
        xs = np.asarray(grid, dtype=float)
        xs = xs[(xs > lo) & (xs < hi)]
    if holder is None:
        if holder_samples is None:
            pts = np.concatenate([[a], xs, [b]])
            holder = holder_norm(pts, df(pts), tau, anchors=(0,))
        else:
            holder = holder_norm(*holder_samples, tau)
    disp = np.abs(f(xs) - xs)
    bound = safety * holder.value * np.abs(xs - a) ** (1 + tau)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bound > 0, disp / np.where(bound > 0, bound, 1.0), np.where(disp > 0, np.inf, 0.0))
    # tolerate round-off in f(x)-x itself
    violations = int(np.sum(disp > bound + _round_off(xs)))
    return DisplacementReport(holder=holder, safety=safety, worst_ratio=float(np.max(ratio, initial=0.0)),
                              violations=violations, points=int(xs.size), ratios=ratio)


# ---------------------------------------------------------------- nesting ---

def _image(m, iv):
    return (m(iv[0]), m(iv[1]))


def _is_exact(*vals) -> bool:
    return all(isinstance(v, (Fraction, int)) for v in vals)


def _same(p, q, slack) -> bool:
    if _is_exact(*p, *q):
        return p[0] == q[0] and p[1] == q[1]
    return abs(p[0] - q[0]) <= slack and abs(p[1] - q[1]) <= slack


def _disjoint(p, q, slack) -> bool:
    if _is_exact(*p, *q):
        return p[1] <= q[0] or q[1] <= p[0]
    return p[1] <= q[0] + slack or q[1] <= p[0] + slack


@dataclass
class NestingWitness:
    """Candidate (k,u)-nesting.

    ``intervals`` lists J_1 ⊋ ... ⊋ J_k as (lo, hi) pairs. ``prefix[n-1]`` is
    the index of s_n, so w_n = s_n ... s_1. ``certificates[n][i-2]`` indexes
    the map that swaps w_n J_i off itself while fixing w_n J_{i-1}. A ``rule``
    callable n -> (s_n index or None for n=0, certificate list) can stand in
    for the stored prefix and certificates.
    """

    maps: List[Callable]
    intervals: List[Tuple]
    u: float
    prefix: List[int] = field(default_factory=list)
    certificates: List[List[int]] = field(default_factory=list)
    rule: Optional[Callable] = None
    names: Optional[List[str]] = None

    @property
    def k(self) -> int:
        return len(self.intervals)

    def step(self, n: int) -> Optional[int]:
        if n == 0:
            return None
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        if self.rule is None:
            raise IndexError(f"sequence prefix ends at {len(self.prefix)}")
        return self.rule(n)[0]

    def certificate(self, n: int) -> List[int]:
        if n < len(self.certificates):
            return self.certificates[n]
        if self.rule is None:
            raise IndexError(f"certificates end at step {len(self.certificates) - 1}")
        return self.rule(n)[1]


def _validate_witness(w: NestingWitness):
    if w.k < 2:
        raise ValueError("a nesting needs at least two intervals")
    if not 0 < w.u <= 1:
        raise ValueError("u must lie in (0, 1]")
    for iv in w.intervals:
        if not iv[0] < iv[1]:
            raise ValueError(f"empty interval {iv}")
    for outer, inner in zip(w.intervals[:-1], w.intervals[1:]):
        if not (outer[0] <= inner[0] and inner[1] <= outer[1] and tuple(outer) != tuple(inner)):
            raise ValueError("intervals are not properly nested")


def _image_chain(w: NestingWitness, n_max: int):
    """Yield (n, [w_n J_1, ..., w_n J_k]) for n = 0..n_max."""
    images = [tuple(iv) for iv in w.intervals]
    yield 0, images
    for n in range(1, n_max + 1):
        s = w.step(n)
        if not 0 <= s < len(w.maps):
            raise ValueError(f"step {n} names map {s}, outside S")
        images = [_image(w.maps[s], iv) for iv in images]
        yield n, images


@dataclass
class NestingReport:
    accepted: bool
    condition_ii: bool
    failing_step: Optional[Tuple[int, int]]   # (n, i) of the first violated certificate
    reason: str
    partial_sum: float
    rho: float
    tail_bound: float
    rows: List[dict]

    def csv_rows(self):
        return [(r["n"], r["length"], r["partial_sum"]) for r in self.rows]


def verify_nesting_witness(w: NestingWitness, n_max: int, tail_tolerance: float,
                           slack: float = 1e-12) -> NestingReport:
    """Check condition (ii) at every step n <= n_max and estimate the sum in (i).

    Images of intervals are taken through their endpoints, which is exact for
    maps returning rationals. The summability test takes the largest
    consecutive length ratio rho over the last quarter of steps; when rho < 1
    the geometric tail |w_{n_max} J_1|^u * rho^u / (1 - rho^u) must not exceed
    ``tail_tolerance``.
    """
    _validate_witness(w)
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    rows = []
    total = 0.0
    failing = None
    reason = ""
    for n, images in _image_chain(w, n_max):
        cert = w.certificate(n)
        if len(cert) != w.k - 1:
            raise ValueError(f"step {n}: expected {w.k - 1} certificates, got {len(cert)}")
        if failing is None:
            for i in range(2, w.k + 1):
                s = cert[i - 2]
                if not 0 <= s < len(w.maps):
                    raise ValueError(f"step {n}: certificate {s} outside S")
                m = w.maps[s]
                inner, outer = images[i - 1], images[i - 2]
                if not _same(_image(m, outer), outer, slack):
                    failing, reason = (n, i), "certificate does not preserve the outer image"
                    break
                if not _disjoint(_image(m, inner), inner, slack):
                    failing, reason = (n, i), "certificate does not displace the inner image"
                    break
        length = float(images[0][1] - images[0][0])
        total += length ** w.u
        rows.append({"n": n, "length": length, "partial_sum": total})
    lengths = np.array([r["length"] for r in rows])
    quarter = lengths[-max(2, len(lengths) // 4):]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = quarter[1:] / quarter[:-1]
    rho = float(np.max(ratios)) if ratios.size else math.inf
    if rho < 1:
        tail = lengths[-1] ** w.u * rho ** w.u / (1 - rho ** w.u)
    else:
        tail = math.inf
    summable = tail <= tail_tolerance
    if failing is None and not summable:
        reason = f"tail bound {tail:.3g} exceeds tolerance"
    return NestingReport(accepted=failing is None and summable, condition_ii=failing is None,
                         failing_step=failing, reason=reason, partial_sum=total, rho=rho,
                         tail_bound=tail, rows=rows)


def _derivative_of(m) -> Callable:
    if hasattr(m, "derivative"):
        return m.derivative
    if hasattr(m, "slopes"):
        xs = np.array([float(v) for v in m.xs])
        sl = np.array([float(v) for v in m.slopes])

        def piecewise(x):
            idx = np.clip(np.searchsorted(xs, np.asarray(x, dtype=float), side="right") - 1, 0, sl.size - 1)
            return sl[idx]
        return piecewise
    raise TypeError(f"no derivative available for {m!r}")


@dataclass
class KnestReport:
    tau: float
    k: int
    u: float
    lemma_applies: bool          # tau (1+tau)^(k-2) >= u
    N: float
    N_bar: float
    claim_holds: List[bool]
    rows: List[dict]
    implied_holder: float        # max_n (t-quotient - 1) / |J_{k-1}^n|^tau, a lower bound on [t']_tau
    inconsistent: bool

    def csv_rows(self):
        return [(r["n"], r["length_J1"], r["partial_sum"], r["claim_lhs"], r["claim_rhs"], r["derivative_bound"])
                for r in self.rows]


def knest_contradiction_quantities(w: NestingWitness, tau: float, n_max: int = 40,
                                   derivatives: Optional[Sequence[Callable]] = None,
                                   grid: int = 2001) -> KnestReport:
    """The quantities driving the (k,u)-nesting obstruction, evaluated on w.

    N = 1 + max_s ([s']_tau + [log s']_tau) from grid estimates on [0,1];
    N_bar = N^(2^(k-2)) * sum_n |w_n J_1|^u. For each n the claimed bound
    |J_{k-1}^n| <= N^(2^(k-2)-1) |J_1^n|^((1+tau)^(k-2)) is tested, and the
    level-k certificate t yields the mean-value quotient of t across
    [a_{k-1}^n, a_k^n] (or the mirrored one on the right), located on a grid.
    t' equals 1 somewhere in J_{k-1}^n, so (quotient - 1)/|J_{k-1}^n|^tau
    bounds [t']_tau from below; the witness is flagged inconsistent with
    C^{1,tau} when that exceeds the estimated N - 1.
    """
    _validate_witness(w)
    k, u = w.k, w.u
    if derivatives is None:
        derivatives = [_derivative_of(m) for m in w.maps]
    xs = np.linspace(0.0, 1.0, grid)
    N = 1.0
    for d in derivatives:
        dv = np.asarray(d(xs), dtype=float)
        h = holder_norm(xs, dv, tau, anchors=())
        hl = holder_norm(xs, np.log(dv), tau, anchors=())
        N = max(N, 1.0 + h.value + hl.value)
    chain = list(_image_chain(w, n_max))
    sum_u = sum(float(im[0][1] - im[0][0]) ** u for _, im in chain)
    power = 2 ** (k - 2)
    N_bar = N ** power * sum_u
    base_ratio = float((w.intervals[-1][1] - w.intervals[-1][0]) / (w.intervals[-2][1] - w.intervals[-2][0]))
    floor = 1.0 + math.exp(-N_bar) * base_ratio
    rows, claims = [], []
    implied = 0.0
    partial = 0.0
    for n, images in chain:
        J1 = float(images[0][1] - images[0][0])
        partial += J1 ** u
        Jkm1 = images[k - 2]
        Jk = images[k - 1]
        lhs = float(Jkm1[1] - Jkm1[0])
        rhs = N ** (power - 1) * J1 ** ((1 + tau) ** (k - 2))
        claims.append(lhs <= rhs * (1 + 1e-12))
        t = w.maps[w.certificate(n)[k - 2]]
        # mean-value quotient across the gap between J_{k-1}^n and the moved J_k^n
        if t(Jk[0]) > Jk[0]:
            lo, hi = Jkm1[0], Jk[0]
        else:
            lo, hi = Jk[1], Jkm1[1]
        quotient = float((t(hi) - t(lo)) / (hi - lo)) if hi > lo else math.nan
        located = math.nan
        if hi > lo:
            probe = np.linspace(float(lo), float(hi), 257)
            dt = np.asarray(_derivative_of(t)(probe), dtype=float)
            located = float(probe[int(np.argmin(np.abs(dt - quotient)))])
        if lhs > 0 and quotient == quotient:
            implied = max(implied, (quotient - 1.0) / lhs ** tau)
        rows.append({"n": n, "length_J1": J1, "partial_sum": partial, "claim_lhs": lhs, "claim_rhs": rhs,
                     "quotient": quotient, "x_n": located, "derivative_bound": floor})
    lemma = tau * (1 + tau) ** (k - 2) >= u
    return KnestReport(tau=tau, k=k, u=u, lemma_applies=lemma, N=N, N_bar=N_bar, claim_holds=claims,
                       rows=rows, implied_holder=implied, inconsistent=implied > N - 1)


# ------------------------------------------------------------------ Z^2 ---

@dataclass
class Z2Report:
    L: np.ndarray
    M: np.ndarray
    ratios: np.ndarray
    displacement_ok: np.ndarray
    sum_L_tau: float
    sum_M_tau: float
    M_tau_bound: Optional[float]     # [Dt]^tau, valid when tau(1+tau) >= 1 and sum L_i <= 1
    ratio_floor: Optional[float]     # e^{-A} M_0/L_0 when [D log a]_tau is supplied
    ratio_ceiling: np.ndarray        # [Dt]_tau L_n^tau
    horn: str
    conflict: bool


def z2_sequence_diagnostic(a: Callable, t: Callable, y: float, z: float, tau: float, n_max: int,
                           dt_holder: float, dlog_a_holder: Optional[float] = None) -> Z2Report:
    """Orbit quantities for a commuting pair (a, t) with t(y) = y < z < t(z) < a(y).

    L_i = a^i z - a^i y and M_i = t a^i z - a^i z. Each M_i is tested against
    the displacement bound [Dt]_tau L_i^(1+tau). The ratio M_n/L_n can decay
    (``horn='decay'``) or stay above the distortion floor
    (``horn='bounded_below'``); ``conflict`` flags an index where the
    displacement ceiling falls below that floor.
    """
    if not (t(y) == y and y < z < t(z) < a(y)):
        raise ValueError("need t(y) = y < z < t(z) < a(y)")
    ys, zs = [y], [z]
    for _ in range(n_max):
        ys.append(a(ys[-1]))
        zs.append(a(zs[-1]))
    tz = np.array([float(t(v)) for v in zs])
    ys = np.array([float(v) for v in ys])
    zs = np.array([float(v) for v in zs])
    L = zs - ys
    M = tz - zs
    ratios = np.divide(M, L, out=np.zeros_like(M), where=L > 0)
    ceiling = dt_holder * L ** tau
    ok = M <= SAFETY * dt_holder * L ** (1 + tau) + 1e-15
    sum_L = float(np.sum(L ** tau))
    sum_M = float(np.sum(np.abs(M) ** tau))
    M_bound = dt_holder ** tau if tau * (1 + tau) >= 1 else None
    floor = None
    if dlog_a_holder is not None:
        A = dlog_a_holder * (sum_L + dt_holder ** tau)
        floor = math.exp(-A) * ratios[0]
    tail = ratios[-max(2, len(ratios) // 4):]
    if floor is not None:
        horn = "bounded_below" if np.min(ratios) >= floor else "decay"
    else:
        horn = "decay" if tail[-1] < 0.5 * ratios[0] else "bounded_below"
    conflict = floor is not None and bool(np.any(ceiling < floor))
    return Z2Report(L=L, M=M, ratios=ratios, displacement_ok=ok, sum_L_tau=sum_L, sum_M_tau=sum_M,
                    M_tau_bound=M_bound, ratio_floor=floor, ratio_ceiling=ceiling, horn=horn,
                    conflict=conflict or not bool(np.all(ok)))


def min_k_for_tau(tau: float) -> int:
    """Smallest k >= 2 with tau (1+tau)^(k-2) >= 1."""
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    k = 2
    while tau * (1 + tau) ** (k - 2) < 1:
        k += 1
    return k


def k_tau_lower_bound(tau: float) -> int:
    """ceil(1 + 1/tau)."""
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    return math.ceil(1 + 1 / tau)
