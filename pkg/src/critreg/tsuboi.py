"""Nested C^{1,tau} action of (Z wr Z) x Z on [0,1] built from interval blocks.

Blocks I_v, v in Z^3 with max-norm <= N, are laid out in lexicographic order
with two end gaps.  Each k-line of blocks (a *fiber*) carries a C^1 chart
sending I_{(i,j,k)} onto [k, k+1].  Then

* t acts on every fiber as the chart conjugate of a unit translation (with
  smooth slow-down pieces at both ends of the fiber),
* a sends fiber (i,j) to fiber (i+1,j) chart to chart,
* b sends fiber (0,j) to fiber (0,j+1) chart to chart and is the identity
  outside I_0.

Because a and b respect the charts, they commute with t exactly; the chart
densities are chosen so that the derivative of every generator at a block
endpoint equals the prescribed ratio of block lengths.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .regularity import HolderEstimate, check_displacement, holder_norm

__all__ = [
    "Params",
    "LevelStructure3",
    "Profile",
    "BlockDiffeo",
    "Generator",
    "ConstructedAction",
    "build_level_structure",
    "build_generators",
    "evaluate",
    "derivative",
    "verify_commutations",
    "junction_mismatch",
    "block_samples",
    "sampled_derivative_holder",
    "block_displacement_check",
    "check_log_deriv_lipschitz",
    "nested_support_check",
    "raw_length",
    "total_mass",
]


@dataclass(frozen=True)
class Params:
    tau: float
    p: float
    q: float
    q_prime: float
    r: float

    def __post_init__(self):
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0, 1)")
        for name in ("p", "q", "q_prime", "r"):
            if not getattr(self, name) > 1:
                raise ValueError(f"{name} must exceed 1")


# ---------------------------------------------------------------------------
# level structure


def raw_length(v: Tuple[int, int, int], params: Params) -> float:
    i, j, k = v
    if i != 0:
        return 1.0 / ((abs(i) + 1) ** params.p + (abs(j) + 1) ** params.q + (abs(k) + 1) ** params.r)
    return 1.0 / ((abs(j) + 1) ** params.q_prime + (abs(k) + 1) ** params.r)


def _raw_cube(params: Params, n: int) -> np.ndarray:
    """Raw lengths for max-norm <= n, shape (2n+1,)*3, axes (i, j, k)."""
    idx = np.abs(np.arange(-n, n + 1, dtype=float)) + 1.0
    with np.errstate(over="ignore"):
        ip = idx**params.p
        jq = idx**params.q
        jqp = idx**params.q_prime
        kr = idx**params.r
        out = 1.0 / (ip[:, None, None] + jq[None, :, None] + kr[None, None, :])
        out[n] = 1.0 / (jqp[:, None] + kr[None, :])
    return out


def _summable(params: Params) -> bool:
    return (1 / params.p + 1 / params.q + 1 / params.r < 1) and (1 / params.q_prime + 1 / params.r < 1)


@dataclass(frozen=True, eq=False)
class LevelStructure3:
    """Blocks in lexicographic order; flat index ((i+N)*W + (j+N))*W + (k+N)."""

    params: Params
    N: int
    lengths: np.ndarray  # normalized, flat
    starts: np.ndarray   # inf of each block
    gap_left: float
    gap_right: float
    tail_mass: float

    @property
    def width(self) -> int:
        return 2 * self.N + 1

    @property
    def count(self) -> int:
        return self.width**3

    def index(self, v: Sequence[int]) -> int:
        i, j, k = (int(c) for c in v)
        n, w = self.N, self.width
        if max(abs(i), abs(j), abs(k)) > n:
            raise KeyError(v)
        return ((i + n) * w + (j + n)) * w + (k + n)

    def label(self, m) -> np.ndarray:
        m = np.asarray(m)
        w, n = self.width, self.N
        return np.stack([m // (w * w) - n, (m // w) % w - n, m % w - n], axis=-1)

    def interval(self, v: Sequence[int]) -> Tuple[float, float]:
        m = self.index(v)
        return float(self.starts[m]), float(self.starts[m] + self.lengths[m])

    def length(self, v: Sequence[int]) -> float:
        return float(self.lengths[self.index(v)])

    def ends(self) -> np.ndarray:
        return self.starts + self.lengths

    def block_of(self, x) -> np.ndarray:
        """Flat block index containing x, or -1 inside an end gap."""
        x = np.asarray(x, dtype=float)
        m = np.searchsorted(self.starts, x, side="right") - 1
        out = np.where((m >= 0) & (x <= self.ends()[np.clip(m, 0, None)]), m, -1)
        return np.where(x > self.ends()[-1], -1, out)

    def chunk(self, i: int) -> Tuple[float, float]:
        """Closure of I_i, the union of blocks with first index i."""
        lo = self.index((i, -self.N, -self.N))
        hi = self.index((i, self.N, self.N))
        return float(self.starts[lo]), float(self.starts[hi] + self.lengths[hi])

    def fiber(self, i: int, j: int) -> Tuple[float, float]:
        """Closure of I_{i,j}, the union of blocks (i, j, *)."""
        lo = self.index((i, j, -self.N))
        hi = self.index((i, j, self.N))
        return float(self.starts[lo]), float(self.starts[hi] + self.lengths[hi])

    def max_norm(self) -> np.ndarray:
        return np.abs(self.label(np.arange(self.count))).max(axis=1)

    def predecessor_length(self) -> np.ndarray:
        """Length of the lexicographic predecessor (left gap for block 0)."""
        prev = np.empty_like(self.lengths)
        prev[0] = self.gap_left
        prev[1:] = self.lengths[:-1]
        return prev


def _mass(params: Params, n: int) -> float:
    """Sum of raw lengths over max-norm <= n, using the |index| symmetry."""
    idx = np.arange(n + 1, dtype=float) + 1.0
    weight = np.full(n + 1, 2.0)
    weight[0] = 1.0
    with np.errstate(over="ignore"):
        jq = idx**params.q
        kr = idx**params.r
        total = 0.0
        for a in range(n + 1):
            if a == 0:
                plane = 1.0 / (idx[:, None] ** params.q_prime + kr[None, :])
            else:
                plane = 1.0 / (idx[a] ** params.p + jq[:, None] + kr[None, :])
            total += weight[a] * float(weight @ plane @ weight)
    return total


def total_mass(params: Params, start: int = 64) -> float:
    """Sum of all raw lengths over Z^3, by Aitken extrapolation of the
    truncated sums at start, 2*start, 4*start."""
    s1, s2, s3 = (_mass(params, start * f) for f in (1, 2, 4))
    d1, d2 = s2 - s1, s3 - s2
    if d2 <= 0 or d1 <= d2:
        return s3
    return s3 + d2 * d2 / (d1 - d2)


def build_level_structure(params: Params, N: int, mass_start: Optional[int] = None) -> LevelStructure3:
    """Blocks with max-norm <= N plus two end gaps tiling [0,1].

    Lengths are the raw lengths divided by the (extrapolated) mass of the
    whole Z^3 family, so blocks of small index keep their size as N grows;
    the two gaps split the mass of all omitted blocks.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    if not _summable(params):
        raise ValueError("lengths are not summable: conditions (B) or (C) fail")
    kept = _raw_cube(params, N)
    kept_mass = float(kept.sum())
    total = total_mass(params, mass_start or max(64, 4 * N))
    total = max(total, kept_mass)
    tail = total - kept_mass
    lengths = kept.ravel() / total
    gap = 0.5 * tail / total
    starts = gap + np.concatenate([[0.0], np.cumsum(lengths)[:-1]])
    return LevelStructure3(params, N, lengths, starts, gap, gap, tail / total)


# ---------------------------------------------------------------------------
# block profiles
#
# A profile is an increasing F: [0,1] -> [0,1] with F'(0) = c0, F'(1) = c1.
# Default shape: F' = c0 (1-S) + c1 S + beta B, S the cubic smoothstep and B a
# unit-mass bump.  When that dips too low (very unequal c0, c1) the power
# shape F' = alpha + (c0-alpha)(1-s)^m + (c1-alpha) s^m is used instead; it is
# positive whenever alpha > 0 and its excess over either endpoint value
# changes sign at most once, which keeps maps with a fixed end on one side of
# the diagonal.


def _S(s):
    return s * s * (3.0 - 2.0 * s)


def _dS(s):
    return 6.0 * s * (1.0 - s)


def _intS(s):
    return s**3 - 0.5 * s**4


def _B(s):
    return 30.0 * s * s * (1.0 - s) ** 2


def _dB(s):
    return 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s)


def _intB(s):
    return s**3 * (10.0 - 15.0 * s + 6.0 * s * s)


def _power_exponent(c0, c1):
    """Exponent m for the power shape: alpha > 0, and alpha lies strictly
    between c0 and c1 whenever 1 does."""
    m = np.maximum(3.0, np.ceil(c0 + c1) + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        need_r = np.where(c1 > 1, (1.0 - c0) / (c1 - 1.0), 0.0)
        need_l = np.where(c0 < 1, (c1 - 1.0) / (1.0 - c0), 0.0)
    m = np.maximum(m, np.floor(np.nan_to_num(need_r, posinf=0.0)) + 2.0)
    m = np.maximum(m, np.floor(np.nan_to_num(need_l, posinf=0.0)) + 2.0)
    return m


class Profile:
    """Vectorized family of profiles indexed by position in (c0, c1) arrays."""

    _CHECK = np.linspace(0.0, 1.0, 65)

    def __init__(self, c0, c1, shape: str = "auto"):
        self.c0 = np.atleast_1d(np.asarray(c0, dtype=float))
        self.c1 = np.broadcast_to(np.asarray(c1, dtype=float), self.c0.shape).copy()
        if np.any(~(self.c0 > 0)) or np.any(~(self.c1 > 0)):
            raise ValueError("endpoint derivatives must be positive")
        self.beta = 1.0 - 0.5 * (self.c0 + self.c1)
        if shape == "power":
            self.power = np.ones(self.c0.shape, dtype=bool)
        elif shape == "auto":
            s = self._CHECK[None, :]
            fp = self.c0[:, None] * (1 - _S(s)) + self.c1[:, None] * _S(s) + self.beta[:, None] * _B(s)
            floor = 0.2 * np.minimum(np.minimum(self.c0, self.c1), 1.0)
            self.power = fp.min(axis=1) < floor
        else:
            raise ValueError(f"unknown profile shape {shape!r}")
        self.m = _power_exponent(self.c0, self.c1)
        self.alpha = (self.m + 1.0 - self.c0 - self.c1) / (self.m - 1.0)

    def value(self, s, m):
        s, m = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(m))
        smooth = self.c0[m] * (s - _intS(s)) + self.c1[m] * _intS(s) + self.beta[m] * _intB(s)
        if not np.any(self.power[m]):
            return smooth
        e, a = self.m[m], self.alpha[m]
        pw = a * s + ((self.c0[m] - a) * (1.0 - (1.0 - s) ** (e + 1)) + (self.c1[m] - a) * s ** (e + 1)) / (e + 1)
        return np.where(self.power[m], pw, smooth)

    def deriv(self, s, m):
        s, m = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(m))
        smooth = self.c0[m] * (1 - _S(s)) + self.c1[m] * _S(s) + self.beta[m] * _B(s)
        if not np.any(self.power[m]):
            return smooth
        e, a = self.m[m], self.alpha[m]
        pw = a + (self.c0[m] - a) * (1.0 - s) ** e + (self.c1[m] - a) * s**e
        return np.where(self.power[m], pw, smooth)

    def second(self, s, m):
        s, m = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(m))
        smooth = (self.c1[m] - self.c0[m]) * _dS(s) + self.beta[m] * _dB(s)
        if not np.any(self.power[m]):
            return smooth
        e, a = self.m[m], self.alpha[m]
        pw = e * (-(self.c0[m] - a) * (1.0 - s) ** (e - 1) + (self.c1[m] - a) * s ** (e - 1))
        return np.where(self.power[m], pw, smooth)

    def log_deriv_slope(self, s, m):
        """d/ds log F'(s)."""
        return self.second(s, m) / self.deriv(s, m)

    def inverse(self, u, m):
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        u, m = np.broadcast_arrays(u, np.asarray(m))
        lo = np.zeros(u.shape)
        hi = np.ones(u.shape)
        s = u.copy()
        for _ in range(100):
            f = self.value(s, m) - u
            lo = np.where(f < 0, s, lo)
            hi = np.where(f > 0, s, hi)
            nxt = s - f / self.deriv(s, m)
            bad = (nxt <= lo) | (nxt >= hi) | ~np.isfinite(nxt)
            nxt = np.where(bad, 0.5 * (lo + hi), nxt)
            done = np.abs(nxt - s) <= 4e-16
            s = nxt
            if np.all(done):
                break
        return s


def _single_profile(c0: float, c1: float, shape: str = "auto") -> Profile:
    return Profile([c0], [c1], shape)


# ---------------------------------------------------------------------------
# generator segments


class _Segment:
    x0: float
    x1: float
    y0: float
    y1: float

    def fwd(self, x):
        raise NotImplementedError

    def dfwd(self, x):
        raise NotImplementedError

    def inv(self, y):
        raise NotImplementedError

    def pieces(self):
        """(x0, x1, y0, y1, d_start, d_end, labels) per smooth piece."""
        raise NotImplementedError


class _Identity(_Segment):
    def __init__(self, x0, x1):
        self.x0 = self.y0 = x0
        self.x1 = self.y1 = x1

    def fwd(self, x):
        return np.asarray(x, dtype=float)

    def dfwd(self, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def inv(self, y):
        return np.asarray(y, dtype=float)

    def log_slope(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def pieces(self):
        return [(self.x0, self.x1, self.y0, self.y1, 1.0, 1.0, None)]


class _ProfileMap(_Segment):
    """One smooth map [x0,x1] -> [y0,y1] with prescribed end derivatives."""

    def __init__(self, x0, x1, y0, y1, d0, d1, label=None):
        self.x0, self.x1, self.y0, self.y1 = x0, x1, y0, y1
        self.h = x1 - x0
        self.H = y1 - y0
        self.d0, self.d1 = d0, d1
        self.profile = _single_profile(d0 * self.h / self.H, d1 * self.h / self.H, "power")
        self.label = label

    def fwd(self, x):
        s = (np.asarray(x, dtype=float) - self.x0) / self.h
        return self.y0 + self.H * self.profile.value(np.clip(s, 0, 1), 0)

    def dfwd(self, x):
        s = (np.asarray(x, dtype=float) - self.x0) / self.h
        return (self.H / self.h) * self.profile.deriv(np.clip(s, 0, 1), 0)

    def log_slope(self, x):
        s = (np.asarray(x, dtype=float) - self.x0) / self.h
        return self.profile.log_deriv_slope(np.clip(s, 0, 1), 0) / self.h

    def inv(self, y):
        u = (np.asarray(y, dtype=float) - self.y0) / self.H
        return self.x0 + self.h * self.profile.inverse(u, 0)

    def pieces(self):
        return [(self.x0, self.x1, self.y0, self.y1, self.d0, self.d1, self.label)]


class _Charts:
    """Fiber charts of a structure: block (i,j,k) -> [k, k+1]."""

    def __init__(self, st: LevelStructure3):
        self.st = st
        self.lam = st.lengths / st.predecessor_length()
        self.profile = Profile(self.lam, 1.0)
        self.k = st.label(np.arange(st.count))[:, 2]

    def to_model(self, x, m):
        s = (x - self.st.starts[m]) / self.st.lengths[m]
        return self.k[m] + self.profile.value(np.clip(s, 0, 1), m)

    def density(self, x, m):
        s = (x - self.st.starts[m]) / self.st.lengths[m]
        return self.profile.deriv(np.clip(s, 0, 1), m) / self.st.lengths[m]

    def log_density_slope(self, x, m):
        s = (x - self.st.starts[m]) / self.st.lengths[m]
        return self.profile.log_deriv_slope(np.clip(s, 0, 1), m) / self.st.lengths[m]

    def from_model(self, y, fiber_first):
        """Inverse chart on the fiber whose k = -N block has index fiber_first."""
        n = self.st.N
        k = np.clip(np.floor(y), -n, n).astype(int)
        m = fiber_first + (k + n)
        u = y - k
        s = self.profile.inverse(u, m)
        return self.st.starts[m] + self.st.lengths[m] * s, m


class _ChartShift(_Segment):
    """Blocks lo..hi (flat) mapped to blocks lo+shift..hi+shift chart to chart."""

    def __init__(self, charts: _Charts, lo: int, hi: int, shift: int, label: str):
        self.c = charts
        st = charts.st
        self.lo, self.hi, self.shift = lo, hi, shift
        self.x0 = float(st.starts[lo])
        self.x1 = float(st.starts[hi] + st.lengths[hi])
        self.y0 = float(st.starts[lo + shift])
        self.y1 = float(st.starts[hi + shift] + st.lengths[hi + shift])
        self.label = label

    def _blocks(self, x, lo, hi):
        m = np.searchsorted(self.c.st.starts, x, side="right") - 1
        return np.clip(m, lo, hi)

    def _fiber_first(self, m):
        n = self.c.st.N
        return m - (self.c.k[m] + n)

    def fwd(self, x):
        x = np.asarray(x, dtype=float)
        m = self._blocks(x, self.lo, self.hi)
        y, _ = self.c.from_model(self.c.to_model(x, m), self._fiber_first(m) + self.shift)
        return y

    def dfwd(self, x):
        x = np.asarray(x, dtype=float)
        m = self._blocks(x, self.lo, self.hi)
        y, m2 = self.c.from_model(self.c.to_model(x, m), self._fiber_first(m) + self.shift)
        return self.c.density(x, m) / self.c.density(y, m2)

    def log_slope(self, x):
        x = np.asarray(x, dtype=float)
        m = self._blocks(x, self.lo, self.hi)
        y, m2 = self.c.from_model(self.c.to_model(x, m), self._fiber_first(m) + self.shift)
        g = self.c.density(x, m) / self.c.density(y, m2)
        return self.c.log_density_slope(x, m) - self.c.log_density_slope(y, m2) * g

    def inv(self, y):
        y = np.asarray(y, dtype=float)
        m2 = self._blocks(y, self.lo + self.shift, self.hi + self.shift)
        x, _ = self.c.from_model(self.c.to_model(y, m2), self._fiber_first(m2) - self.shift)
        return x

    def pieces(self):
        st = self.c.st
        m = np.arange(self.lo, self.hi + 1)
        m2 = m + self.shift
        ends = st.starts + st.lengths
        prev = st.predecessor_length()
        d_start = prev[m2] / prev[m]
        d_end = st.lengths[m2] / st.lengths[m]
        labels = st.label(m)
        return [
            (st.starts[a], ends[a], st.starts[b], ends[b], float(ds), float(de), tuple(int(c) for c in lab))
            for a, b, ds, de, lab in zip(m, m2, d_start, d_end, labels)
        ]


class _ChartTranslate(_Segment):
    """t on fibers: chart conjugate of the model map theta on [-N, N+1]."""

    def __init__(self, charts: _Charts):
        self.c = charts
        st = charts.st
        self.n = st.N
        self.x0 = self.y0 = float(st.starts[0])
        self.x1 = self.y1 = float(st.starts[-1] + st.lengths[-1])
        self.left = _single_profile(0.5, 0.5)
        self.right = _single_profile(2.0, 2.0)

    def theta(self, y):
        n = self.n
        out = y + 1.0
        lo = y < -n + 1
        hi = y > n - 1
        out = np.where(lo, -n + 2.0 * self.left.value(np.clip(y + n, 0, 1), 0), out)
        out = np.where(hi, n + self.right.value(np.clip((y - n + 1) / 2.0, 0, 1), 0), out)
        return out

    def dtheta(self, y):
        n = self.n
        out = np.ones_like(y)
        out = np.where(y < -n + 1, 2.0 * self.left.deriv(np.clip(y + n, 0, 1), 0), out)
        out = np.where(y > n - 1, 0.5 * self.right.deriv(np.clip((y - n + 1) / 2.0, 0, 1), 0), out)
        return out

    def dlogtheta(self, y):
        n = self.n
        out = np.zeros_like(y)
        out = np.where(y < -n + 1, self.left.log_deriv_slope(np.clip(y + n, 0, 1), 0), out)
        out = np.where(y > n - 1, 0.5 * self.right.log_deriv_slope(np.clip((y - n + 1) / 2.0, 0, 1), 0), out)
        return out

    def theta_inv(self, z):
        n = self.n
        out = z - 1.0
        lo = z < -n + 2
        hi = z > n
        out = np.where(lo, -n + self.left.inverse(np.clip((z + n) / 2.0, 0, 1), 0), out)
        out = np.where(hi, n - 1 + 2.0 * self.right.inverse(np.clip(z - n, 0, 1), 0), out)
        return out

    def _split(self, x):
        st = self.c.st
        m = np.clip(np.searchsorted(st.starts, x, side="right") - 1, 0, st.count - 1)
        return m, m - (self.c.k[m] + self.n)

    def fwd(self, x):
        x = np.asarray(x, dtype=float)
        m, first = self._split(x)
        y, _ = self.c.from_model(self.theta(self.c.to_model(x, m)), first)
        return y

    def dfwd(self, x):
        x = np.asarray(x, dtype=float)
        m, first = self._split(x)
        z = self.c.to_model(x, m)
        y, m2 = self.c.from_model(self.theta(z), first)
        return self.dtheta(z) * self.c.density(x, m) / self.c.density(y, m2)

    def log_slope(self, x):
        x = np.asarray(x, dtype=float)
        m, first = self._split(x)
        z = self.c.to_model(x, m)
        y, m2 = self.c.from_model(self.theta(z), first)
        h = self.c.density(x, m)
        g = self.dtheta(z) * h / self.c.density(y, m2)
        return self.dlogtheta(z) * h + self.c.log_density_slope(x, m) - self.c.log_density_slope(y, m2) * g

    def inv(self, y):
        y = np.asarray(y, dtype=float)
        m, first = self._split(y)
        x, _ = self.c.from_model(self.theta_inv(self.c.to_model(y, m)), first)
        return x

    def pieces(self):
        st = self.c.st
        n = self.n
        ends = st.starts + st.lengths
        prev = st.predecessor_length()
        out = []
        labels = st.label(np.arange(st.count))
        for m in range(st.count):
            k = int(labels[m, 2])
            lab = tuple(int(c) for c in labels[m])
            if -n < k < n - 1:
                out.append((st.starts[m], ends[m], st.starts[m + 1], ends[m + 1],
                            float(st.lengths[m] / prev[m]), float(st.lengths[m + 1] / st.lengths[m]), lab))
            elif k == -n:
                out.append((st.starts[m], ends[m], st.starts[m], ends[m + 1],
                            1.0, float(st.lengths[m + 1] / st.lengths[m]), lab))
            elif k == n - 1:
                out.append((st.starts[m], ends[m + 1], st.starts[m + 1], ends[m + 1],
                            float(st.lengths[m] / prev[m]), 1.0, lab))
        return out


@dataclass(frozen=True)
class BlockDiffeo:
    """One smooth piece of a generator with its endpoint derivatives."""

    source: Tuple[float, float]
    target: Tuple[float, float]
    d_start: float
    d_end: float
    label: Optional[tuple] = None


class Generator:
    """Piecewise assembly of segments tiling [0,1]."""

    def __init__(self, name: str, segments: List[_Segment]):
        self.name = name
        self.segments = segments
        self._x0 = np.array([s.x0 for s in segments])
        self._y0 = np.array([s.y0 for s in segments])
        self.identity_outside = (segments[0].x0, segments[-1].x1)

    def _dispatch(self, pts, starts, method):
        pts = np.asarray(pts, dtype=float)
        flat = np.atleast_1d(pts).ravel()
        if np.any((flat < 0) | (flat > 1)):
            raise ValueError("points must lie in [0,1]")
        which = np.clip(np.searchsorted(starts, flat, side="right") - 1, 0, len(self.segments) - 1)
        out = np.empty_like(flat)
        for s in np.unique(which):
            sel = which == s
            out[sel] = getattr(self.segments[s], method)(flat[sel])
        return out.reshape(pts.shape) if pts.ndim else float(out[0])

    def __call__(self, x):
        return self._dispatch(x, self._x0, "fwd")

    def derivative(self, x):
        return self._dispatch(x, self._x0, "dfwd")

    def log_derivative_slope(self, x):
        """(log g')' at x, piecewise exact."""
        return self._dispatch(x, self._x0, "log_slope")

    def inverse(self, y):
        return self._dispatch(y, self._y0, "inv")

    def blocks(self) -> List[BlockDiffeo]:
        out = []
        for seg in self.segments:
            if isinstance(seg, _Identity):
                continue
            for x0, x1, y0, y1, ds, de, lab in seg.pieces():
                out.append(BlockDiffeo((float(x0), float(x1)), (float(y0), float(y1)), ds, de, lab))
        return out

    def junctions(self) -> List[Tuple[float, float, float]]:
        """(point, derivative from the left piece, derivative from the right piece)."""
        pieces = []
        for seg in self.segments:
            pieces.extend(seg.pieces())
        out = []
        for left, right in zip(pieces[:-1], pieces[1:]):
            out.append((float(left[1]), float(left[5]), float(right[4])))
        return out


@dataclass(eq=False)
class ConstructedAction:
    structure: LevelStructure3
    a: Generator
    b: Generator
    t: Generator
    charts: _Charts = field(repr=False)

    def generators(self) -> Dict[str, Generator]:
        return {"a": self.a, "b": self.b, "t": self.t}


def _chart_derivative_at_start(st: LevelStructure3, m: int, m2: int) -> float:
    prev = st.predecessor_length()
    return float(prev[m2] / prev[m])


def _chart_derivative_at_end(st: LevelStructure3, m: int, m2: int) -> float:
    return float(st.lengths[m2] / st.lengths[m])


def build_generators(st: LevelStructure3) -> ConstructedAction:
    n, w = st.N, st.width
    charts = _Charts(st)
    ends = st.ends()
    chunk = w * w

    # a: left gap grows onto gap + I_{-N}; chunks shift by e1; I_N + right gap shrinks onto the gap
    first_a = st.index((-n, -n, -n))
    last_a = st.index((n - 1, n, n))
    a_left = _ProfileMap(0.0, st.gap_left, 0.0, float(st.starts[first_a + chunk]),
                         1.0, _chart_derivative_at_start(st, first_a, first_a + chunk), "left gap")
    a_mid = _ChartShift(charts, first_a, last_a, chunk, "a")
    a_right = _ProfileMap(float(st.starts[last_a + 1]), 1.0, float(ends[-1]), 1.0,
                          _chart_derivative_at_end(st, last_a, last_a + chunk), 1.0, "right gap")
    a = Generator("a", [a_left, a_mid, a_right])

    # b: inside I_0 fibers shift by e2, with smooth end pieces; identity elsewhere
    lo0, hi0 = st.chunk(0)
    e_first = st.index((0, -n, -n))
    e_second = st.index((0, -n + 1, -n))
    e_third = st.index((0, -n + 2, -n))
    b_first_piece = _ProfileMap(lo0, float(st.starts[e_second]), lo0, float(st.starts[e_third]),
                                1.0, _chart_derivative_at_start(st, e_second, e_third), "I_0 start")
    mid_lo = e_second
    mid_hi = st.index((0, n - 2, n))
    b_mid = _ChartShift(charts, mid_lo, mid_hi, w, "b")
    b_last_piece = _ProfileMap(float(ends[mid_hi]), hi0, float(ends[mid_hi + w]), hi0,
                               _chart_derivative_at_end(st, mid_hi, mid_hi + w), 1.0, "I_0 end")
    del e_first
    b = Generator("b", [_Identity(0.0, lo0), b_first_piece, b_mid, b_last_piece, _Identity(hi0, 1.0)])

    t = Generator("t", [_Identity(0.0, st.gap_left), _ChartTranslate(charts),
                        _Identity(float(ends[-1]), 1.0)])
    return ConstructedAction(st, a, b, t, charts)


def evaluate(g: Generator, x):
    return g(x)


def derivative(g: Generator, x):
    return g.derivative(x)


# ---------------------------------------------------------------------------
# verification


def _valid_samples(st: LevelStructure3, count: int, margin: int, rng, extra=None) -> np.ndarray:
    norms = st.max_norm()
    ok = norms <= st.N - margin
    if extra is not None:
        ok &= extra
    blocks = np.flatnonzero(ok)
    pick = rng.choice(blocks, size=count)
    frac = rng.uniform(0.0, 1.0, size=count)
    return st.starts[pick] + frac * st.lengths[pick]


def verify_commutations(action: ConstructedAction, sample_count: int = 1000, seed: int = 0) -> Dict[str, float]:
    """Max |w(x) - x| over sampled points of the valid region for each relator w."""
    st = action.structure
    if st.N < 6:
        raise ValueError("commutation checks sample blocks of max-norm <= N - 5; need N >= 6")
    rng = np.random.default_rng(seed)
    a, b, t = action.a, action.b, action.t
    report: Dict[str, float] = {}

    x = _valid_samples(st, sample_count, 2, rng)
    y = a(t(a.inverse(t.inverse(x))))
    report["[a,t]"] = float(np.max(np.abs(y - x)))

    x = _valid_samples(st, sample_count, 2, rng)
    y = b(t(b.inverse(t.inverse(x))))
    report["[b,t]"] = float(np.max(np.abs(y - x)))

    for m in (1, 2, 3):
        x = _valid_samples(st, sample_count, 2 + m, rng)

        def conj(z, m=m):
            for _ in range(m):
                z = a.inverse(z)
            z = b(z)
            for _ in range(m):
                z = a(z)
            return z

        def conj_inv(z, m=m):
            for _ in range(m):
                z = a.inverse(z)
            z = b.inverse(z)
            for _ in range(m):
                z = a(z)
            return z

        y = conj(b(conj_inv(b.inverse(x))))
        report[f"[a^{m} b a^-{m},b]"] = float(np.max(np.abs(y - x)))
    report["max"] = max(report.values())
    return report


def junction_mismatch(action: ConstructedAction) -> Dict[str, float]:
    """Largest relative disagreement of one-sided derivatives at piece junctions."""
    out = {}
    for name, g in action.generators().items():
        worst = 0.0
        for _, dl, dr in g.junctions():
            worst = max(worst, abs(dl - dr) / max(dl, dr))
        out[name] = worst
    return out


def check_log_deriv_lipschitz(action: ConstructedAction, M_estimate: float, grid: int = 33,
                              max_norm: Optional[int] = None) -> Dict[str, object]:
    """Compare Lip(log g') on each block u with (M/|I_u|) |R - 1|, where
    R = (|I_u|/|I_v|) / (|I_{u-e3}|/|I_{v-e3}|) and v is the image block.

    Only blocks with max-norm < N (or <= ``max_norm``) and whose neighbours
    u - e3, v - e3 exist are examined.
    """
    st = action.structure
    n = st.N
    limit = n - 1 if max_norm is None else max_norm
    labels = st.label(np.arange(st.count))
    norms = np.abs(labels).max(axis=1)
    s = (np.arange(grid) + 0.5) / grid  # interior points: one-sided limits differ at block ends
    shifts = {"a": (st.width**2, None), "t": (1, None), "b": (st.width, 0)}
    worst_ratio = 0.0
    empirical_M = 0.0
    per_gen = {}
    for name, (shift, only_i) in shifts.items():
        g = action.generators()[name]
        sel = (norms <= limit) & (labels[:, 2] > -n)
        if name == "t":
            sel &= labels[:, 2] < n - 1
        if name == "a":
            sel &= labels[:, 0] < n
        if name == "b":
            sel &= (labels[:, 0] == 0) & (labels[:, 1] < n - 1) & (labels[:, 1] > -n + 1)
        blocks = np.flatnonzero(sel)
        if blocks.size == 0:
            per_gen[name] = {"worst_ratio": 0.0, "empirical_M": 0.0}
            continue
        xs = st.starts[blocks, None] + st.lengths[blocks, None] * s[None, :]
        lip = np.abs(g.log_derivative_slope(xs)).max(axis=1)
        lu = st.lengths[blocks]
        lv = st.lengths[blocks + shift]
        lu_prev = st.lengths[blocks - 1]
        lv_prev = st.lengths[blocks + shift - 1]
        R = (lu / lv) / (lu_prev / lv_prev)
        dev = np.abs(R - 1.0)
        bound = M_estimate / lu * dev
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(bound > 0, lip / bound, np.where(lip > 1e-9 / lu, np.inf, 0.0))
            m_emp = np.where(dev > 0, lip * lu / dev, 0.0)
        per_gen[name] = {"worst_ratio": float(ratio.max()), "empirical_M": float(m_emp.max())}
        worst_ratio = max(worst_ratio, float(ratio.max()))
        empirical_M = max(empirical_M, float(m_emp.max()))
    return {"M": M_estimate, "worst_ratio": worst_ratio, "empirical_M": empirical_M,
            "passed": worst_ratio <= 1.0, "per_generator": per_gen}


def _support_components(g: Generator, grid: np.ndarray) -> List[Tuple[float, float]]:
    moved = np.abs(g(grid) - grid) > 0
    comps = []
    start = None
    for x, mv in zip(grid, moved):
        if mv and start is None:
            start = x
        elif not mv and start is not None:
            comps.append((start, x))
            start = None
    if start is not None:
        comps.append((start, grid[-1]))
    return comps


def nested_support_check(action: ConstructedAction) -> bool:
    """supp b sits inside the closure of a support component of t's
    container, i.e. supp b within supp a = (0,1), and some component of supp t
    has closure inside supp b."""
    st = action.structure
    interior = np.concatenate([st.starts[1:], [0.5 * st.gap_left, 1 - 0.5 * st.gap_right]])
    interior = interior[(interior > 0) & (interior < 1)]
    if not np.all(action.a(interior) > interior):
        return False
    lo0, hi0 = st.chunk(0)
    first_index = st.label(np.arange(st.count))[:, 0]
    inside = st.starts[first_index == 0][1:]
    if inside.size == 0 or not np.all(action.b(inside) > inside):
        return False
    outside = np.concatenate([st.starts[first_index < 0], st.starts[first_index > 0][1:]])
    if outside.size and not np.all(action.b(outside) == outside):
        return False
    # the t-component J2 = interior of the fiber I_{0,0}
    f_lo, f_hi = st.fiber(0, 0)
    if not (lo0 < f_lo and f_hi < hi0):
        return False
    if action.t(f_lo) != f_lo or action.t(f_hi) != f_hi:
        return False
    mid = np.linspace(f_lo, f_hi, 257)[1:-1]
    return bool(np.all(action.t(mid) > mid))


def block_samples(st: LevelStructure3, max_norm: int, points_per_block: int) -> np.ndarray:
    """Interior midpoint grid of every block with max-norm <= max_norm, sorted."""
    blocks = np.flatnonzero(st.max_norm() <= max_norm)
    frac = (np.arange(points_per_block) + 0.5) / points_per_block
    pts = st.starts[blocks][:, None] + frac[None, :] * st.lengths[blocks][:, None]
    return np.sort(pts.ravel())


def sampled_derivative_holder(action: ConstructedAction, name: str, max_norm: int,
                              points_per_block: int = 16, tau: Optional[float] = None) -> HolderEstimate:
    """Grid estimate of [g']_tau over blocks of max-norm <= max_norm."""
    g = action.generators()[name]
    tau = action.structure.params.tau if tau is None else tau
    x = block_samples(action.structure, max_norm, points_per_block)
    return holder_norm(x, g.derivative(x), tau)


def block_displacement_check(action: ConstructedAction, points_per_block: int = 1000,
                             fibers: Optional[Sequence[Tuple[int, int]]] = None) -> Dict[str, object]:
    """Test the displacement bound for t on every block, fiber by fiber.

    t preserves each fiber I_{i,j} and fixes its infimum a, where t' = 1. The
    Hölder constant of t' is estimated once per fiber from all block grids
    together with a; each block's grid is then checked against it.
    """
    st = action.structure
    t = action.t
    tau = st.params.tau
    n = st.N
    if fibers is None:
        fibers = [(i, j) for i in range(-n, n + 1) for j in range(-n, n + 1)]
    frac = (np.arange(points_per_block) + 0.5) / points_per_block
    worst, failed, checked = 0.0, [], 0
    for i, j in fibers:
        lo, hi = st.fiber(i, j)
        first = st.index((i, j, -n))
        starts = st.starts[first:first + st.width]
        lens = st.lengths[first:first + st.width]
        grid = (starts[:, None] + frac[None, :] * lens[:, None]).ravel()
        pts = np.concatenate([[lo], grid])
        estimate = holder_norm(pts, t.derivative(pts), tau, anchors=(0,))
        rep = check_displacement(t, t.derivative, lo, hi, tau, grid=grid, holder=estimate)
        per_block = rep.ratios.reshape(st.width, points_per_block).max(axis=1)
        checked += st.width
        worst = max(worst, rep.worst_ratio)
        failed.extend((i, j, k) for k, r in zip(range(-n, n + 1), per_block) if r > 1.0)
    return {"blocks": checked, "failed": failed, "worst_ratio": worst, "passed": not failed}
