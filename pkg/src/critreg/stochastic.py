"""Monte Carlo checks of summability along random letter sequences.

A weight alpha on nonempty finite words over d letters with total mass at
most one gives E[sum_n alpha(omega_n)^tau] <= sum_n d^(-n tau), where
omega_n is the length-n prefix of a uniformly random infinite word.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Tuple

import numpy as np

from .exact_pl import Interval, PLHomeo, support_components

__all__ = [
    "SeqWeight",
    "MonteCarloStats",
    "omega_sum_monte_carlo",
    "expectation_bound",
    "test_weight",
    "geometric_weight",
    "PingReport",
    "ping_orbit_sums",
    "ping_powers",
]


@dataclass(frozen=True)
class SeqWeight:
    """Weight on finite words over {0, ..., d-1}.

    ``by_length`` maps an array of word lengths to weights when the weight
    only depends on length; otherwise ``weight`` takes a single word (tuple
    of letters).
    """

    d: int
    by_length: Optional[Callable[[np.ndarray], np.ndarray]] = None
    weight: Optional[Callable[[Tuple[int, ...]], float]] = None
    total_mass: float = 1.0

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("alphabet needs at least two letters")
        if (self.by_length is None) == (self.weight is None):
            raise ValueError("give exactly one of by_length or weight")
        if not 0 <= self.total_mass <= 1 + 1e-12:
            raise ValueError("total mass must lie in [0, 1]")

    def prefix_weights(self, omega: np.ndarray) -> np.ndarray:
        """alpha(omega_n) for every row of omega and n = 1..columns."""
        trials, n_max = omega.shape
        if self.by_length is not None:
            row = np.asarray(self.by_length(np.arange(1, n_max + 1)), dtype=float)
            return np.broadcast_to(row, (trials, n_max))
        out = np.empty((trials, n_max))
        for t in range(trials):
            word = tuple(int(v) for v in omega[t])
            for n in range(n_max):
                out[t, n] = self.weight(word[: n + 1])
        return out


def test_weight(d: int) -> SeqWeight:
    """alpha(v) = d^-|v| / (|v| (|v|+1)); each length layer has mass 1/(n(n+1))."""
    return SeqWeight(d=d, by_length=lambda n: d ** (-n.astype(float)) / (n * (n + 1.0)))


def geometric_weight(d: int) -> SeqWeight:
    """alpha(v) = d^(-2|v|); total mass 1/(d-1) <= 1 for d >= 2."""
    return SeqWeight(d=d, by_length=lambda n: d ** (-2.0 * n), total_mass=1.0 / (d - 1))


@dataclass
class MonteCarloStats:
    mean: float
    max: float
    stderr: float
    sums: np.ndarray            # per-trial totals
    checkpoints: np.ndarray     # per-trial partial sums at n_max/4, n_max/2, n_max
    checkpoint_steps: Tuple[int, int, int]

    def csv_rows(self):
        return [(t, *row) for t, row in enumerate(self.checkpoints.tolist())]


def _checkpoints(n_max: int) -> Tuple[int, int, int]:
    return (max(1, n_max // 4), max(1, n_max // 2), n_max)


def omega_sum_monte_carlo(alpha: SeqWeight, tau: float, n_max: int, trials: int, seed: int,
                          chunk: int = 4096) -> MonteCarloStats:
    """Sample uniform words letter by letter and total alpha(omega_n)^tau for n <= n_max.

    All letters come from one ``default_rng(seed)`` stream drawn in trial
    order, so results do not depend on ``chunk``.
    """
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    if trials < 1 or n_max < 1:
        raise ValueError("need at least one trial and one step")
    rng = np.random.default_rng(seed)
    steps = _checkpoints(n_max)
    sums = np.empty(trials)
    marks = np.empty((trials, 3))
    for start in range(0, trials, chunk):
        count = min(chunk, trials - start)
        omega = rng.integers(0, alpha.d, size=(count, n_max))
        partial = np.cumsum(alpha.prefix_weights(omega) ** tau, axis=1)
        sums[start:start + count] = partial[:, -1]
        marks[start:start + count] = partial[:, [s - 1 for s in steps]]
    stderr = float(np.std(sums, ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return MonteCarloStats(mean=float(np.mean(sums)), max=float(np.max(sums)), stderr=stderr,
                           sums=sums, checkpoints=marks, checkpoint_steps=steps)


def expectation_bound(d: int, tau: float, n_max: int) -> Tuple[float, float]:
    """(sum_{n<=n_max} d^(-n tau), d^-tau / (1 - d^-tau))."""
    if d < 2 or not tau > 0:
        raise ValueError("need d >= 2 and tau > 0")
    ratio = d ** (-tau)
    partial = sum(ratio ** n for n in range(1, n_max + 1))
    return partial, ratio / (1 - ratio)


# ----------------------------------------------------------------- ping ---

@dataclass
class PingReport:
    disjoint: bool
    words_checked: int
    max_layer_mass: Fraction        # max over n of sum_{|w|=n} |w U0|
    stats: MonteCarloStats
    bound: float


def _component_containing(f: PLHomeo, U: Interval) -> Interval:
    for J in support_components(f):
        if U.issubset(J):
            return J
    raise ValueError("U0 is not inside a support component")


def ping_powers(g1: PLHomeo, g2: PLHomeo, U0: Interval, cap: int = 4096) -> Tuple[int, int]:
    """Smallest (m, n) with g1^m(inf J2) >= sup U0 and g2^n(sup J1) <= inf U0.

    The ordering g2 U0 < U0 < g1 U0 alone does not make positive-word images
    of U0 disjoint; these powers give the full ping-pong configuration.
    """
    J1 = _component_containing(g1, U0)
    J2 = _component_containing(g2, U0)
    out = []
    for g, start, done in ((g1, J2.lo, lambda x: x >= U0.hi), (g2, J1.hi, lambda x: x <= U0.lo)):
        x, k = start, 0
        while not done(x):
            x, k = g(x), k + 1
            if k > cap:
                raise ValueError("no power reaches the ping configuration")
        out.append(max(k, 1))
    return out[0], out[1]


def _float_map(f: PLHomeo):
    xs = np.array([float(v) for v in f.xs])
    ys = np.array([float(v) for v in f.ys])
    return lambda x: np.interp(x, xs, ys)


def ping_orbit_sums(g1: PLHomeo, g2: PLHomeo, U0: Interval, tau: float, n_max: int, trials: int,
                    seed: int, max_word: int = 6) -> PingReport:
    """Exact disjointness of w U0 over positive words, then sampled orbit sums.

    Requires inf J1 < inf J2 < g2 U0 < U0 < g1 U0 < sup J1 < sup J2 where
    J_i is the component of supp g_i containing U0. Disjointness is checked
    exactly for every positive word of length <= ``max_word``; random words
    s_1 s_2 ... then give sum_n |s_n ... s_1 U0|^tau, to be compared with the
    d = 2 expectation bound.
    """
    J1 = _component_containing(g1, U0)
    J2 = _component_containing(g2, U0)
    left, right = U0.image(g2), U0.image(g1)
    if not (J1.lo < J2.lo < left.lo and left.hi <= U0.lo and U0.hi <= right.lo
            and right.hi < J1.hi < J2.hi):
        raise ValueError("(g1, g2, U0) is not in ping configuration")
    images: List[Interval] = [U0]
    layers = [[U0]]
    for _ in range(max_word):
        nxt = [J.image(g) for J in layers[-1] for g in (g1, g2)]
        layers.append(nxt)
        images.extend(nxt)
    ordered = sorted(images)
    disjoint = all(a.hi <= b.lo for a, b in zip(ordered[:-1], ordered[1:]))
    layer_mass = max(sum((J.length for J in layer), Fraction(0)) for layer in layers[1:])

    rng = np.random.default_rng(seed)
    letters = rng.integers(0, 2, size=(trials, n_max))
    maps = (_float_map(g1), _float_map(g2))
    lo = np.full(trials, float(U0.lo))
    hi = np.full(trials, float(U0.hi))
    partial = np.zeros((trials, n_max))
    acc = np.zeros(trials)
    for n in range(n_max):
        pick = letters[:, n]
        for s in (0, 1):
            sel = pick == s
            lo[sel] = maps[s](lo[sel])
            hi[sel] = maps[s](hi[sel])
        acc = acc + np.maximum(hi - lo, 0.0) ** tau
        partial[:, n] = acc
    steps = _checkpoints(n_max)
    stderr = float(np.std(acc, ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    stats = MonteCarloStats(mean=float(np.mean(acc)), max=float(np.max(acc)), stderr=stderr, sums=acc,
                            checkpoints=partial[:, [s - 1 for s in steps]], checkpoint_steps=steps)
    return PingReport(disjoint=disjoint, words_checked=len(images) - 1, max_layer_mass=layer_mass,
                      stats=stats, bound=expectation_bound(2, tau, n_max)[0])
