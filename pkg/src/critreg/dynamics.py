"""Two-chains, crossed pairs and support structure of finitely generated PL
actions, plus the centralizer and nesting certificates built from them.

Every search is a semi-decision: witnesses are exact, while a negative answer
only means nothing was found among words of length at most the budget.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exact_pl import (
    GroupWord,
    Interval,
    PLHomeo,
    _rescale,
    as_rational,
    bump,
    commutator,
    compose,
    enumerate_elements,
    invert,
    support_components,
    thompson_generators,
    word_map,
)
from .regularity import NestingWitness

__all__ = [
    "EquivariantExtension",
    "ActionSpec",
    "TwoChain",
    "CrossedPairWitness",
    "SupportClassification",
    "NonConradian",
    "NoWitnessUpTo",
    "is_two_chain",
    "find_two_chain",
    "find_crossed_pair",
    "conradian_diagnostic",
    "is_overlapping_pair",
    "classify_supports",
    "check_nested_or_disjoint",
    "commutes_exactly",
    "centralizer_obstruction",
    "extract_nesting_witness",
    "f_disjoint_commutators_check",
    "translation_nesting_example",
    "conradian_tower",
]

POWER_CAP = 4096


class EquivariantExtension:
    """The c-equivariant extension of a PL map supported in a window W.

    Translates c^n W (n in Z) are pairwise disjoint and exhaust no more than
    (0,1); on c^n W the map acts as c^n base c^-n, elsewhere as the identity.
    Such maps commute with c exactly. A fixed-point-free c has no nontrivial
    PL centralizer with finitely many breakpoints, so these are evaluated
    lazily: breakpoints accumulate at 0 and 1.
    """

    def __init__(self, translation: PLHomeo, base: PLHomeo, window: Interval):
        comps = support_components(translation)
        if len(comps) != 1 or comps[0] != Interval(0, 1):
            raise ValueError("translation must move every interior point")
        if translation(window.lo) <= window.lo:
            raise ValueError("translation must push the window to the right")
        if translation(window.lo) < window.hi:
            raise ValueError("window overlaps its own translate")
        for comp in support_components(base):
            if not comp.issubset(window):
                raise ValueError("base map must be supported inside the window")
        self.translation = translation
        self.base = base
        self.window = window
        self._domain_hi = translation(window.lo)

    def _locate(self, x: Fraction) -> Tuple[int, Fraction]:
        """(n, y) with x = c^n(y) and y in the fundamental domain [w0, c(w0))."""
        c = self.translation
        n, y = 0, x
        while y >= self._domain_hi:
            y = c.inverse_at(y)
            n += 1
        while y < self.window.lo:
            y = c(y)
            n -= 1
        return n, y

    def _shift(self, y: Fraction, n: int) -> Fraction:
        c = self.translation
        for _ in range(abs(n)):
            y = c(y) if n > 0 else c.inverse_at(y)
        return y

    def __call__(self, x):
        x = as_rational(x)
        if x <= 0 or x >= 1:
            return x
        n, y = self._locate(x)
        return self._shift(self.base(y), n)

    def inverse_at(self, x):
        x = as_rational(x)
        if x <= 0 or x >= 1:
            return x
        n, y = self._locate(x)
        return self._shift(self.base.inverse_at(y), n)

    def _derivative_one(self, x: float) -> float:
        if x <= 0 or x >= 1:
            return 1.0
        q = Fraction(x)
        n, y = self._locate(q)
        d = _slope_at(self.base, y)
        # chain rule along the orbit: (c^n)'(base y) / (c^n)'(y)
        u, v = self.base(y), y
        c = self.translation
        for _ in range(abs(n)):
            if n > 0:
                d *= _slope_at(c, u) / _slope_at(c, v)
                u, v = c(u), c(v)
            else:
                u, v = c.inverse_at(u), c.inverse_at(v)
                d *= _slope_at(c, v) / _slope_at(c, u)
        return float(d)

    def derivative(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.array([self._derivative_one(float(v)) for v in arr.ravel()])
        return out.reshape(arr.shape) if arr.ndim else float(out[0])

    def _same_frame(self, other: "EquivariantExtension"):
        if self.translation != other.translation or self.window != other.window:
            raise ValueError("extensions over different translations do not compose")

    def __matmul__(self, other: "EquivariantExtension") -> "EquivariantExtension":
        self._same_frame(other)
        return EquivariantExtension(self.translation, compose(self.base, other.base), self.window)

    def __invert__(self) -> "EquivariantExtension":
        return EquivariantExtension(self.translation, invert(self.base), self.window)

    def is_identity(self) -> bool:
        return self.base.is_identity()

    def __eq__(self, other):
        return (isinstance(other, EquivariantExtension) and self.translation == other.translation
                and self.window == other.window and self.base == other.base)

    def __hash__(self):
        return hash((self.translation, self.window, self.base))

    def __repr__(self):
        return f"EquivariantExtension(base={self.base!r}, window={self.window})"


def _slope_at(f: PLHomeo, x: Fraction) -> Fraction:
    """Right-hand slope (left-hand at x = 1)."""
    i = bisect.bisect_right(f.xs, x) - 1
    i = min(max(i, 0), len(f.xs) - 2)
    return (f.ys[i + 1] - f.ys[i]) / (f.xs[i + 1] - f.xs[i])


Map = Union[PLHomeo, EquivariantExtension]


@dataclass
class ActionSpec:
    """Named generators and the word budget used by every search."""

    generators: Dict[str, Map]
    word_budget: int = 3
    name: str = "action"
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.generators:
            raise ValueError("an action needs at least one generator")
        if self.word_budget < 1:
            raise ValueError("word budget must be at least 1")
        kinds = {type(g) for g in self.generators.values()}
        if len(kinds) > 1:
            raise ValueError("mixing PL maps and equivariant extensions is not supported")
        if kinds == {EquivariantExtension}:
            frames = {(g.translation, g.window) for g in self.generators.values()}
            if len(frames) > 1:
                raise ValueError("equivariant generators must share translation and window")

    @property
    def equivariant(self) -> bool:
        return isinstance(next(iter(self.generators.values())), EquivariantExtension)

    def pl_generators(self) -> Dict[str, PLHomeo]:
        """PL maps the searches run on (the bases for an equivariant action)."""
        if self.equivariant:
            return {n: g.base for n, g in self.generators.items()}
        return dict(self.generators)

    def lift(self, m: PLHomeo) -> Map:
        if self.equivariant:
            g = next(iter(self.generators.values()))
            return EquivariantExtension(g.translation, m, g.window)
        return m


@dataclass(frozen=True)
class TwoChain:
    J1: Interval
    J2: Interval
    g1: GroupWord
    g2: GroupWord
    budget: int = 0

    def __str__(self):
        return f"two-chain {self.J1} [{self.g1}] / {self.J2} [{self.g2}]"


@dataclass(frozen=True)
class CrossedPairWitness:
    f: GroupWord
    g: GroupWord
    J: Optional[Interval]
    variant: str                 # "boundary-moved" or "ping"
    a: Optional[Fraction] = None
    b: Optional[Fraction] = None
    budget: int = 0


@dataclass
class SupportClassification:
    nested: List[Tuple[Interval, GroupWord]]
    crossed_candidates: List[Interval]
    covering_chains: Dict[Interval, List[TwoChain]] = field(default_factory=dict)
    budget: int = 0


@dataclass(frozen=True)
class NonConradian:
    witness: TwoChain
    budget: int


@dataclass(frozen=True)
class NoWitnessUpTo:
    budget: int


# ------------------------------------------------------------ primitives ---

def is_two_chain(J: Interval, K: Interval) -> bool:
    """J∩K is a nonempty proper subinterval of both (shared endpoints do not count)."""
    return (J.lo < K.lo < J.hi < K.hi) or (K.lo < J.lo < K.hi < J.hi)


def _components(m) -> List[Interval]:
    return support_components(m)


def _pool(action: ActionSpec):
    """Distinct elements of length <= budget as (word, PL map), identity dropped."""
    gens = action.pl_generators()
    key = (tuple(sorted(gens.items())), action.word_budget)
    cached = action._cache.get("pool")
    if cached is None or cached[0] != key:
        pool = [(w, m) for w, m in enumerate_elements(gens, action.word_budget) if not m.is_identity()]
        action._cache["pool"] = (key, pool)
    return action._cache["pool"][1]


def _component_table(pool):
    """Distinct components in first-seen order, each with the first word realizing it."""
    seen: Dict[Interval, GroupWord] = {}
    for w, m in pool:
        for J in _components(m):
            seen.setdefault(J, w)
    return seen


def _sweep_two_chain(table: Dict[Interval, GroupWord]) -> Optional[Tuple[Interval, Interval]]:
    """First pair, ordered by the later interval then the earlier, forming a two-chain."""
    ordered = list(table)
    for idx, K in enumerate(ordered):
        for J in ordered[:idx]:
            if is_two_chain(J, K):
                return J, K
    return None


def _boundary_search(pool, table=None):
    """First (f, g, J) with J a component of f and g(∂J) ∩ J nonempty."""
    if table is None:
        table = _component_table(pool)
    comps = list(table.items())
    ends = sorted({e for J in table for e in (J.lo, J.hi)})
    for gw, g in pool:
        image = {e: g(e) for e in ends}
        for J, fw in comps:
            if image[J.lo] in J or image[J.hi] in J:
                return fw, gw, g, J
    return None


# --------------------------------------------------------------- finders ---

def find_two_chain(action: ActionSpec) -> Optional[TwoChain]:
    """Two-chain among support components of elements of length <= budget.

    When the pool itself has none but some g moves an endpoint of a component
    J of f into J, the pair {J, gJ} (gJ a component of g f g^-1), or a
    component of g straddling an end of J, is returned instead; by the
    crossed-pair equivalences this covers every boundary configuration.
    """
    pool = _pool(action)
    table = _component_table(pool)
    hit = _sweep_two_chain(table)
    if hit is not None:
        J, K = sorted(hit)
        return TwoChain(J, K, table[J], table[K], action.word_budget)
    found = _boundary_search(pool, table)
    if found is None:
        return None
    fw, gw, g, J = found
    return _chain_from_boundary(action, fw, gw, g, J)


def _chain_from_boundary(action, fw, gw, g, J) -> Optional[TwoChain]:
    gJ = Interval(g(J.lo), g(J.hi))
    conj = gw * fw * gw.inverse()
    if is_two_chain(J, gJ):
        a, b = sorted([(J, fw), (gJ, conj)])
        return TwoChain(a[0], b[0], a[1], b[1], action.word_budget)
    # gJ nested in J or J in gJ: a component of g, or of g^-1 f g, sticks out
    for K in _components(g):
        if is_two_chain(J, K):
            a, b = sorted([(J, fw), (K, gw)])
            return TwoChain(a[0], b[0], a[1], b[1], action.word_budget)
    gens = action.pl_generators()
    f = word_map(fw, gens)
    for h_word, h in ((gw, g), (gw.inverse(), invert(g))):
        for power in range(2, 9):
            hp = h ** power
            K = Interval(hp(J.lo), hp(J.hi))
            if is_two_chain(J, K):
                cw = (h_word ** power) * fw * (h_word ** power).inverse()
                a, b = sorted([(J, fw), (K, cw)])
                return TwoChain(a[0], b[0], a[1], b[1], action.word_budget)
    # germs at a shared endpoint commute, so commutators live away from it and cross ∂J
    for h_word, h in ((gw, g), (gw.inverse(), invert(g))):
        for x, xw, y, yw in ((f, fw, h, h_word), (h, h_word, f, fw)):
            c = commutator(x, y)
            cw = xw * yw * xw.inverse() * yw.inverse()
            for K in _components(c):
                if is_two_chain(J, K):
                    a, b = sorted([(J, fw), (K, cw)])
                    return TwoChain(a[0], b[0], a[1], b[1], action.word_budget)
    # commutators of f with g-conjugates
    for h_word, h in ((gw, g), (gw.inverse(), invert(g))):
        c = commutator(f, compose(compose(h, f), invert(h)))
        cw = fw * (h_word * fw * h_word.inverse()) * fw.inverse() * (h_word * fw * h_word.inverse()).inverse()
        for K in _components(c):
            for L, lw in ((J, fw), (Interval(h(J.lo), h(J.hi)), h_word * fw * h_word.inverse())):
                if is_two_chain(L, K):
                    a, b = sorted([(L, lw), (K, cw)])
                    return TwoChain(a[0], b[0], a[1], b[1], action.word_budget)
    return None


def _power_towards(h: PLHomeo, hw: GroupWord, x: Fraction, right: bool):
    """The sign s with h^s moving x in the requested direction."""
    if (h(x) > x) == right:
        return h, hw
    return invert(h), hw.inverse()


def find_crossed_pair(action: ActionSpec, variant: str = "boundary") -> Optional[CrossedPairWitness]:
    """Crossed pair among words of length <= budget.

    ``variant="boundary"``: f, g in the pool and a component J of f with
    g(∂J) ∩ J nonempty. ``variant="ping"``: f(a) = a < f(b) < g(a) < g(b) = b,
    with f, g powers of the two-chain words straddling a and b.
    """
    if variant == "boundary":
        found = _boundary_search(_pool(action))
        if found is None:
            return None
        fw, gw, _, J = found
        return CrossedPairWitness(fw, gw, J, "boundary-moved", budget=action.word_budget)
    if variant != "ping":
        raise ValueError(f"unknown variant {variant!r}")
    chain = find_two_chain(action)
    if chain is None:
        return None
    gens = action.pl_generators()
    left, right = (chain.J1, chain.g1), (chain.J2, chain.g2)
    a, b = right[0].lo, left[0].hi          # a fixed by the right word, b by the left word
    f0, fw0 = _power_towards(word_map(right[1], gens), right[1], b, right=False)
    g0, gw0 = _power_towards(word_map(left[1], gens), left[1], a, right=True)
    fb, ga = b, a
    for n in range(1, POWER_CAP + 1):
        fb, ga = f0(fb), g0(ga)
        if fb < ga:
            f, g = fw0 ** n, gw0 ** n
            return CrossedPairWitness(f, g, None, "ping", a=a, b=b, budget=action.word_budget)
    return None


def conradian_diagnostic(action: ActionSpec):
    chain = find_two_chain(action)
    if chain is None:
        return NoWitnessUpTo(action.word_budget)
    return NonConradian(chain, action.word_budget)


def is_overlapping_pair(f: PLHomeo, g: PLHomeo) -> bool:
    return any(J.intersects(K) for J in _components(f) for K in _components(g))


def check_nested_or_disjoint(f: PLHomeo, g: PLHomeo) -> bool:
    for J in _components(f):
        for K in _components(g):
            if J.intersects(K) and not (J.issubset(K) or K.issubset(J)):
                return False
    return True


def _merge(intervals: Sequence[Interval]) -> List[Interval]:
    out: List[Interval] = []
    for J in sorted(intervals):
        if out and J.lo < out[-1].hi:
            if J.hi > out[-1].hi:
                out[-1] = Interval(out[-1].lo, J.hi)
        else:
            out.append(J)
    return out


def classify_supports(action: ActionSpec) -> SupportClassification:
    """Split the components of supp G into nested and crossed candidates.

    A component U of supp G is nested when U is itself a support component
    of some word of length <= budget. Each crossed candidate is checked to be
    covered by two-chains of maximal generator components inside U.
    """
    gens = action.pl_generators()
    gen_comps = {name: _components(g) for name, g in gens.items()}
    whole = _merge([J for comps in gen_comps.values() for J in comps])
    table = _component_table(_pool(action))
    nested, crossed, chains = [], [], {}
    for U in whole:
        if U in table:
            nested.append((U, table[U]))
            continue
        crossed.append(U)
        inside = [(J, GroupWord(((name, 1),))) for name, comps in gen_comps.items() for J in comps
                  if J.issubset(U)]
        maximal = [(J, w) for J, w in inside if not any(J != K and J.issubset(K) for K, _ in inside)]
        maximal.sort()
        # maximal intervals are pairwise non-nested, so sorting by lo sorts by hi too
        found = [TwoChain(J, K, wj, wk, action.word_budget)
                 for (J, wj), (K, wk) in zip(maximal[:-1], maximal[1:]) if is_two_chain(J, K)]
        covered = (len(maximal) >= 2 and maximal[0][0].lo == U.lo and maximal[-1][0].hi == U.hi
                   and len(found) == len(maximal) - 1)
        if not covered:
            raise AssertionError(f"crossed candidate {U} is not covered by generator two-chains")
        chains[U] = found
    return SupportClassification(nested, crossed, chains, action.word_budget)


# ----------------------------------------------------- centralizer tests ---

def commutes_exactly(c: PLHomeo, g: Map) -> bool:
    if isinstance(g, EquivariantExtension):
        if g.translation == c:
            return True
        raise ValueError("cannot decide commutation with an extension over another translation")
    return compose(c, g) == compose(g, c)


def _check_centralizes(c: PLHomeo, action: ActionSpec):
    for name, g in action.generators.items():
        if not commutes_exactly(c, g):
            raise ValueError(f"c does not commute with generator {name}")


def centralizer_obstruction(c: PLHomeo, action: ActionSpec) -> Optional[TwoChain]:
    """A two-chain of the action whose union meets supp c.

    Such a configuration is impossible for C^{1,tau} actions; it is legal in
    C^0, so finding one certifies that the given maps cannot be smoothed.
    """
    _check_centralizes(c, action)
    c_comps = _components(c)
    if not c_comps:
        return None
    pool = _pool(action)
    table = _component_table(pool)
    items = list(table.items())
    for i, (J, wj) in enumerate(items):
        for K, wk in items[:i]:
            if is_two_chain(J, K):
                hull = Interval(min(J.lo, K.lo), max(J.hi, K.hi))
                if any(hull.intersects(C) for C in c_comps):
                    a, b = sorted([(J, wj), (K, wk)])
                    return TwoChain(a[0], b[0], a[1], b[1], action.word_budget)
    return None


# ------------------------------------------------------ nesting extraction ---

def _derived_levels(action: ActionSpec, depth: int, cap: int = 12):
    """Commutator proxies for the derived series: level 0 is the word pool."""
    level = [(w, m) for w, m in _pool(action)]
    level.sort(key=lambda e: (len(e[1].xs), len(e[0])))
    levels = [level[:cap]]
    for _ in range(depth):
        prev = levels[-1]
        seen, nxt = set(), []
        for i in range(len(prev)):
            for j in range(i + 1, len(prev)):
                (wx, x), (wy, y) = prev[i], prev[j]
                m = commutator(x, y)
                if m.is_identity() or m in seen:
                    continue
                seen.add(m)
                nxt.append((wx * wy * wx.inverse() * wy.inverse(), m))
        nxt.sort(key=lambda e: (len(e[1].xs), len(e[0])))
        levels.append(nxt[:cap])
    return levels


def _support_hull(action: ActionSpec) -> Optional[Interval]:
    if action.equivariant:
        return Interval(0, 1)
    comps = [J for g in action.generators.values() for J in _components(g)]
    if not comps:
        return None
    return Interval(min(J.lo for J in comps), max(J.hi for J in comps))


def extract_nesting_witness(action: ActionSpec, k: int, c: PLHomeo,
                            max_translation_power: int = 4096) -> Optional[NestingWitness]:
    """A (k,1)-nesting in <G, c> following the derived-series climb.

    g_k is a nontrivial level-k commutator with component J_{k-1}; J_k is
    the gap between the midpoint x of J_{k-1} and g_k(x). Going outward,
    g_i is a level-i element moving J_i off itself and J_{i-1} its support
    component containing J_i. Finally w_n = c^(Nn) with J_1 ∩ c^N J_1 empty.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    _check_centralizes(c, action)
    hull = _support_hull(action)
    if hull is None:
        return None
    if not any(hull.issubset(C) for C in _components(c)):
        raise ValueError("c has a fixed point in the support of the action")
    levels = _derived_levels(action, k)
    top = levels[k]
    for gk_word, gk in top:
        comps = _components(gk)
        if not comps:
            continue
        outer = comps[0]
        x = outer.midpoint
        y = gk(x)
        inner = Interval(min(x, y), max(x, y))
        chain = [inner, outer]
        words = [gk_word]
        ok = True
        for i in range(k - 1, 1, -1):
            J = chain[-1]
            pick = None
            for w, g in levels[i]:
                image = Interval(g(J.lo), g(J.hi))
                if image.hi <= J.lo or J.hi <= image.lo:
                    home = [K for K in _components(g) if J.issubset(K) and K != J]
                    if home:
                        pick = (w, home[0])
                        break
            if pick is None:
                ok = False
                break
            words.append(pick[0])
            chain.append(pick[1])
        if not ok:
            continue
        intervals = list(reversed(chain))            # J_1 ⊋ ... ⊋ J_k
        gs = list(reversed(words))                   # g_2, ..., g_k
        J1 = intervals[0]
        cN, N = c, 1
        while not (cN(J1.lo) >= J1.hi or cN(J1.hi) <= J1.lo):
            cN = compose(c, cN)
            N += 1
            if N > max_translation_power:
                return None
        gens = action.pl_generators()
        maps = [cN] + [action.lift(word_map(w, gens)) for w in gs]
        certificate = list(range(1, k))
        return NestingWitness(
            maps=maps,
            intervals=[(J.lo, J.hi) for J in intervals],
            u=1.0,
            rule=lambda n, cert=certificate: (0, cert),
            names=[f"c^{N}"] + [str(w) for w in gs],
        )
    return None


# ------------------------------------------------------- Thompson F split ---

def f_disjoint_commutators_check(budget: int = 2) -> bool:
    """Commutators of the copies of F in [0,1/2] and [1/2,1] have disjoint supports."""
    A, B = thompson_generators()
    half = Fraction(1, 2)
    sides = {
        "minus": ({"A": _rescale(A, Fraction(0), half), "B": _rescale(B, Fraction(0), half)}, Interval(0, half)),
        "plus": ({"A": _rescale(A, half, Fraction(1)), "B": _rescale(B, half, Fraction(1))}, Interval(half, 1)),
    }
    supports = {}
    for side, (gens, box) in sides.items():
        pool = [m for _, m in enumerate_elements(gens, budget)]
        comps = []
        for i in range(len(pool)):
            for j in range(i + 1, len(pool)):
                comps.extend(_components(commutator(pool[i], pool[j])))
        if not all(J.issubset(box) for J in comps):
            return False
        supports[side] = _merge(comps)
    return not any(J.intersects(K) for J in supports["minus"] for K in supports["plus"])


# ------------------------------------------------------------- examples ---

def _standard_translation() -> PLHomeo:
    """x -> 3x/2 on [0,1/2], then halving the distance to 1: moves every interior point."""
    return PLHomeo([(0, 0), (Fraction(1, 2), Fraction(3, 4)), (1, 1)])


def _quarter_bump(J: Interval) -> Tuple[PLHomeo, Interval]:
    """Bump on J sending lo + |J|/4 to lo + |J|/2, and the interval it displaces."""
    p = J.lo + J.length / 4
    q = J.lo + J.length / 2
    return bump(J.lo, J.hi, p, q), Interval(p, q)


def translation_nesting_example(k: int, window: Interval = Interval(Fraction(1, 2), Fraction(5, 8))):
    """(k,1)-nesting {c, g_2, ..., g_k} with g_i commuting with c.

    J_1 is the window; g_i is a bump on J_{i-1} pushing J_i off itself, made
    c-equivariant. w_n = c^n works since c J_1 lies to the right of J_1.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    c = _standard_translation()
    intervals = [window]
    gs = []
    for _ in range(k - 1):
        g, inner = _quarter_bump(intervals[-1])
        gs.append(EquivariantExtension(c, g, window))
        intervals.append(inner)
    certificate = list(range(1, k))
    return NestingWitness(
        maps=[c] + gs,
        intervals=[(J.lo, J.hi) for J in intervals],
        u=1.0,
        rule=lambda n: (0, certificate),
        names=["c"] + [f"g{i}" for i in range(2, k + 1)],
    )


def conradian_tower(depth: int = 3, window: Interval = Interval(Fraction(1, 2), Fraction(5, 8)),
                    equivariant: bool = True) -> Tuple[ActionSpec, PLHomeo]:
    """Iterated-wreath action: each generator is a bump inside a fundamental
    domain of the previous one. Supports are nested or disjoint, so the action
    is Conradian, and the derived series has length ``depth``.

    Returns the action (made c-equivariant when ``equivariant``) and c.
    """
    c = _standard_translation()
    gens: Dict[str, PLHomeo] = {}
    J = Interval(window.lo + window.length / 16, window.hi - window.length / 16)
    names = "fghkmn"
    for level in range(depth):
        p = J.lo + J.length / 8
        g = bump(J.lo, J.hi, p, J.lo + J.length / 4)
        gens[names[level]] = g
        # fundamental domain [p, g(p)] of g; the next bump lives strictly inside it
        q = g(p)
        J = Interval(p + (q - p) / 8, q - (q - p) / 8)
    if equivariant:
        gens = {n: EquivariantExtension(c, g, window) for n, g in gens.items()}
    return ActionSpec(gens, word_budget=2, name=f"tower{depth}"), c
