"""Shared generators and brute-force oracles for the test suite."""
from __future__ import annotations

import random
from fractions import Fraction

from hypothesis import strategies as st

from critreg.exact_pl import GroupWord, PLHomeo, bump, support_components, word_map
from critreg.dynamics import is_two_chain

GRID = [Fraction(i, 12) for i in range(13)]


def random_bump(rng: random.Random) -> PLHomeo:
    """Map supported in one interval of the 1/12 grid with one or two interior breakpoints."""
    lo, hi = sorted(rng.sample(GRID, 2))
    inner = [x for x in GRID if lo < x < hi]
    k = min(len(inner), rng.choice([1, 2]))
    xs = sorted(rng.sample(inner, k))
    ys = sorted(rng.sample(inner, k))
    pts = [(Fraction(0), Fraction(0))]
    if lo > 0:
        pts.append((lo, lo))
    pts += list(zip(xs, ys))
    if hi < 1:
        pts.append((hi, hi))
    pts.append((Fraction(1), Fraction(1)))
    return PLHomeo(pts)


def random_action(seed: int) -> dict:
    """One to three nontrivial grid bumps, named f, g, h."""
    rng = random.Random(seed)
    gens = {}
    for name in "fgh"[: rng.choice([1, 2, 2, 3])]:
        while True:
            m = random_bump(rng)
            if not m.is_identity():
                break
        gens[name] = m
    return gens


def reduced_words(names, budget):
    letters = [(n, s) for n in sorted(names) for s in (1, -1)]
    out, layer = [()], [()]
    for _ in range(budget):
        nxt = [w + (l,) for w in layer for l in letters if not (w and w[-1] == (l[0], -l[1]))]
        out += nxt
        layer = nxt
    return out


def all_word_maps(gens, budget):
    return [word_map(GroupWord(w), gens) for w in reduced_words(gens, budget)]


def oracle_boundary_moved(gens, budget) -> bool:
    """Some word moves an endpoint of some component into that component."""
    maps = all_word_maps(gens, budget)
    comps = {J for m in maps for J in support_components(m)}
    for g in maps:
        for J in comps:
            if g(J.lo) in J or g(J.hi) in J:
                return True
    return False


def oracle_two_chain(gens, budget) -> bool:
    maps = all_word_maps(gens, budget)
    comps = list({J for m in maps for J in support_components(m)})
    return any(is_two_chain(a, b) for a in comps for b in comps)


def commuting_pair(seed: int):
    """A commuting pair of PL maps: disjoint bumps, powers of one map, or a map
    and a power of it restricted to one of its components."""
    rng = random.Random(seed)
    kind = seed % 3
    if kind == 0:
        a, b, c, d = sorted(rng.sample(GRID, 4))
        f = bump(a, b, a + (b - a) / 3, a + (b - a) / 2)
        g = bump(c, d, c + (d - c) / 2, c + (d - c) / 3)
        return f, g
    if kind == 1:
        f = random_bump(rng)
        while f.is_identity():
            f = random_bump(rng)
        return f, f ** rng.choice([-2, -1, 2, 3])
    f = random_bump(rng)
    while f.is_identity():
        f = random_bump(rng)
    comps = support_components(f)
    J = comps[0]
    m = f ** rng.choice([1, 2])
    lo, hi = J.lo, J.hi
    restricted = PLHomeo([(0, 0)] + ([(lo, lo)] if lo > 0 else [])
                         + [(x, m(x)) for x in m.xs if lo < x < hi]
                         + ([(hi, hi)] if hi < 1 else []) + [(1, 1)])
    return f, restricted


@st.composite
def pl_maps(draw, max_breaks: int = 4, denominator: int = 16):
    """Random PL homeomorphism with breakpoints on a 1/denominator grid."""
    grid = list(range(1, denominator))
    k = draw(st.integers(0, max_breaks))
    xs = sorted(draw(st.lists(st.sampled_from(grid), min_size=k, max_size=k, unique=True)))
    ys = sorted(draw(st.lists(st.sampled_from(grid), min_size=k, max_size=k, unique=True)))
    pts = [(0, 0)] + [(Fraction(x, denominator), Fraction(y, denominator)) for x, y in zip(xs, ys)] + [(1, 1)]
    return PLHomeo(pts)


rationals01 = st.fractions(min_value=0, max_value=1, max_denominator=10**6)
