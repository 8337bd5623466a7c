"""Exact piecewise-linear homeomorphisms of [0, 1].

Maps are stored as pruned breakpoint lists with ``fractions.Fraction``
coordinates, so every composition, inversion and fixed-point test is exact.
"""
from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Optional, Sequence, Tuple

__all__ = [
    "Interval",
    "PLHomeo",
    "GroupWord",
    "as_rational",
    "identity",
    "compose",
    "invert",
    "evaluate",
    "support_components",
    "thompson_generators",
    "is_dyadic_F_element",
    "restrict_to_component",
    "bump",
    "commutator",
    "word_map",
    "evaluate_word",
    "enumerate_words",
    "enumerate_elements",
    "find_relation",
]

ZERO = Fraction(0)
ONE = Fraction(1)


def as_rational(x) -> Fraction:
    """Coerce ints, Fractions and "num/den" strings to a Fraction.

    Floats are refused: silently rounding them would defeat exactness.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


@dataclass(frozen=True, order=True)
class Interval:
    """An interval with exact endpoints; open on both ends unless flagged."""

    lo: Fraction
    hi: Fraction
    lo_closed: bool = False
    hi_closed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lo", as_rational(self.lo))
        object.__setattr__(self, "hi", as_rational(self.hi))
        if not self.lo < self.hi:
            raise ValueError(f"empty interval ({self.lo}, {self.hi})")

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __contains__(self, x) -> bool:
        x = as_rational(x)
        left = self.lo <= x if self.lo_closed else self.lo < x
        right = x <= self.hi if self.hi_closed else x < self.hi
        return left and right

    def intersects(self, other: "Interval") -> bool:
        # open-interval semantics; closed flags only matter for shared endpoints
        if self.hi < other.lo or other.hi < self.lo:
            return False
        if self.hi == other.lo:
            return self.hi_closed and other.lo_closed
        if other.hi == self.lo:
            return other.hi_closed and self.lo_closed
        return True

    def issubset(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def image(self, f: "PLHomeo") -> "Interval":
        return Interval(f(self.lo), f(self.hi), self.lo_closed, self.hi_closed)

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo}, {self.hi}{right}"


def _prune(xs: Sequence[Fraction], ys: Sequence[Fraction]):
    """Drop interior breakpoints where the slope does not change."""
    px, py = [xs[0]], [ys[0]]
    for i in range(1, len(xs) - 1):
        # collinear iff slope(prev -> i) == slope(i -> next)
        if (ys[i] - py[-1]) * (xs[i + 1] - xs[i]) != (ys[i + 1] - ys[i]) * (xs[i] - px[-1]):
            px.append(xs[i])
            py.append(ys[i])
    px.append(xs[-1])
    py.append(ys[-1])
    return tuple(px), tuple(py)


class PLHomeo:
    """Orientation-preserving PL homeomorphism of [0, 1].

    ``PLHomeo([(0, 0), ("1/2", "1/4"), ("3/4", "1/2"), (1, 1)])`` builds the
    standard generator A of Thompson's group F. The breakpoint list is pruned
    on construction, so two equal maps always have equal representations and
    the class can be hashed and compared directly.
    """

    __slots__ = ("xs", "ys", "_hash")

    def __init__(self, breakpoints):
        pts = [(as_rational(x), as_rational(y)) for x, y in breakpoints]
        if len(pts) < 2:
            raise ValueError("need at least the two endpoints")
        xs = tuple(p[0] for p in pts)
        ys = tuple(p[1] for p in pts)
        if xs[0] != 0 or ys[0] != 0 or xs[-1] != 1 or ys[-1] != 1:
            raise ValueError("breakpoints must start at (0,0) and end at (1,1)")
        for i in range(len(xs) - 1):
            if not (xs[i] < xs[i + 1] and ys[i] < ys[i + 1]):
                raise ValueError("breakpoint coordinates must be strictly increasing")
        self.xs, self.ys = _prune(xs, ys)
        self._hash = hash((self.xs, self.ys))

    @classmethod
    def _trusted(cls, xs, ys) -> "PLHomeo":
        obj = cls.__new__(cls)
        obj.xs, obj.ys = _prune(xs, ys)
        obj._hash = hash((obj.xs, obj.ys))
        return obj

    @property
    def breakpoints(self) -> Tuple[Tuple[Fraction, Fraction], ...]:
        return tuple(zip(self.xs, self.ys))

    @property
    def slopes(self) -> Tuple[Fraction, ...]:
        return tuple(
            (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
            for i in range(len(self.xs) - 1)
        )

    def is_identity(self) -> bool:
        return len(self.xs) == 2

    def __call__(self, x) -> Fraction:
        return evaluate(self, x)

    def inverse_at(self, y) -> Fraction:
        y = as_rational(y)
        return _interp(self.ys, self.xs, y)

    def __matmul__(self, other: "PLHomeo") -> "PLHomeo":
        return compose(self, other)

    def __invert__(self) -> "PLHomeo":
        return invert(self)

    def __pow__(self, n: int) -> "PLHomeo":
        base = self if n >= 0 else invert(self)
        result = identity()
        for _ in range(abs(n)):
            result = compose(base, result)
        return result

    def __eq__(self, other):
        if not isinstance(other, PLHomeo):
            return NotImplemented
        return self.xs == other.xs and self.ys == other.ys

    def __hash__(self):
        return self._hash

    def __repr__(self):
        pts = ", ".join(f"({x}, {y})" for x, y in self.breakpoints)
        return f"PLHomeo([{pts}])"


def _interp(xs, ys, x: Fraction) -> Fraction:
    if x < 0 or x > 1:
        raise ValueError(f"{x} lies outside [0, 1]")
    i = bisect_right(xs, x) - 1
    if i >= len(xs) - 1:
        return ys[-1]
    if x == xs[i]:
        return ys[i]
    return ys[i] + (ys[i + 1] - ys[i]) * (x - xs[i]) / (xs[i + 1] - xs[i])


_ID: Optional[PLHomeo] = None


def identity() -> PLHomeo:
    global _ID
    if _ID is None:
        _ID = PLHomeo([(0, 0), (1, 1)])
    return _ID


def evaluate(f: PLHomeo, x) -> Fraction:
    """Exact value f(x); raises ValueError outside [0, 1]."""
    return _interp(f.xs, f.ys, as_rational(x))


def compose(f: PLHomeo, g: PLHomeo) -> PLHomeo:
    """Return f∘g (g is applied first)."""
    if g.is_identity():
        return f
    if f.is_identity():
        return g
    gx, gy, fx, fy = g.xs, g.ys, f.xs, f.ys
    xs, ys = [gx[0]], [fy[0]]
    j = 0  # f's piece: fx[j] <= g(x) < fx[j + 1] at the start of each piece of g
    for i in range(len(gx) - 1):
        x0, y0, x1, y1 = gx[i], gy[i], gx[i + 1], gy[i + 1]
        # pull back f's breakpoints lying strictly inside g's image of this piece
        while fx[j + 1] < y1:
            xs.append(x0 + (fx[j + 1] - y0) * (x1 - x0) / (y1 - y0))
            ys.append(fy[j + 1])
            j += 1
        if y1 == fx[j + 1]:
            j += 1
            ys.append(fy[j])
        else:
            ys.append(fy[j] + (fy[j + 1] - fy[j]) * (y1 - fx[j]) / (fx[j + 1] - fx[j]))
        xs.append(x1)
    return PLHomeo._trusted(tuple(xs), tuple(ys))


def invert(f: PLHomeo) -> PLHomeo:
    return PLHomeo._trusted(f.ys, f.xs)


def commutator(f: PLHomeo, g: PLHomeo) -> PLHomeo:
    """[f, g] = f g f⁻¹ g⁻¹."""
    return compose(compose(f, g), compose(invert(f), invert(g)))


def support_components(f: PLHomeo) -> list:
    """Maximal open intervals on which f(x) != x, in increasing order."""
    # f(x) - x is affine between breakpoints; add its isolated zeros
    pts = list(f.xs)
    for i in range(len(f.xs) - 1):
        d0 = f.ys[i] - f.xs[i]
        d1 = f.ys[i + 1] - f.xs[i + 1]
        if (d0 < 0 < d1) or (d1 < 0 < d0):
            pts.append(f.xs[i] + (f.xs[i + 1] - f.xs[i]) * d0 / (d0 - d1))
    pts.sort()
    comps = []
    start = None
    for i in range(len(pts) - 1):
        a, b = pts[i], pts[i + 1]
        mid = (a + b) / 2
        moved = evaluate(f, mid) != mid
        if moved and start is None:
            start = a
        if start is not None and (not moved or evaluate(f, b) == b):
            if moved:
                comps.append(Interval(start, b))
            else:
                comps.append(Interval(start, a))
            start = None
    return comps


def bump(lo, hi, peak_x, peak_y) -> PLHomeo:
    """PL map supported on (lo, hi) sending peak_x to peak_y."""
    lo, hi, px, py = map(as_rational, (lo, hi, peak_x, peak_y))
    pts = [(ZERO, ZERO)]
    if lo > 0:
        pts.append((lo, lo))
    pts.append((px, py))
    if hi < 1:
        pts.append((hi, hi))
    pts.append((ONE, ONE))
    return PLHomeo(pts)


def _rescale(f: PLHomeo, lo: Fraction, hi: Fraction) -> PLHomeo:
    """Conjugate f into [lo, hi], identity elsewhere."""
    w = hi - lo
    pts = [(ZERO, ZERO)] if lo > 0 else []
    pts += [(lo + w * x, lo + w * y) for x, y in f.breakpoints]
    if hi < 1:
        pts.append((ONE, ONE))
    return PLHomeo(pts)


def thompson_generators() -> Tuple[PLHomeo, PLHomeo]:
    """The standard generating pair (A, B) of Thompson's group F."""
    a = PLHomeo([(0, 0), ("1/2", "1/4"), ("3/4", "1/2"), (1, 1)])
    b = _rescale(a, Fraction(1, 2), ONE)
    return a, b


def _is_dyadic(q: Fraction) -> bool:
    d = q.denominator
    return d & (d - 1) == 0


def _is_power_of_two(q: Fraction) -> bool:
    return q > 0 and _is_dyadic(q) and (q.numerator & (q.numerator - 1) == 0)


def is_dyadic_F_element(f: PLHomeo) -> bool:
    """Dyadic breakpoints and power-of-two slopes."""
    return all(_is_dyadic(x) and _is_dyadic(y) for x, y in f.breakpoints) and all(
        _is_power_of_two(s) for s in f.slopes
    )


def restrict_to_component(f: PLHomeo, J: Interval) -> PLHomeo:
    """f on J, identity elsewhere. Requires f(J) = J."""
    if evaluate(f, J.lo) != J.lo or evaluate(f, J.hi) != J.hi:
        raise ValueError(f"{J} is not invariant under the map")
    pts = [(ZERO, ZERO), (J.lo, J.lo)]
    pts += [(x, y) for x, y in f.breakpoints if J.lo < x < J.hi]
    pts += [(J.hi, J.hi), (ONE, ONE)]
    dedup = []
    for p in pts:
        if not dedup or dedup[-1][0] != p[0]:
            dedup.append(p)
    return PLHomeo(dedup)


# --------------------------------------------------------------------------
# words

_LETTER = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)(?:\^\(?([+-]?\d+)\)?|(⁻¹))?")


@dataclass(frozen=True)
class GroupWord:
    """Reduced word; letters are (generator name, nonzero exponent)."""

    letters: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self):
        reduced: list = []
        for name, e in self.letters:
            e = int(e)
            if reduced and reduced[-1][0] == name:
                e += reduced.pop()[1]
            if e:
                reduced.append((name, e))
        object.__setattr__(self, "letters", tuple(reduced))

    @classmethod
    def parse(cls, text: str) -> "GroupWord":
        """Parse "a b^-1 a^2"; "a⁻¹" is also accepted."""
        letters = []
        for tok in text.replace("*", " ").split():
            if tok in ("1", "e", "id"):
                continue
            m = _LETTER.fullmatch(tok)
            if not m:
                raise ValueError(f"bad letter {tok!r}")
            e = -1 if m.group(3) else int(m.group(2) or 1)
            letters.append((m.group(1), e))
        return cls(tuple(letters))

    def __len__(self):
        return sum(abs(e) for _, e in self.letters)

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        return GroupWord(self.letters + other.letters)

    def inverse(self) -> "GroupWord":
        return GroupWord(tuple((n, -e) for n, e in reversed(self.letters)))

    def __pow__(self, n: int) -> "GroupWord":
        base = self if n >= 0 else self.inverse()
        return GroupWord(base.letters * abs(n))

    def conjugate_by(self, g: "GroupWord") -> "GroupWord":
        """g self g⁻¹."""
        return g * self * g.inverse()

    @property
    def names(self):
        return {n for n, _ in self.letters}

    def __str__(self):
        if not self.letters:
            return "1"
        return " ".join(n if e == 1 else f"{n}^{e}" for n, e in self.letters)


def word_map(w: GroupWord, gens: Mapping[str, PLHomeo]) -> PLHomeo:
    missing = w.names - set(gens)
    if missing:
        raise KeyError(f"unbound generator(s): {sorted(missing)}")
    result = identity()
    for name, e in reversed(w.letters):
        g = gens[name] if e > 0 else invert(gens[name])
        for _ in range(abs(e)):
            result = compose(g, result)
    return result


def evaluate_word(w: GroupWord, gens: Mapping[str, PLHomeo], x) -> Fraction:
    """Image of x under w; the rightmost letter acts first."""
    missing = w.names - set(gens)
    if missing:
        raise KeyError(f"unbound generator(s): {sorted(missing)}")
    x = as_rational(x)
    for name, e in reversed(w.letters):
        g = gens[name]
        for _ in range(abs(e)):
            x = evaluate(g, x) if e > 0 else g.inverse_at(x)
    return x


def _alphabet(gens: Mapping[str, PLHomeo]):
    return [(n, s) for n in sorted(gens) for s in (1, -1)]


def enumerate_words(names: Sequence[str], max_len: int) -> Iterator[GroupWord]:
    """Reduced words of length 1..max_len, length-lexicographic.

    Letters are ordered by generator name, positive before inverse.
    """
    alphabet = [(n, s) for n in sorted(names) for s in (1, -1)]

    def extend(prefix, remaining):
        if remaining == 0:
            yield GroupWord(tuple(prefix))
            return
        for n, s in alphabet:
            if prefix and prefix[-1] == (n, -s):
                continue
            prefix.append((n, s))
            yield from extend(prefix, remaining - 1)
            prefix.pop()

    for length in range(1, max_len + 1):
        yield from extend([], length)


def enumerate_elements(gens: Mapping[str, PLHomeo], max_len: int):
    """Distinct group elements of word length <= max_len, each with its
    length-lex first word. Returns a list of (GroupWord, PLHomeo), identity
    (empty word) first.

    Breadth-first; a layer is extended by appending letters on the right, so
    deduplicating within the lex-ordered layer keeps the first word.
    """
    alphabet = _alphabet(gens)
    letter_maps = {(n, s): (gens[n] if s > 0 else invert(gens[n])) for n, s in alphabet}
    seen = {identity()}
    layer = [((), identity())]
    out = [(GroupWord(), identity())]
    for _ in range(max_len):
        nxt = []
        for letters, m in layer:
            for n, s in alphabet:
                if letters and letters[-1] == (n, -s):
                    continue
                new = compose(m, letter_maps[(n, s)])
                if new in seen:
                    continue
                seen.add(new)
                nxt.append((letters + ((n, s),), new))
        out.extend((GroupWord(w), m) for w, m in nxt)
        layer = nxt
    return out


def _word_layers(gens: Mapping[str, PLHomeo], depth: int):
    """All reduced words of each exact length <= depth (not deduplicated).

    Layer k is a list of (letters, map) in lexicographic order; letters are
    (name, ±1) pairs and the map is the composite with the rightmost letter
    acting first.
    """
    alphabet = _alphabet(gens)
    letter_maps = {(n, s): (gens[n] if s > 0 else invert(gens[n])) for n, s in alphabet}
    layers = [[((), identity())]]
    for _ in range(depth):
        layer = []
        for letters, m in layers[-1]:
            for n, s in alphabet:
                if letters and letters[-1] == (n, -s):
                    continue
                layer.append((letters + ((n, s),), compose(m, letter_maps[(n, s)])))
        layers.append(layer)
    return layers


def find_relation(gens: Mapping[str, PLHomeo], max_len: int) -> Optional[GroupWord]:
    """Length-lex first nontrivial reduced word equal to the identity.

    A semi-decision: ``None`` only means no relation of length <= max_len.
    Meet in the middle: a word u·v of length L is trivial iff map(v) equals
    map(u)⁻¹, so only words up to length ceil(L/2) are ever composed.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    layers = _word_layers(gens, (max_len + 1) // 2)
    for length in range(1, max_len + 1):
        head = (length + 1) // 2
        tail = length - head
        index: dict = {}
        for letters, m in layers[tail]:
            index.setdefault(m, []).append(letters)
        for u, mu in layers[head]:
            for v in index.get(invert(mu), ()):
                if v and u[-1] == (v[0][0], -v[0][1]):
                    continue
                return GroupWord(u + v)
    return None
