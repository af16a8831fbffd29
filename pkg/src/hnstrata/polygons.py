"""Numerical classes (rank, degree), HN types, and their polygon geometry.

A class alpha = (r, d) lies in the positive cone when r >= 1, or r == 0 and
d > 0.  An HN type is a nonempty sequence of cone classes with strictly
increasing slopes (degree/rank, infinite for rank 0, so a rank-0 part can
only sit at the end).  Drawn as a lattice path of cumulative sums from the
origin, an HN type is a convex polygon: ranks on the x-axis, degrees on the
y-axis, lower degree lower.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple


class KClass(NamedTuple):
    r: int
    d: int

    @property
    def slope(self) -> Fraction:
        if self.r == 0:
            raise ZeroDivisionError("slope of a rank-0 class is infinite")
        return Fraction(self.d, self.r)

    def in_cone(self) -> bool:
        return self.r >= 1 or (self.r == 0 and self.d > 0)

    def __add__(self, other):
        return KClass(self.r + other.r, self.d + other.d)

    def __sub__(self, other):
        return KClass(self.r - other.r, self.d - other.d)


def euler_form(x: KClass, y: KClass, g: int) -> int:
    """Euler pairing <x, y> = (1-g) r_x r_y + (r_x d_y - r_y d_x)."""
    return (1 - g) * x.r * y.r + (x.r * y.d - y.r * x.d)


def slope_key(c: KClass):
    """Totally ordered key for slopes; rank-0 classes sort as +infinity."""
    if c.r == 0:
        return (1, Fraction(0))
    return (0, c.slope)


@dataclass(frozen=True)
class HNType:
    parts: tuple

    def __post_init__(self):
        parts = tuple(KClass(*p) for p in self.parts)
        object.__setattr__(self, "parts", parts)
        if not parts:
            raise ValueError("an HN type needs at least one part")
        for p in parts:
            if not p.in_cone():
                raise ValueError(f"part {p} is outside the positive cone")
        for a, b in zip(parts, parts[1:]):
            if a.r == 0:
                raise ValueError("rank-0 part must be last")
            if b.r != 0 and not a.slope < b.slope:
                raise ValueError(f"slopes not strictly increasing at {a}, {b}")

    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)

    @property
    def weight(self) -> KClass:
        r = sum(p.r for p in self.parts)
        d = sum(p.d for p in self.parts)
        return KClass(r, d)

    def is_vector_type(self) -> bool:
        return self.parts[-1].r != 0

    def vertices(self):
        """Cumulative lattice points, origin first."""
        pts = [KClass(0, 0)]
        for p in self.parts:
            pts.append(pts[-1] + p)
        return pts

    def sort_key(self):
        return (len(self.parts), self.parts)


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


@functools.lru_cache(maxsize=None)
def _tails(r: int, d: int, bound: Fraction, strict: bool):
    """All part sequences of total (r, d) whose slopes exceed (or meet) bound.

    Slopes are strictly increasing inside each sequence; a trailing rank-0
    part absorbs all leftover degree.  Memoized on (remaining weight, bound).
    """
    if r == 0:
        if d == 0:
            return ((),)
        if d > 0:
            return (((0, d),),)
        return ()
    out = []
    for r1 in range(1, r + 1):
        lo = _floor(r1 * bound) + 1 if strict else _ceil(r1 * bound)
        if r1 < r:
            # first slope must stay below the slope of what remains
            hi = _ceil(Fraction(r1 * d, r)) - 1
        else:
            hi = d
        for d1 in range(lo, hi + 1):
            first = (r1, d1)
            for tail in _tails(r - r1, d - d1, Fraction(d1, r1), True):
                out.append((first,) + tail)
    return tuple(out)


def enumerate_hn_types(weight: KClass, n_min, vec_only: bool = False):
    """All HN types of the given weight with first slope >= n_min.

    With vec_only, types ending in a rank-0 part are excluded.  The result
    is finite and sorted canonically (by length, then parts).
    """
    weight = KClass(*weight)
    if not weight.in_cone():
        raise ValueError(f"weight {weight} is outside the positive cone")
    n_min = Fraction(n_min)
    if weight.r == 0:
        # all torsion merges into a single part of infinite slope
        return [] if vec_only else [HNType(((0, weight.d),))]
    types = [HNType(seq) for seq in _tails(weight.r, weight.d, n_min, False)]
    if vec_only:
        types = [t for t in types if t.is_vector_type()]
    return sorted(types, key=HNType.sort_key)


def hn_gap_threshold(weight: KClass, g: int) -> int:
    """Level below which every HN type of this weight has a slope gap > 2(g-1).

    Any type with first slope below the returned value has two consecutive
    slopes (counting the infinite slope of a torsion part) differing by more
    than 2(g-1).
    """
    weight = KClass(*weight)
    if weight.r < 1:
        raise ValueError("threshold needs rank >= 1 (finite slope)")
    if g < 2:
        raise ValueError("threshold argument needs g >= 2")
    return _floor(weight.slope) - (g - 1) * weight.r * (weight.r + 1)


def _polygon_height(t: HNType, x: int) -> Fraction:
    """Lowest y-coordinate of the polygon of t at abscissa x."""
    prev = KClass(0, 0)
    for p in t.parts:
        if p.r == 0:
            break
        nxt = prev + p
        if x <= nxt.r:
            return prev.d + Fraction(p.d * (x - prev.r), p.r)
        prev = nxt
    if x == prev.r:
        return Fraction(prev.d)
    raise ValueError(f"abscissa {x} out of range for weight {t.weight}")


def polygon_lies_above(point: KClass, t: HNType) -> bool:
    """True iff the point sits on or above the polygon of t at its abscissa."""
    point = KClass(*point)
    if not 0 <= point.r <= t.weight.r:
        raise ValueError(f"abscissa {point.r} out of range")
    return point.d >= _polygon_height(t, point.r)


def passes_through(t: HNType, point: KClass) -> bool:
    """True iff the polygon path of t contains the lattice point."""
    point = KClass(*point)
    w = t.weight
    if not 0 <= point.r <= w.r:
        return False
    if point.r == w.r:
        # vertical segment of the torsion part, if any
        base = sum(p.d for p in t.parts if p.r != 0)
        return base <= point.d <= w.d
    return point.d == _polygon_height(t, point.r)


def slope_gap_at(t: HNType, point: KClass):
    """Slope gap of the polygon of t at the given point.

    Returns None for an infinite gap (next part of rank 0), a Fraction if
    the point is an interior vertex or interior to a segment (gap 0), and
    raises if the point is not on the path or is an endpoint.
    """
    point = KClass(*point)
    verts = t.vertices()
    if point == verts[0] or point == verts[-1]:
        raise ValueError("gap undefined at the endpoints of the polygon")
    for i in range(1, len(verts) - 1):
        if verts[i] == point:
            before, after = t.parts[i - 1], t.parts[i]
            if after.r == 0:
                return None
            return after.slope - before.slope
    if passes_through(t, point):
        return Fraction(0)
    raise ValueError(f"{point} is not on the polygon of {t}")


def _cross(o, a, b):
    return (a.r - o.r) * (b.d - o.d) - (a.d - o.d) * (b.r - o.r)


def lower_convex_hull(types) -> HNType:
    """Lower hull of the polygon vertices of a nonempty set of HN types.

    All types must share one weight; the hull is returned as an HN type of
    that weight (a trailing rank-0 part closes any vertical gap at the end).
    """
    types = list(types)
    if not types:
        raise ValueError("hull of an empty set")
    weight = types[0].weight
    for t in types:
        if t.weight != weight:
            raise ValueError(f"mixed weights {weight} and {t.weight}")
    best = {}
    for t in types:
        for v in t.vertices():
            if v.r not in best or v.d < best[v.r]:
                best[v.r] = v.d
    pts = [KClass(r, best[r]) for r in sorted(best)]
    hull = []
    for p in pts:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) <= 0:
            hull.pop()
        hull.append(p)
    parts = [b - a for a, b in zip(hull, hull[1:])]
    if hull[-1].d < weight.d:
        parts.append(KClass(0, weight.d - hull[-1].d))
    return HNType(tuple(parts))


def stratum_codim(t: HNType, g: int) -> int:
    """Codimension of the stratum of HN type t: sum_{i<j} -<a_j, a_i>."""
    total = 0
    parts = t.parts
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            total -= euler_form(parts[j], parts[i], g)
    return total


def stack_dim(weight: KClass, g: int) -> int:
    """Dimension -<alpha, alpha> = (g-1) r^2 of the whole class-alpha stack."""
    weight = KClass(*weight)
    return (g - 1) * weight.r * weight.r
