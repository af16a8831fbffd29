"""Fully explicit model of coherent sheaves on the projective line over F_q.

A sheaf is a splitting type (weakly decreasing line-bundle degrees) plus a
torsion part: a map from closed points to partitions.  Closed points are
abstract tokens (degree, index) counted by the rational-curve zeta datum;
no polynomial factorization happens, only counts and degrees enter any
formula.  Hom and Ext dimensions, automorphism orders, HN types, embedding
counts and stratum volumes are all computed from this data, giving ground
truth for everything the counting modules produce.

Large torsion budgets are handled by grouping isomorphism classes that
differ only in which same-degree points carry which partitions; the group
sizes are multinomial coefficients over the point count, and every class
is still measured through an explicit representative sheaf.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import NamedTuple

from .curves import closed_points, p1_datum, _partitions
from .polygons import HNType, KClass
from .scalars import gl_order


class ClosedPoint(NamedTuple):
    degree: int
    index: int


@dataclass(frozen=True)
class P1Sheaf:
    splitting: tuple
    torsion: tuple  # ((degree, index), partition) pairs, canonically sorted

    def __post_init__(self):
        split = tuple(sorted((int(a) for a in self.splitting), reverse=True))
        tor = []
        seen = set()
        for pt, lam in self.torsion:
            pt = ClosedPoint(*pt)
            lam = tuple(sorted((int(x) for x in lam), reverse=True))
            if pt in seen:
                raise ValueError(f"duplicate torsion point {pt}")
            if pt.degree < 1 or pt.index < 0:
                raise ValueError(f"bad closed point {pt}")
            if not lam or lam[-1] < 1:
                raise ValueError("torsion partitions must be nonempty and positive")
            seen.add(pt)
            tor.append((pt, lam))
        tor.sort()
        object.__setattr__(self, "splitting", split)
        object.__setattr__(self, "torsion", tuple(tor))

    @property
    def rank(self) -> int:
        return len(self.splitting)

    @property
    def torsion_degree(self) -> int:
        return sum(pt.degree * sum(lam) for pt, lam in self.torsion)

    @property
    def degree(self) -> int:
        return sum(self.splitting) + self.torsion_degree

    def klass(self) -> KClass:
        return KClass(self.rank, self.degree)

    def twist(self, n: int) -> "P1Sheaf":
        return P1Sheaf(tuple(a + n for a in self.splitting), self.torsion)

    def is_zero(self) -> bool:
        return not self.splitting and not self.torsion


def line_bundle(a: int) -> P1Sheaf:
    return P1Sheaf((a,), ())


@functools.lru_cache(maxsize=None)
def _conjugate(lam):
    if not lam:
        return ()
    return tuple(sum(1 for x in lam if x > i) for i in range(lam[0]))


def hom_dim(F: P1Sheaf, G: P1Sheaf) -> int:
    """F_q-dimension of Hom(F, G).

    Blocks: hom(O(a), O(b)) = max(0, b-a+1); hom(O(a), T) = deg T;
    hom(T, O(a)) = 0; same-point torsion pairs overlap through conjugate
    partitions, scaled by the point degree.
    """
    total = 0
    for a in F.splitting:
        for b in G.splitting:
            total += max(0, b - a + 1)
    total += F.rank * G.torsion_degree
    tg = dict(G.torsion)
    for pt, lam in F.torsion:
        mu = tg.get(pt)
        if mu is None:
            continue
        lc, mc = _conjugate(lam), _conjugate(mu)
        total += pt.degree * sum(x * y for x, y in zip(lc, mc))
    return total


def ext_dim(F: P1Sheaf, G: P1Sheaf) -> int:
    """Ext^1(F, G) by duality on the rational curve: hom(G, F(-2))."""
    return hom_dim(G, F.twist(-2))


def aut_order(F: P1Sheaf, q: int) -> int:
    """#Aut(F) = q^(dim of the radical of End) * prod GL_m over the blocks.

    Blocks are the distinct indecomposable summands: a line-bundle degree
    with multiplicity m contributes GL_m(q); a length-j torsion summand at a
    degree-e point with multiplicity m contributes GL_m(q^e).
    """
    blocks = []
    for a, group in itertools.groupby(F.splitting):
        blocks.append((1, len(list(group))))
    for pt, lam in F.torsion:
        for j, group in itertools.groupby(lam):
            blocks.append((pt.degree, len(list(group))))
    semisimple = sum(e * m * m for e, m in blocks)
    rad = hom_dim(F, F) - semisimple
    out = q ** rad
    for e, m in blocks:
        out *= gl_order(m, q ** e)
    return out


def hn_type_of(F: P1Sheaf) -> HNType:
    """HN type read off the splitting: equal degrees grouped, torsion last."""
    if F.is_zero():
        raise ValueError("the zero sheaf has no HN type")
    parts = []
    for a, group in itertools.groupby(sorted(F.splitting)):
        m = len(list(group))
        parts.append((m, m * a))
    t = F.torsion_degree
    if t:
        parts.append((0, t))
    return HNType(tuple(parts))


# --- enumeration -------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def point_count(q: int, e: int) -> int:
    return closed_points(p1_datum(q), e)


@functools.lru_cache(maxsize=None)
def torsion_configs(q: int, t: int):
    """All torsion parts of degree exactly t, as explicit point->partition maps.

    Materializes every class individually; meant for small budgets (tests,
    embedding counts).  Use torsion_census for large ones.
    """
    if t == 0:
        return ((),)
    pts = [ClosedPoint(e, i) for e in range(1, t + 1) for i in range(point_count(q, e))]
    out = []

    def rec(start, budget, acc):
        if budget == 0:
            out.append(tuple(acc))
            return
        for j in range(start, len(pts)):
            pt = pts[j]
            if pt.degree > budget:
                continue
            for m in range(1, budget // pt.degree + 1):
                for lam in _partitions(m):
                    acc.append((pt, lam))
                    rec(j + 1, budget - pt.degree * m, acc)
                    acc.pop()

    rec(0, t, [])
    return tuple(out)


def _splittings(r: int, d_max: int, min_deg: int, cap=None):
    """Weakly decreasing r-tuples with entries in [min_deg, cap] summing <= d_max."""
    if r == 0:
        yield ()
        return
    hi = d_max - (r - 1) * min_deg
    if cap is not None:
        hi = min(hi, cap)
    for a in range(hi, min_deg - 1, -1):
        for rest in _splittings(r - 1, d_max - a, min_deg, a):
            yield (a,) + rest


def enumerate_sheaves(q: int, r: int, d: int, min_deg: int):
    """All isomorphism classes of class (r, d) with splitting degrees >= min_deg.

    The torsion degree is then at most d - r*min_deg; the list is finite and
    duplicate-free.  Rank 0 gives the torsion classes of degree d.
    """
    if r < 0:
        raise ValueError("rank must be >= 0")
    out = []
    if r == 0:
        if d < 0:
            return []
        return [P1Sheaf((), cfg) for cfg in torsion_configs(q, d)]
    for split in _splittings(r, d, min_deg):
        t = d - sum(split)
        for cfg in torsion_configs(q, t):
            out.append(P1Sheaf(split, cfg))
    return out


# --- grouped torsion census for large budgets --------------------------------

@functools.lru_cache(maxsize=None)
def torsion_census(q: int, t: int):
    """Isomorphism classes of degree-t torsion grouped by point symmetry.

    Returns (ways, representative) pairs: `representative` is one concrete
    torsion part, and `ways` counts the classes obtained by redistributing
    its partitions over same-degree points (a product of binomials over the
    point counts).  Summing ways recovers len(torsion_configs(q, t)); the
    automorphism order is constant within a group.
    """
    if t == 0:
        return ((1, ()),)
    out = []
    # partitions usable at degree e, ordered by weight so scans can break early
    plists = {e: [lam for m in range(1, t // e + 1) for lam in _partitions(m)]
              for e in range(1, t + 1)}

    def per_degree(e, budget, ways, rep):
        if budget == 0:
            out.append((ways, rep))
            return
        if e > budget:
            return
        pick(e, point_count(q, e), plists[e], 0, 0, budget, ways, rep)

    def pick(e, b, plist, idx0, used, budget, ways, rep):
        # close degree e with the multiset chosen so far
        per_degree(e + 1, budget, ways, rep)
        for idx in range(idx0, len(plist)):
            lam = plist[idx]
            lw = e * sum(lam)
            if lw > budget:
                break
            if used >= b:
                break
            kmax = min(b - used, budget // lw)
            for k in range(1, kmax + 1):
                extra = tuple((ClosedPoint(e, used + j), lam) for j in range(k))
                pick(e, b, plist, idx + 1, used + k, budget - k * lw,
                     ways * comb(b - used, k), rep + extra)

    per_degree(1, t, 1, ())
    return tuple(out)


def _bundle_plus_torsion_mass(q: int, split, t: int) -> Fraction:
    """Sum of 1/#Aut over all sheaves with fixed splitting and torsion degree t."""
    if not split or t <= 8:
        total = Fraction(0)
        for ways, rep in torsion_census(q, t):
            total += Fraction(ways, aut_order(P1Sheaf(split, rep), q))
        return total
    aut_v = aut_order(P1Sheaf(split, ()), q)
    return Fraction(1, aut_v * q ** (len(split) * t)) * _census_mass(q, t)


def window_volume(q: int, r: int, d: int, min_deg: int) -> Fraction:
    """Sum of 1/#Aut over the enumerate_sheaves window, via the census."""
    total = Fraction(0)
    for split in (_splittings(r, d, min_deg) if r else [()]):
        t = d - sum(split)
        total += _bundle_plus_torsion_mass(q, split, t)
    return total


@functools.lru_cache(maxsize=None)
def _point_aut(q: int, e: int, lam) -> int:
    return aut_order(P1Sheaf((), ((ClosedPoint(e, 0), lam),)), q)


@functools.lru_cache(maxsize=None)
def _census_mass(q: int, t: int) -> Fraction:
    """Sum of ways/#Aut over the degree-t torsion census (pure torsion).

    Distinct points never interact through Hom, so #Aut of a torsion sheaf
    is the product of the single-point orders, which are cached.
    """
    total = Fraction(0)
    for ways, rep in torsion_census(q, t):
        aut = 1
        for pt, lam in rep:
            aut *= _point_aut(q, pt.degree, lam)
        total += Fraction(ways, aut)
    return total


def vol_stratum_direct(t: HNType, q: int, max_torsion: int = 20) -> Fraction:
    """Counting-measure volume of one HN stratum by direct enumeration.

    On the rational curve a semistable bundle exists only at integer slope
    (a power of one line bundle), so the bundle part of the stratum is a
    single sheaf and only the torsion part varies.  Small torsion budgets
    assemble every sheaf explicitly; larger ones reuse the cached torsion
    census mass through #Aut(V + T) = #Aut(V) #Aut(T) q^(rank * tordeg),
    which is how aut_order computes anyway (Hom dimensions are additive
    over the bundle/torsion blocks).  Guarded by rank and torsion budget:
    oversized strata are refused rather than approximated.
    """
    split = []
    tdeg = 0
    for p in t.parts:
        if p.r == 0:
            tdeg = p.d
            continue
        if p.d % p.r:
            return Fraction(0)  # no semistable splitting at fractional slope
        split.extend([p.d // p.r] * p.r)
    if t.weight.r > 3:
        raise ValueError("stratum volume oracle is limited to rank <= 3")
    if tdeg > max_torsion:
        raise ValueError(f"torsion budget {tdeg} exceeds the oracle guard {max_torsion}")
    split = tuple(sorted(split, reverse=True))
    r = len(split)
    if r == 0 or tdeg <= 8:
        total = Fraction(0)
        for ways, rep in torsion_census(q, tdeg):
            total += Fraction(ways, aut_order(P1Sheaf(split, rep), q))
        return total
    aut_v = aut_order(P1Sheaf(split, ()), q)
    return Fraction(1, aut_v * q ** (r * tdeg)) * _census_mass(q, tdeg)


# --- embedding counts --------------------------------------------------------

def count_embeddings(a: int, F: P1Sheaf, q: int) -> int:
    """Number of subsheaf embeddings of O(a) into F.

    A map is injective exactly when its bundle component is nonzero, so the
    count is q^hom(O(a), F) - q^hom(O(a), T_F).
    """
    h = hom_dim(line_bundle(a), F)
    return q ** h - q ** F.torsion_degree


def count_embeddings_exhaustive(a: int, F: P1Sheaf, q: int) -> int:
    """Embedding count by enumerating every concrete map coefficient tuple.

    The component to O(b) is a polynomial of degree b - a (a coefficient
    vector of length max(0, b-a+1)); components into torsion summands are
    free parameters.  A tuple is an embedding iff some polynomial component
    is nonzero: a nonzero map between line bundles is injective, a map
    through the torsion part never is.
    """
    vec_dims = sum(max(0, b - a + 1) for b in F.splitting)
    tor_dims = hom_dim(line_bundle(a), P1Sheaf((), F.torsion))
    count = 0
    for coeffs in itertools.product(range(q), repeat=vec_dims + tor_dims):
        if any(coeffs[:vec_dims]):
            count += 1
    return count
