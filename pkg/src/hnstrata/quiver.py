"""Slope stability for acyclic quivers: finite HN recursion and brute force.

A stability parameter assigns a weight to each vertex; the slope of a
nonzero dimension vector is (weights . d) / (total dimension).  Dimension
vectors decompose into finitely many HN types, so the semistable volume
comes out of the representation-variety volume by a finite recursion; an
exhaustive matrix-tuple oracle over F_2/F_3 pins every sign and ordering
convention.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction

from .scalars import gl_order

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib


@dataclass(frozen=True)
class Quiver:
    vertices: int
    arrows: tuple

    def __post_init__(self):
        arrows = tuple((int(s), int(t)) for s, t in self.arrows)
        object.__setattr__(self, "arrows", arrows)
        for s, t in arrows:
            if not (0 <= s < self.vertices and 0 <= t < self.vertices):
                raise ValueError(f"arrow ({s},{t}) leaves the vertex range")
        # Kahn peeling; anything left over sits on an oriented cycle
        indeg = [0] * self.vertices
        for _, t in arrows:
            indeg[t] += 1
        queue = [v for v in range(self.vertices) if indeg[v] == 0]
        seen = 0
        while queue:
            v = queue.pop()
            seen += 1
            for s, t in arrows:
                if s == v:
                    indeg[t] -= 1
                    if indeg[t] == 0:
                        queue.append(t)
        if seen != self.vertices:
            raise ValueError("quiver has an oriented cycle")


def load_quiver(path):
    """Read (quiver, stability parameter) from TOML: vertices, arrows, theta."""
    with open(path, "rb") as fh:
        obj = tomllib.load(fh)
    try:
        quiver = Quiver(int(obj["vertices"]), tuple(tuple(a) for a in obj["arrows"]))
        theta = tuple(Fraction(x) for x in obj["theta"])
    except KeyError as exc:
        raise ValueError(f"quiver file {path} is missing key {exc}") from exc
    if len(theta) != quiver.vertices:
        raise ValueError("theta length differs from the vertex count")
    return quiver, theta


def quiver_euler_form(Q: Quiver, d, e) -> int:
    """<d, e> = sum_i d_i e_i - sum_{arrows i->j} d_i e_j."""
    if len(d) != Q.vertices or len(e) != Q.vertices:
        raise ValueError("dimension vector length differs from the vertex count")
    out = sum(x * y for x, y in zip(d, e))
    for s, t in Q.arrows:
        out -= d[s] * e[t]
    return out


def slope(theta, d) -> Fraction:
    total = sum(d)
    if total == 0:
        raise ZeroDivisionError("slope of the zero dimension vector")
    return Fraction(sum(Fraction(x) * y for x, y in zip(theta, d)), 1) / total


def _sub_vectors(d):
    """Nonzero vectors e <= d componentwise, in lexicographic order."""
    ranges = [range(x + 1) for x in d]
    for e in itertools.product(*ranges):
        if any(e):
            yield e


def enumerate_hn_types_quiver(d, theta):
    """All tuples of nonzero dimension vectors summing to d with strictly
    increasing slope; finite because parts are componentwise bounded."""
    d = tuple(d)
    if not any(d):
        raise ValueError("dimension vector must be nonzero")
    out = []

    def rec(remaining, bound, acc):
        if not any(remaining):
            out.append(tuple(acc))
            return
        for e in _sub_vectors(remaining):
            mu = slope(theta, e)
            if bound is not None and not mu > bound:
                continue
            acc.append(e)
            rec(tuple(x - y for x, y in zip(remaining, e)), mu, acc)
            acc.pop()

    rec(d, None, [])
    return sorted(out)


def vol_rep(Q: Quiver, d, q: int) -> Fraction:
    """Stacky count of all representations: q^(arrow cells) / #(gauge group)."""
    cells = sum(d[s] * d[t] for s, t in Q.arrows)
    denom = 1
    for n in d:
        denom *= gl_order(n, q)
    return Fraction(q ** cells, denom)


def _pairwise_euler(Q, parts):
    total = 0
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            total += quiver_euler_form(Q, parts[i], parts[j])
    return total


def vol_ss_quiver(Q: Quiver, theta, d, q: int) -> Fraction:
    """Semistable volume by the finite HN recursion.

    vol_rep(d) = sum over HN types of q^(-pairwise Euler) prod vol_ss(part),
    solved for the one-part term; parts of proper types are componentwise
    smaller, so the recursion terminates.
    """
    theta = tuple(Fraction(x) for x in theta)
    return _vol_ss_memo(Q, theta, tuple(d), q)


@functools.lru_cache(maxsize=None)
def _vol_ss_memo(Q, theta, d, q):
    total = vol_rep(Q, d, q)
    for t in enumerate_hn_types_quiver(d, theta):
        if len(t) < 2:
            continue
        term = Fraction(1, q) ** _pairwise_euler(Q, t)
        for part in t:
            term *= _vol_ss_memo(Q, theta, part, q)
        total -= term
    return total


def reineke_vol_ss_quiver(Q: Quiver, theta, d, q: int) -> Fraction:
    """Semistable volume through the finite alternating inversion.

    Sums (-1)^(s-1) q^(-pairwise Euler) prod vol_rep(b_i) over the tuples of
    nonzero dimension vectors summing to d whose proper suffix sums all have
    slope strictly above slope(d); mutually inverse to the HN expansion.
    """
    d = tuple(d)
    theta = tuple(Fraction(x) for x in theta)
    mu = slope(theta, d)
    total = Fraction(0)

    def rec(remaining, factors):
        nonlocal total
        if not any(remaining):
            s = len(factors)
            term = Fraction(-1) ** (s - 1) * Fraction(1, q) ** _pairwise_euler(Q, factors)
            for b in factors:
                term *= vol_rep(Q, b, q)
            total += term
            return
        for b in _sub_vectors(remaining):
            # b becomes the factor before the current ones: the suffix formed
            # by the factors chosen so far must sit strictly above slope(d)
            if factors:
                suffix = tuple(sum(x) for x in zip(*factors))
                if not slope(theta, suffix) > mu:
                    continue
            rec(tuple(x - y for x, y in zip(remaining, b)), (b,) + factors)

    rec(d, ())
    return total


# --- exhaustive oracle over tiny fields --------------------------------------

@functools.lru_cache(maxsize=None)
def _all_vectors(q, n):
    return tuple(itertools.product(range(q), repeat=n))


@functools.lru_cache(maxsize=None)
def _subspaces(q, n):
    """All subspaces of F_q^n as frozensets of vectors (q prime)."""
    vecs = _all_vectors(q, n)
    found = {frozenset({(0,) * n})}
    for gens in itertools.chain.from_iterable(
            itertools.combinations(vecs[1:], k) for k in range(1, n + 1)):
        span = set()
        for coeffs in itertools.product(range(q), repeat=len(gens)):
            v = tuple(sum(c * g[i] for c, g in zip(coeffs, gens)) % q for i in range(n))
            span.add(v)
        found.add(frozenset(span))
    return tuple(sorted(found, key=lambda s: (len(s), sorted(s))))


def _apply(mat, vec, q):
    return tuple(sum(row[j] * vec[j] for j in range(len(vec))) % q for row in mat)


def brute_force(Q: Quiver, theta, d, q: int):
    """Exhaustive stacky counts: (semistable volume, stratum volume per type).

    Enumerates every matrix tuple, finds each representation's HN type by
    repeatedly taking the subrepresentation of maximal slope (then maximal
    total dimension; the choice is unique and asserted), and divides the
    counts by the gauge group order.  Guarded to <= 16 matrix entries and
    q <= 3.
    """
    d = tuple(d)
    theta = tuple(Fraction(x) for x in theta)
    cells = sum(d[s] * d[t] for s, t in Q.arrows)
    if cells > 16 or q > 3:
        raise ValueError("brute force guard: too many matrix entries or q > 3")
    group = 1
    for n in d:
        group *= gl_order(n, q)

    spaces = [_subspaces(q, n) for n in d]
    zero = tuple(frozenset({(0,) * n}) for n in d)
    full = tuple(frozenset(_all_vectors(q, n)) for n in d)

    counts = {}
    shapes = [(d[t], d[s]) for s, t in Q.arrows]
    all_mats = [list(itertools.product(
        [tuple(row) for row in itertools.product(range(q), repeat=cols)],
        repeat=rows)) for rows, cols in shapes]
    for mats in itertools.product(*all_mats):
        subreps = []
        for cand in itertools.product(*spaces):
            ok = True
            for a, (s, t) in enumerate(Q.arrows):
                for v in cand[s]:
                    if _apply(mats[a], v, q) not in cand[t]:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                subreps.append(cand)
        # greedy HN chain: maximal-slope, then maximal-dimension subrep above
        # the current one; slopes of the quotient parts strictly decrease
        current = zero
        parts = []
        while current != full:
            best = None
            for cand in subreps:
                if cand == current or not all(c >= u for c, u in zip(cand, current)):
                    continue
                part = tuple(_log_dim(len(c), q) - _log_dim(len(u), q)
                             for c, u in zip(cand, current))
                key = (slope(theta, part), sum(part))
                if best is None or key > best[0]:
                    best = (key, [cand], part)
                elif key == best[0]:
                    best[1].append(cand)
            if best is None or len(best[1]) != 1:
                raise RuntimeError("destabilizing subrepresentation is not unique")
            parts.append(best[2])
            current = best[1][0]
        t = tuple(reversed(parts))
        counts[t] = counts.get(t, 0) + 1

    strata = {t: Fraction(n, group) for t, n in sorted(counts.items())}
    d_type = (d,)
    return strata.get(d_type, Fraction(0)), strata


def _log_dim(size: int, q: int) -> int:
    n = 0
    while q ** n < size:
        n += 1
    if q ** n != size:
        raise ValueError("subspace size is not a power of q")
    return n