"""Stratum-basis calculus for characteristic functions of HN strata.

An element of weight alpha truncated at level n is a finite map from HN
types (weight alpha, first slope >= n) to Laurent coefficients.  In this
basis the strata functions 1_S are the unit vectors, and the conversion to
slope-ordered products of semistable factors is diagonal with monomial
entries (strata_to_product), so Hall structure constants are never needed.

Under the counting measure (sum of 1/#Aut) a stratum function evaluates to
q^(-sum of pairwise Euler pairings of its parts) times the product of the
semistable volumes of the parts; integrate() computes that against a volume
table.  hn_projector keeps exactly the strata whose polygon passes through
a hull vertex with slope gap > 2(g-1), and peel() applies it repeatedly to
strip everything below the gap threshold, emitting a replayable certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .polygons import (
    HNType,
    KClass,
    enumerate_hn_types,
    euler_form,
    hn_gap_threshold,
    lower_convex_hull,
    passes_through,
    slope_gap_at,
)
from .scalars import Laurent, SqrtExt, eval_sqrt_q, q_power


def _first_slope_ok(t: HNType, level: Fraction) -> bool:
    head = t.parts[0]
    return head.r == 0 or head.slope >= level


class HallElement:
    """Finitely supported map HN type -> Laurent, of one weight and level."""

    __slots__ = ("weight", "level", "coeffs")

    def __init__(self, weight, level, coeffs=None):
        self.weight = KClass(*weight)
        self.level = Fraction(level)
        c = {}
        for t, co in (coeffs or {}).items():
            if not isinstance(co, Laurent):
                co = Laurent.monomial(co, 0)
            if co.is_zero():
                continue
            if t.weight != self.weight:
                raise ValueError(f"type {t.parts} has weight {t.weight}, expected {self.weight}")
            if not _first_slope_ok(t, self.level):
                raise ValueError(f"type {t.parts} falls below level {self.level}")
            c[t] = co
        self.coeffs = c

    @classmethod
    def semistable_unit(cls, weight, level=None) -> "HallElement":
        """The unit vector on the semistable stratum of the given weight."""
        weight = KClass(*weight)
        t = HNType((tuple(weight),))
        if level is None:
            level = 0 if weight.r == 0 else weight.slope
        return cls(weight, level, {t: Laurent.one()})

    def support(self):
        return sorted(self.coeffs, key=HNType.sort_key)

    def coeff(self, t: HNType) -> Laurent:
        return self.coeffs.get(t, Laurent.zero())

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if not isinstance(other, HallElement):
            return NotImplemented
        return self.weight == other.weight and self.coeffs == other.coeffs

    def __add__(self, other):
        if not isinstance(other, HallElement):
            return NotImplemented
        if other.weight != self.weight:
            raise ValueError("weights differ")
        c = dict(self.coeffs)
        for t, co in other.coeffs.items():
            s = c.get(t, Laurent.zero()) + co
            if s.is_zero():
                c.pop(t, None)
            else:
                c[t] = s
        return HallElement(self.weight, min(self.level, other.level), c)

    def __sub__(self, other):
        if not isinstance(other, HallElement):
            return NotImplemented
        if other.weight != self.weight:
            raise ValueError("weights differ")
        c = dict(self.coeffs)
        for t, co in other.coeffs.items():
            s = c.get(t, Laurent.zero()) - co
            if s.is_zero():
                c.pop(t, None)
            else:
                c[t] = s
        return HallElement(self.weight, min(self.level, other.level), c)

    def restrict(self, keep) -> "HallElement":
        """Coefficient-preserving restriction to the types where keep(t)."""
        return HallElement(self.weight, self.level,
                           {t: co for t, co in self.coeffs.items() if keep(t)})

    def __repr__(self):
        rows = ", ".join(f"{t.parts}: {co}" for t, co in
                         sorted(self.coeffs.items(), key=lambda kv: kv[0].sort_key()))
        return f"HallElement({tuple(self.weight)}, level={self.level}, {{{rows}}})"


@dataclass(frozen=True)
class ProductTerm:
    sign: int
    v_exp: int
    factors: tuple
    kinds: tuple  # per factor: "ss" (semistable), "vec" (bundles) or "all"


@dataclass
class ProductExpression:
    weight: KClass
    terms: list

    def __post_init__(self):
        self.weight = KClass(*self.weight)
        for term in self.terms:
            tot = KClass(0, 0)
            for f in term.factors:
                tot = tot + f
            if tot != self.weight:
                raise ValueError(f"factors of {term} do not sum to {self.weight}")


def pairwise_euler(parts, g: int) -> int:
    """sum_{i<j} <a_i, a_j> over an ordered sequence of classes."""
    parts = list(parts)
    total = 0
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            total += euler_form(parts[i], parts[j], g)
    return total


def strata_to_product(t: HNType, g: int) -> ProductExpression:
    """Write 1_S as v^e times the slope-ordered product of semistable factors."""
    e = pairwise_euler(t.parts, g)
    term = ProductTerm(1, e, t.parts, ("ss",) * len(t.parts))
    return ProductExpression(t.weight, [term])


def expand_one(weight, level, vec_only: bool = False) -> HallElement:
    """Truncation of the all-sheaves (or all-bundles) characteristic function.

    In the stratum basis this is the all-ones vector over the HN types of the
    weight at the level; the v-powers of the product picture appear only
    after strata_to_product.
    """
    types = enumerate_hn_types(weight, level, vec_only)
    one = Laurent.one()
    return HallElement(weight, level, {t: one for t in types})


def torsion_split(weight, level) -> list:
    """Terms (l, v-exponent, bundle class, torsion class) of the torsion split.

    The full class function decomposes as sum_l v^(l r) 1vec_{a-(0,l)}
    1_{(0,l)}; at a truncation level only torsion degrees l <= deg - r*level
    survive (larger l would force a bundle slope below the level).
    """
    weight = KClass(*weight)
    if weight.r < 1:
        raise ValueError("torsion split needs rank >= 1")
    level = Fraction(level)
    lmax_f = weight.d - weight.r * level
    lmax = lmax_f.numerator // lmax_f.denominator
    return [(l, l * weight.r, KClass(weight.r, weight.d - l), KClass(0, l))
            for l in range(0, lmax + 1)]


def _compositions(n: int):
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in _compositions(n - first):
            yield (first,) + rest


def reineke_invert(weight, g: int, mu_bound=None, max_terms: int = 40) -> ProductExpression:
    """Alternating product expansion of the semistable stratum function.

    Emits tuples (b_1, ..., b_s) of positive-rank classes summing to the
    weight whose proper suffix sums all have slope strictly above the
    weight's slope, with sign (-1)^(s-1) and v-exponent sum_{i<j} <b_i, b_j>.
    The suffix condition is imposed for k = 2..s only; at k = 1 it would
    compare the weight's slope with itself and empty the sum.  Factors carry
    the bundle kind: under the counting measure each factor contributes the
    (degree-independent) bundle volume of its rank, which is the sector
    where the term-by-term evaluation converges; torsion-decorated tuples
    resum into these and are not emitted.  A rank-0 weight is its own
    semistable function and yields the single torsion factor.

    max_terms cuts the (generally infinite) tuple family at twist exponent
    <= max_terms, i.e. at counting-measure contributions of order at least
    v^max_terms; mu_bound optionally caps all suffix-sum slopes.  Terms are
    ordered by length, then lexicographically.
    """
    weight = KClass(*weight)
    if not weight.in_cone():
        raise ValueError(f"{weight} is outside the positive cone")
    if weight.r == 0:
        return ProductExpression(weight, [ProductTerm(1, 0, (weight,), ("all",))])
    r, d = weight
    mu = weight.slope
    found = []
    for shape in _compositions(r):
        s = len(shape)
        if s == 1:
            if 0 <= max_terms:
                found.append((1, (weight,), 0))
            continue
        suffix_rank = [sum(shape[j:]) for j in range(s)]   # R_1 .. R_s
        coef = [shape[j - 1] + shape[j] for j in range(1, s)]  # of D_2 .. D_s
        s_pairs = sum(shape[i] * shape[j] for i in range(s) for j in range(i + 1, s))
        e_const = (1 - g) * s_pairs - suffix_rank[1] * d
        lower = []
        upper = []
        for j in range(1, s):
            rj = suffix_rank[j]
            b = (rj * mu.numerator) // mu.denominator + 1  # floor(R_j mu) + 1
            lower.append(b)
            if mu_bound is None:
                upper.append(None)
            else:
                mb = Fraction(mu_bound)
                upper.append((rj * mb.numerator) // mb.denominator)
        base_extra = [coef[j] * lower[j] for j in range(s - 1)]

        def emit(j, degs, linear):
            # degs: chosen D_2..D_j+1 so far; prune by the best case of the rest
            if j == s - 1:
                e_val = e_const + linear
                suffix_deg = degs + [0]
                factors = []
                prev_r, prev_d = r, d
                for k in range(1, s):
                    factors.append(KClass(prev_r - suffix_rank[k], prev_d - suffix_deg[k - 1]))
                    prev_r, prev_d = suffix_rank[k], suffix_deg[k - 1]
                factors.append(KClass(prev_r, prev_d))
                found.append((s, tuple(factors), e_val))
                return
            rest_min = sum(base_extra[j + 1:])
            dj = lower[j]
            while e_const + linear + coef[j] * dj + rest_min <= max_terms:
                if upper[j] is not None and dj > upper[j]:
                    break
                emit(j + 1, degs + [dj], linear + coef[j] * dj)
                dj += 1

        emit(0, [], 0)
    found.sort(key=lambda t: (t[0], t[1]))
    terms = [ProductTerm((-1) ** (s - 1), e, fac, ("vec",) * s) for s, fac, e in found]
    return ProductExpression(weight, terms)


def integrate(e: HallElement, vol_ss, q: int, g: int) -> SqrtExt:
    """Counting-measure evaluation of a stratum-basis element.

    A stratum of type (a_1, ..., a_l) integrates to q^(-sum_{i<j} <a_i,a_j>)
    times prod_i vol_ss[a_i]; coefficients are evaluated at v = 1/sqrt(q).
    vol_ss must cover every part occurring in the support.
    """
    total = SqrtExt(0, 0, q)
    for t, co in e.coeffs.items():
        term = eval_sqrt_q(co, q) * q_power(q, -pairwise_euler(t.parts, g))
        for p in t.parts:
            if p not in vol_ss:
                raise ValueError(f"volume table has no entry for {p}")
            term = term * vol_ss[p]
        total = total + term
    return total


def hn_projector(e: HallElement, beta, g: int) -> HallElement:
    """Restriction of e to the strata whose polygon passes through beta.

    beta must be an interior vertex of the lower hull of the support whose
    hull slope gap exceeds 2(g-1); every surviving stratum then has a vertex
    at beta with at least that gap, which is asserted (a failure means the
    convexity reasoning is broken, not bad input).  Coefficients are kept
    unchanged.
    """
    beta = KClass(*beta)
    if e.is_zero():
        raise ValueError("projector needs a nonzero element")
    hull = lower_convex_hull(e.support())
    verts = hull.vertices()
    if beta not in verts[1:-1]:
        raise ValueError(f"{tuple(beta)} is not an interior vertex of the support hull")
    bound = Fraction(2 * (g - 1))
    gap = slope_gap_at(hull, beta)
    if gap is not None and not gap > bound:
        raise ValueError(f"hull slope gap {gap} at {tuple(beta)} does not exceed {bound}")
    kept = e.restrict(lambda t: passes_through(t, beta))
    for t in kept.coeffs:
        tgap = slope_gap_at(t, beta)
        if tgap is not None and not tgap > bound:
            raise RuntimeError(
                f"stratum {t.parts} passes through {tuple(beta)} with gap {tgap}; "
                "a support polygon failed to inherit the hull gap")
    return kept


@dataclass(frozen=True)
class PeelStep:
    vertex: KClass
    removed: tuple  # HNTypes, canonically sorted


@dataclass
class PeelCertificate:
    target: KClass
    genus: int
    steps: list
    residue: HallElement

    def __eq__(self, other):
        if not isinstance(other, PeelCertificate):
            return NotImplemented
        return (self.target == other.target and self.genus == other.genus
                and self.steps == other.steps and self.residue == other.residue)


def peel(target, e: HallElement, g: int) -> PeelCertificate:
    """Strip all below-threshold strata from e, leaving the semistable unit.

    e must be the semistable unit of the target weight plus noise strata
    whose first slope lies below the gap threshold.  Each round takes the
    lower hull of the remaining noise, picks its smallest vertex (by rank,
    then degree) with slope gap > 2(g-1) -- the threshold guarantees one
    exists -- and removes every stratum through it.  The recorded steps
    replay deterministically; the residue is the semistable unit.
    """
    target = KClass(*target)
    t0 = HNType((tuple(target),))
    if e.weight != target:
        raise ValueError("element weight differs from the target")
    if e.coeff(t0) != Laurent.one():
        raise ValueError("element must contain the semistable stratum with unit coefficient")
    n0 = hn_gap_threshold(target, g)
    for t in e.support():
        if t == t0:
            continue
        head = t.parts[0]
        if head.r == 0 or not head.slope < n0:
            raise ValueError(f"noise stratum {t.parts} is not below the threshold {n0}")
    bound = Fraction(2 * (g - 1))
    current = e
    steps = []
    for _ in range(len(e.coeffs)):
        noise = [t for t in current.support() if t != t0]
        if not noise:
            break
        hull = lower_convex_hull(noise)
        candidates = []
        for v in hull.vertices()[1:-1]:
            gap = slope_gap_at(hull, v)
            if gap is None or gap > bound:
                candidates.append(v)
        if not candidates:
            raise RuntimeError("no hull vertex with slope gap above 2(g-1); "
                               "gap threshold reasoning violated")
        beta = min(candidates)
        removed = hn_projector(current, beta, g)
        if t0 in removed.coeffs:
            raise RuntimeError("projector would remove the semistable unit")
        if removed.is_zero():
            raise RuntimeError("projector removed nothing at a hull vertex")
        steps.append(PeelStep(beta, tuple(removed.support())))
        current = current - removed
    noise = [t for t in current.support() if t != t0]
    if noise:
        raise RuntimeError("peeling failed to terminate within the support bound")
    return PeelCertificate(target, g, steps, current)


def replay_peel(e: HallElement, cert: PeelCertificate) -> bool:
    """Re-run a certificate against its starting element and check every step."""
    t0 = HNType((tuple(cert.target),))
    current = e
    seen = set()
    for step in cert.steps:
        expected = hn_projector(current, step.vertex, cert.genus)
        if tuple(expected.support()) != step.removed:
            raise ValueError(f"step at {tuple(step.vertex)} removes {expected.support()}, "
                             f"certificate says {step.removed}")
        for t in step.removed:
            if t in seen:
                raise ValueError("removed sets are not disjoint")
            if not passes_through(t, step.vertex):
                raise ValueError(f"{t.parts} does not pass through {tuple(step.vertex)}")
            seen.add(t)
        current = current - expected
    if current != cert.residue:
        raise ValueError("replay residue differs from the certificate residue")
    if set(current.coeffs) != {t0}:
        raise ValueError("residue is not the semistable stratum alone")
    return True


# --- canonical JSON forms ---------------------------------------------------

def _frac_json(x: Fraction):
    return [x.numerator, x.denominator]


def _laurent_json(co: Laurent):
    return {str(e): _frac_json(co.coeffs[e]) for e in co.support()}


def _laurent_from_json(obj) -> Laurent:
    return Laurent({int(e): Fraction(n, d) for e, (n, d) in obj.items()})


def hall_element_to_json(e: HallElement) -> dict:
    return {
        "schema": 1,
        "kind": "hall_element",
        "weight": [e.weight.r, e.weight.d],
        "level": _frac_json(e.level),
        "coeffs": [
            {"type": [[p.r, p.d] for p in t.parts], "coeff": _laurent_json(e.coeffs[t])}
            for t in e.support()
        ],
    }


def hall_element_from_json(obj) -> HallElement:
    if obj.get("schema") != 1 or obj.get("kind") != "hall_element":
        raise ValueError("not a schema-1 hall_element object")
    weight = KClass(*obj["weight"])
    level = Fraction(*obj["level"])
    coeffs = {}
    for row in obj["coeffs"]:
        t = HNType(tuple(tuple(p) for p in row["type"]))
        coeffs[t] = _laurent_from_json(row["coeff"])
    return HallElement(weight, level, coeffs)


def peel_certificate_to_json(cert: PeelCertificate) -> dict:
    return {
        "schema": 1,
        "kind": "peel_certificate",
        "target": [cert.target.r, cert.target.d],
        "genus": cert.genus,
        "steps": [
            {"vertex": [s.vertex.r, s.vertex.d],
             "removed": [[[p.r, p.d] for p in t.parts] for t in s.removed]}
            for s in cert.steps
        ],
        "residue": hall_element_to_json(cert.residue),
    }


def peel_certificate_from_json(obj) -> PeelCertificate:
    if obj.get("schema") != 1 or obj.get("kind") != "peel_certificate":
        raise ValueError("not a schema-1 peel_certificate object")
    steps = [PeelStep(KClass(*s["vertex"]),
                      tuple(HNType(tuple(tuple(p) for p in t)) for t in s["removed"]))
             for s in obj["steps"]]
    return PeelCertificate(KClass(*obj["target"]), obj["genus"], steps,
                           hall_element_from_json(obj["residue"]))
