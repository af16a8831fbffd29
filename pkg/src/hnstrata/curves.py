"""Point counting and stack volumes from a zeta datum.

A curve enters only through (q, genus, zeta numerator coefficients); from
those we count closed points, line bundles and torsion sheaves, and compute
stacky volumes (sums of 1/#Aut).  The semistable volume is obtained by
subtracting all proper HN strata from the total bundle volume; the strata
of each rank composition form a lattice cone on which the twist exponent is
affine, so the infinitely many strata sum to an exact rational through
residue-class decomposition and geometric series (ranks <= 3), or to a
certified truncation with an explicit tail bound (rank 4).

All arithmetic is exact; volumes are Fractions.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from .hall import ProductExpression, pairwise_euler
from .polygons import HNType, KClass, enumerate_hn_types
from .scalars import SqrtExt, q_power

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

EXACT_RANK_LIMIT = 3
TRUNC_RANK_LIMIT = 4
_CHECK_WINDOW = 12


def _is_prime_power(q: int) -> bool:
    if q < 2:
        return False
    n = q
    for p in range(2, isqrt(q) + 1):
        if n % p == 0:
            while n % p == 0:
                n //= p
            return n == 1
    return True


def _mobius(n: int) -> int:
    out = 1
    for p in range(2, isqrt(n) + 1):
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            out = -out
    if n > 1:
        out = -out
    return out


@dataclass(frozen=True)
class ZetaDatum:
    """(q, genus, numerator coefficients a_0..a_2g of the zeta function)."""

    q: int
    g: int
    numerator: tuple

    def __post_init__(self):
        object.__setattr__(self, "numerator", tuple(int(a) for a in self.numerator))
        if not _is_prime_power(self.q):
            raise ValueError(f"q = {self.q} is not a prime power")
        if self.g < 0:
            raise ValueError("genus must be >= 0")
        a = self.numerator
        if len(a) != 2 * self.g + 1:
            raise ValueError(f"numerator needs {2 * self.g + 1} coefficients, got {len(a)}")
        if a[0] != 1:
            raise ValueError("numerator must have constant term 1")
        for i in range(self.g + 1):
            if a[2 * self.g - i] != self.q ** (self.g - i) * a[i]:
                raise ValueError(f"functional equation fails at coefficient {i}")
        if self.numerator_at_one() <= 0:
            raise ValueError("numerator at 1 (the class number) must be positive")
        for m in range(1, _CHECK_WINDOW + 1):
            if self.point_count(m) < 0:
                raise ValueError(f"negative point count N_{m}")
            closed_points(self, m)  # raises if negative or non-integral

    def numerator_at_one(self) -> int:
        return sum(self.numerator)

    def _power_sum(self, m: int) -> int:
        # Newton's identities for the inverse roots of the numerator:
        # sum_{i=0}^{m-1} a_i p_{m-i} = -m a_m, with a_i = 0 beyond 2g.
        a = self.numerator
        p = [0] * (m + 1)
        for k in range(1, m + 1):
            acc = k * a[k] if k < len(a) else 0
            for i in range(1, k):
                if i < len(a):
                    acc += a[i] * p[k - i]
            p[k] = -acc
        return p[m]

    def point_count(self, m: int) -> int:
        """Number of F_{q^m}-points: N_m = q^m + 1 - (m-th power sum of roots)."""
        if m < 1:
            raise ValueError("m must be >= 1")
        return self.q ** m + 1 - self._power_sum(m)


def load_zeta(path) -> ZetaDatum:
    """Read a zeta datum from TOML with keys q, genus, numerator."""
    with open(path, "rb") as fh:
        obj = tomllib.load(fh)
    try:
        return ZetaDatum(obj["q"], obj["genus"], tuple(obj["numerator"]))
    except KeyError as exc:
        raise ValueError(f"zeta file {path} is missing key {exc}") from exc


def p1_datum(q: int) -> ZetaDatum:
    return ZetaDatum(q, 0, (1,))


def closed_points(Z: ZetaDatum, m: int) -> int:
    """Number of closed points of degree m, by Mobius inversion of N."""
    if m < 1:
        raise ValueError("degree must be >= 1")
    total = 0
    for k in range(1, m + 1):
        if m % k == 0:
            total += _mobius(m // k) * Z.point_count(k)
    if total < 0 or total % m:
        raise ValueError(f"inconsistent zeta datum: B_{m} = {total}/{m}")
    return total // m


def pic_count(Z: ZetaDatum) -> int:
    """Size of Pic^d for every d: the numerator evaluated at 1."""
    return Z.numerator_at_one()


# --- torsion volumes ---------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _partitions(n: int):
    if n == 0:
        return ((),)
    out = []
    for first in range(n, 0, -1):
        for rest in _partitions(n - first):
            if not rest or rest[0] <= first:
                out.append((first,) + rest)
    return tuple(out)


def partition_aut_order(parts, Q: int) -> Fraction:
    """#Aut of the torsion module with the given partition over residue field F_Q."""
    n_lam = sum(i * p for i, p in enumerate(parts))
    out = Fraction(Q) ** (sum(parts) + 2 * n_lam)
    mult = 1
    for i, p in enumerate(parts):
        if i + 1 < len(parts) and parts[i + 1] == p:
            mult += 1
            continue
        for j in range(1, mult + 1):
            out *= 1 - Fraction(1, Q ** j)
        mult = 1
    return out


@functools.lru_cache(maxsize=None)
def _local_torsion_series(Q: int, top: int):
    """Coefficients of sum_m u^m sum_{partitions of m} 1/#Aut, up to degree top."""
    return tuple(sum((1 / partition_aut_order(lam, Q) for lam in _partitions(m)),
                     Fraction(0)) for m in range(top + 1))


def _poly_mul(a, b, top):
    out = [Fraction(0)] * (top + 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            if i + j > top:
                break
            out[i + j] += ai * bj
    return out


def _poly_pow(a, e, top):
    out = [Fraction(0)] * (top + 1)
    out[0] = Fraction(1)
    base = list(a) + [Fraction(0)] * (top + 1 - len(a))
    while e:
        if e & 1:
            out = _poly_mul(out, base, top)
        base = _poly_mul(base, base, top)
        e >>= 1
    return out


@functools.lru_cache(maxsize=None)
def _torsion_series(Z: ZetaDatum, top: int):
    series = [Fraction(0)] * (top + 1)
    series[0] = Fraction(1)
    for e in range(1, top + 1):
        b = closed_points(Z, e)
        if b == 0:
            continue
        local = _local_torsion_series(Z.q ** e, top // e)
        spread = [Fraction(0)] * (top + 1)
        for m, c in enumerate(local):
            spread[m * e] = c
        series = _poly_mul(series, _poly_pow(spread, b, top), top)
    return tuple(series)


def vol_torsion(Z: ZetaDatum, d: int) -> Fraction:
    """Stacky count of torsion sheaves of degree d: an Euler product over
    closed points of degree <= d with partition sums at each point."""
    if d < 0:
        raise ValueError("torsion degree must be >= 0")
    return _torsion_series(Z, d)[d]


# --- bundle volumes ----------------------------------------------------------

def zeta_value(Z: ZetaDatum, i: int) -> Fraction:
    """The zeta function at q^(-i): numerator(q^-i) / ((1-q^-i)(1-q^(1-i)))."""
    x = Fraction(1, Z.q ** i)
    num = sum(Fraction(a) * x ** k for k, a in enumerate(Z.numerator))
    return num / ((1 - x) * (1 - Z.q * x))


def vol_bun(Z: ZetaDatum, r: int) -> Fraction:
    """Total stacky volume of rank-r bundles of any fixed degree.

    The classical mass formula: (#Pic^0/(q-1)) q^((r^2-1)(g-1)) prod_{i=2..r}
    zeta(i); degree-independent.  Validated against direct enumeration on
    the rational-curve model before anything is built on it.
    """
    if r < 1:
        raise ValueError("rank must be >= 1")
    out = Fraction(pic_count(Z), Z.q - 1)
    out *= Fraction(Z.q) ** ((r * r - 1) * (Z.g - 1))
    for i in range(2, r + 1):
        out *= zeta_value(Z, i)
    return out


# --- semistable volumes via the HN recursion ---------------------------------

def _lcm(a: int, b: int) -> int:
    from math import gcd
    return a * b // gcd(a, b)


def _shape_sum(table: "VolTable", shape, d: int) -> Fraction:
    """Exact sum of q^(-twist) prod vol_ss over all strata with the given
    rank composition (>= 2 parts) and total degree d.

    Parametrized by the consecutive cross-determinants c_k >= 1: the twist
    exponent is affine in c with positive weights w_k, the part degrees are
    affine in c with bounded denominators, and vol_ss(r_i, .) only depends
    on d_i mod r_i.  Splitting c by residue vectors modulo a common period
    M turns the sum into finitely many products of geometric series.
    """
    Z = table.Z
    l = len(shape)
    r = sum(shape)
    s_pairs = sum(shape[i] * shape[j] for i in range(l) for j in range(i + 1, l))
    # w_k = sum_{i<=k<j} r_i r_j / (r_k r_{k+1});  A_k = (sum_{i>k} r_i)/(r_k r_{k+1})
    w = []
    acoef = []
    for k in range(l - 1):
        pair = shape[k] * shape[k + 1]
        w.append(Fraction(sum(shape[i] * shape[j]
                              for i in range(k + 1) for j in range(k + 1, l)), pair))
        acoef.append(Fraction(sum(shape[k + 1:]), pair))
    # d_i(c) = r_i (mu_1 + sum_{k<i} c_k/(r_k r_{k+1})) with
    # mu_1 = (d - sum_k c_k A_k) / r
    const = [Fraction(shape[i] * d, r) for i in range(l)]
    coeff = [[shape[i] * (-acoef[k] / r
                          + (Fraction(1, shape[k] * shape[k + 1]) if k < i else 0))
              for k in range(l - 1)] for i in range(l)]
    lcm_rank = 1
    lcm_den = 1
    for i in range(l):
        lcm_rank = _lcm(lcm_rank, shape[i])
        for k in range(l - 1):
            lcm_den = _lcm(lcm_den, coeff[i][k].denominator)
    # the product guarantees both d_i(c) integrality and d_i mod r_i are
    # invariant under c_k -> c_k + M
    m_period = lcm_den * lcm_rank

    total = Fraction(0)
    base_twist = Fraction(Z.q) ** ((Z.g - 1) * s_pairs)  # q^(-(1-g) S)
    ratios = []
    for k in range(l - 1):
        wm = w[k] * m_period
        if wm.denominator != 1:
            raise ValueError("non-integral twist period")  # impossible at rank <= 3
        ratios.append(1 - Fraction(1, Z.q ** int(wm)))

    for rho in _residue_vectors(m_period, l - 1):
        degs = []
        ok = True
        for i in range(l):
            val = const[i] + sum(coeff[i][k] * rho[k] for k in range(l - 1))
            if val.denominator != 1:
                ok = False
                break
            degs.append(int(val))
        if not ok:
            continue
        term = base_twist
        for i in range(l):
            term *= table.ss(KClass(shape[i], degs[i] % shape[i]))
        if term == 0:
            continue
        for k in range(l - 1):
            wr = w[k] * rho[k]
            if wr.denominator != 1:
                raise ValueError("non-integral twist exponent")
            term *= Fraction(1, Z.q ** int(wr)) / ratios[k]
        total += term
    return total


def _residue_vectors(m: int, n: int):
    if n == 0:
        yield ()
        return
    for rest in _residue_vectors(m, n - 1):
        for res in range(1, m + 1):
            yield rest + (res,)


class VolTable:
    """Memoized volumes for one zeta datum.

    Semistable volumes are stored once per (rank, degree mod rank) --
    twisting by a degree-1 line bundle is a volume-preserving bijection --
    with separate memo maps for bundle and torsion volumes.
    """

    def __init__(self, Z: ZetaDatum):
        self.Z = Z
        self.ss_memo = {}
        self.bun_memo = {}
        self.tor_memo = {}

    def bun(self, r: int) -> Fraction:
        if r not in self.bun_memo:
            self.bun_memo[r] = vol_bun(self.Z, r)
        return self.bun_memo[r]

    def tor(self, d: int) -> Fraction:
        if d not in self.tor_memo:
            self.tor_memo[d] = vol_torsion(self.Z, d)
        return self.tor_memo[d]

    def ss(self, alpha) -> Fraction:
        """Exact semistable volume; supported for ranks <= EXACT_RANK_LIMIT."""
        alpha = KClass(*alpha)
        if not alpha.in_cone() and alpha != KClass(0, 0):
            raise ValueError(f"{alpha} is outside the positive cone")
        if alpha.r == 0:
            return self.tor(alpha.d)
        if alpha.r == 1:
            return Fraction(pic_count(self.Z), self.Z.q - 1)
        if alpha.r > EXACT_RANK_LIMIT:
            raise ValueError(f"exact semistable volume not supported at rank {alpha.r}; "
                             "use the truncated mode")
        key = (alpha.r, alpha.d % alpha.r)
        if key not in self.ss_memo:
            self.ss_memo[key] = self._ss_exact(alpha.r, alpha.d % alpha.r)
        return self.ss_memo[key]

    def _ss_exact(self, r: int, d: int) -> Fraction:
        total = self.bun(r)
        for shape in _compositions(r):
            if len(shape) >= 2:
                total -= _shape_sum(self, shape, d)
        return total

    def ss_table(self, classes) -> dict:
        return {KClass(*c): self.ss(c) for c in classes}


def _compositions(n: int):
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in _compositions(n - first):
            yield (first,) + rest


@functools.lru_cache(maxsize=None)
def default_table(Z: ZetaDatum) -> VolTable:
    return VolTable(Z)


def vol_ss(Z: ZetaDatum, alpha) -> Fraction:
    """Exact semistable volume of a class (ranks <= EXACT_RANK_LIMIT)."""
    return default_table(Z).ss(alpha)


@dataclass(frozen=True)
class TruncatedVolume:
    value: Fraction
    tail_bound: Fraction
    level: int


def _truncation_tail_bound(table: VolTable, r: int, d: int, level: int) -> Fraction:
    """Upper bound for the total stratum volume below the level.

    Every omitted stratum has first slope < level; per rank composition the
    omitted cone sits inside a union of coordinate tails, each of which is
    bounded by a geometric series with integral exponents.
    """
    Z = table.Z
    total = Fraction(0)
    for shape in _compositions(r):
        l = len(shape)
        if l < 2:
            continue
        s_pairs = sum(shape[i] * shape[j] for i in range(l) for j in range(i + 1, l))
        vmax = Fraction(1)
        for ri in shape:
            vmax *= table.bun(ri)
        budget = Fraction(d - r * level)
        if budget <= 0:
            raise ValueError("level must lie strictly below the slope")
        piece = Fraction(0)
        whole_line = []
        for k in range(l - 1):
            pair = shape[k] * shape[k + 1]
            wk = Fraction(sum(shape[i] * shape[j]
                              for i in range(k + 1) for j in range(k + 1, l)), pair)
            wfloor = wk.numerator // wk.denominator
            whole_line.append(Fraction(1, Z.q ** wfloor) / (1 - Fraction(1, Z.q ** wfloor)))
        for k in range(l - 1):
            pair = shape[k] * shape[k + 1]
            ak = Fraction(sum(shape[k + 1:]), pair)
            wk = Fraction(sum(shape[i] * shape[j]
                              for i in range(k + 1) for j in range(k + 1, l)), pair)
            wfloor = wk.numerator // wk.denominator
            start = (budget / ((l - 1) * ak)).__floor__() + 1
            tail_k = Fraction(1, Z.q ** (wfloor * start)) / (1 - Fraction(1, Z.q ** wfloor))
            rest = Fraction(1)
            for kk in range(l - 1):
                if kk != k:
                    rest *= whole_line[kk]
            piece += tail_k * rest
        total += Fraction(Z.q) ** ((Z.g - 1) * s_pairs) * vmax * piece
    return total


def vol_ss_truncated(Z: ZetaDatum, alpha, K: int) -> TruncatedVolume:
    """Semistable volume with a certified tail bound q^-K.

    Sums the strata with first slope above a level chosen so that the
    omitted tail is at most q^-K; parts of the finitely many kept strata
    are evaluated exactly.  Supported through rank TRUNC_RANK_LIMIT.
    """
    alpha = KClass(*alpha)
    table = default_table(Z)
    if alpha.r == 0:
        return TruncatedVolume(table.tor(alpha.d), Fraction(0), 0)
    if alpha.r == 1:
        return TruncatedVolume(table.ss(alpha), Fraction(0), 0)
    if alpha.r > TRUNC_RANK_LIMIT:
        raise ValueError(f"truncated mode not supported at rank {alpha.r}")
    target = Fraction(1, Z.q ** K)
    level = alpha.d // alpha.r - 1
    while _truncation_tail_bound(table, alpha.r, alpha.d, level) > target:
        level -= 1
    value = table.bun(alpha.r)
    for t in enumerate_hn_types(alpha, level, vec_only=True):
        if len(t.parts) < 2:
            continue
        term = Fraction(1, Z.q) ** pairwise_euler(t.parts, Z.g)
        for p in t.parts:
            term *= table.ss(p)
        value -= term
    bound = _truncation_tail_bound(table, alpha.r, alpha.d, level)
    return TruncatedVolume(value, bound, level)


def stratum_volume(Z: ZetaDatum, t: HNType) -> Fraction:
    """Counting-measure volume of one HN stratum: q^(-twist) prod vol_ss."""
    table = default_table(Z)
    out = Fraction(1, Z.q) ** pairwise_euler(t.parts, Z.g)
    for p in t.parts:
        out *= table.ss(p)
    return out


def reineke_vol_ss(Z: ZetaDatum, alpha) -> Fraction:
    """Semistable volume through the alternating inversion series, exactly.

    Sums (-1)^(s-1) q^(-twist) prod vol_bun(r_i) over all tuples of
    positive-rank classes with slope conditions on proper suffix sums.  Per
    rank composition the twist is affine in the suffix degrees with
    positive integer weights, so each cone sums to a product of geometric
    series.  Independent of the stratum-subtraction route for rank >= 3.
    """
    alpha = KClass(*alpha)
    if not alpha.in_cone():
        raise ValueError(f"{alpha} is outside the positive cone")
    if alpha.r == 0:
        return vol_torsion(Z, alpha.d)
    r, d = alpha
    mu = alpha.slope
    q = Z.q
    total = Fraction(0)
    for shape in _compositions(r):
        s = len(shape)
        if s == 1:
            total += vol_bun(Z, r)
            continue
        suffix_rank = [sum(shape[j:]) for j in range(s)]
        s_pairs = sum(shape[i] * shape[j] for i in range(s) for j in range(i + 1, s))
        e_const = (1 - Z.g) * s_pairs - suffix_rank[1] * d
        term = Fraction(-1) ** (s - 1) * Fraction(q) ** (-e_const)
        for ri in shape:
            term *= vol_bun(Z, ri)
        for j in range(1, s):
            coef = shape[j - 1] + shape[j]
            b = (suffix_rank[j] * mu.numerator) // mu.denominator + 1
            term *= Fraction(1, q ** (coef * b)) / (1 - Fraction(1, q ** coef))
        total += term
    return total


def integrate_product(Z: ZetaDatum, expr: ProductExpression) -> SqrtExt:
    """Counting-measure value of a product expression.

    Each term contributes sign * v^(v_exp + sum of pairwise pairings) times
    the product of its factor volumes: semistable factors read the exact
    volume table, bundle factors the rank's bundle volume, and a full factor
    is summable only in rank 0 (the torsion volume) -- the torsion tower on
    a positive-rank full factor diverges under the measure.
    """
    q = Z.q
    table = default_table(Z)
    total = SqrtExt(0, 0, q)
    for term in expr.terms:
        twist = term.v_exp + pairwise_euler(term.factors, Z.g)
        val = q_power(q, Fraction(-twist, 2)) * term.sign
        for cls, kind in zip(term.factors, term.kinds):
            if kind == "ss":
                val = val * table.ss(cls)
            elif kind == "vec":
                if cls.r == 0:
                    val = val * 0
                else:
                    val = val * table.bun(cls.r)
            elif kind == "all":
                if cls.r == 0:
                    val = val * (table.tor(cls.d) if cls.d else 1)
                else:
                    raise ValueError("full-class factor of positive rank has no "
                                     "convergent counting-measure value")
            else:
                raise ValueError(f"unknown factor kind {kind!r}")
        total = total + val
    return total


# --- rank-2 Brill-Noether dimension table ------------------------------------

@dataclass(frozen=True)
class BNRow:
    stratum: str
    dim: int
    fiber: str
    fiber_dim: object  # int, or None for an empty fiber


# affine coefficients (slope, offset) in the genus for each stratum dimension
BN_RANK2_AFFINE = (("W0", 4, -4, "empty", None),
                   ("W1", 3, -3, "pt", 0),
                   ("U", 2, -2, "pt+pt", 0),
                   ("W2", 1, -4, "P1", 1))


def bn_table_rank2(g: int):
    """Dimension/fiber table of the rank-2 degree-0 splitting strata."""
    if g < 2:
        raise ValueError("the table needs g >= 2")
    return [BNRow(name, a * g + b, fiber, fdim)
            for name, a, b, fiber, fdim in BN_RANK2_AFFINE]


def check_smallness(rows) -> str:
    """Classify a stratified proper map as small, semismall or neither.

    rows: (stratum dimension, fiber dimension, is_open_in_image); exactly
    one open row.  Small: every other stratum drops dimension by more than
    twice its fiber dimension; semismall: by at least that much, with
    equality somewhere.
    """
    opens = [r for r in rows if r[2]]
    if len(opens) != 1:
        raise ValueError("need exactly one open stratum")
    top = opens[0][0]
    tight = False
    for dim, fiber, is_open in rows:
        if is_open:
            continue
        slack = (top - dim) - 2 * fiber
        if slack < 0:
            return "neither"
        if slack == 0:
            tight = True
    return "semismall" if tight else "small"


def bn_smallness(g: int) -> str:
    """Smallness of the rank-2 convolution map over its image stratification."""
    rows = bn_table_rank2(g)
    by_name = {r.stratum: r for r in rows}
    image = [(by_name["W1"].dim, 0, True),
             (by_name["U"].dim, by_name["U"].fiber_dim, False),
             (by_name["W2"].dim, by_name["W2"].fiber_dim, False)]
    return check_smallness(image)
