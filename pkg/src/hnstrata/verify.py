"""Oracle-equivalence verification suites behind the command line.

Each suite returns a list of (name, passed, detail) rows; a suite passes
when every row does.  The checks compare independent computation routes:
closed-form volumes against direct enumeration on the rational curve, the
HN recursion against the alternating inversion, and the quiver recursion
against the exhaustive matrix oracle.
"""

from __future__ import annotations

from fractions import Fraction

from . import p1
from .curves import (
    ZetaDatum,
    default_table,
    integrate_product,
    p1_datum,
    reineke_vol_ss,
    stratum_volume,
    vol_bun,
    vol_ss,
    vol_ss_truncated,
    vol_torsion,
)
from .hall import expand_one, integrate, reineke_invert
from .polygons import KClass, enumerate_hn_types
from .quiver import (
    Quiver,
    brute_force,
    enumerate_hn_types_quiver,
    quiver_euler_form,
    reineke_vol_ss_quiver,
    vol_rep,
    vol_ss_quiver,
)
from .scalars import SqrtExt


def p1_suite(q: int, window: int = -4):
    """Counting-measure checks against the explicit rational-curve model."""
    Z = p1_datum(q)
    table = default_table(Z)
    rows = []

    for d in range(0, min(-window, 8) + 1):
        census = p1._census_mass(q, d)
        rows.append((f"torsion volume degree {d}", census == vol_torsion(Z, d),
                     f"census {census}"))

    for r in (1, 2, 3):
        direct = p1.window_volume(q, r, 0, window)
        total = vol_bun(Z, r)
        ok = 0 < direct < total or (direct == total)
        rows.append((f"bundle volume rank {r} window partial", ok,
                     f"window {direct} vs total {total}"))

    for alpha in [KClass(1, 0), KClass(2, 0), KClass(2, 1), KClass(3, 0)]:
        n = window if alpha.r < 3 else max(window, -4)
        e = expand_one(alpha, n)
        vol_table = {part: table.ss(part) for t in e.support() for part in t.parts}
        lhs = integrate(e, vol_table, q, 0)
        rhs = p1.window_volume(q, alpha.r, alpha.d, n)
        rows.append((f"counting consistency {tuple(alpha)} at level {n}",
                     lhs == SqrtExt(rhs, 0, q), f"{rhs}"))

    for weight in [KClass(2, 0), KClass(2, 1), KClass(3, 0)]:
        n = window if weight.r < 3 else max(window, -3)
        bad = []
        for t in enumerate_hn_types(weight, n):
            if stratum_volume(Z, t) != p1.vol_stratum_direct(t, q):
                bad.append(t.parts)
        rows.append((f"stratum twist {tuple(weight)} at level {n}", not bad, f"{bad}"))

    for alpha, want in [(KClass(2, 0), Fraction(1, (q * q - 1) * (q * q - q))),
                        (KClass(2, 1), Fraction(0))]:
        rows.append((f"semistable volume {tuple(alpha)}", vol_ss(Z, alpha) == want,
                     f"{vol_ss(Z, alpha)}"))
    return rows


def inversion_suite(Z: ZetaDatum, alpha) -> list:
    """Mutual inversion of the HN expansion and the alternating series."""
    alpha = KClass(*alpha)
    rows = []
    direct = vol_ss(Z, alpha)
    inverted = reineke_vol_ss(Z, alpha)
    rows.append((f"inversion equals recursion for {tuple(alpha)}",
                 direct == inverted, f"{inverted}"))
    if alpha.r >= 1:
        tv = vol_ss_truncated(Z, alpha, 20)
        rows.append((f"truncated recursion within bound for {tuple(alpha)}",
                     abs(tv.value - direct) <= tv.tail_bound,
                     f"level {tv.level}"))
        expr_small = reineke_invert(alpha, Z.g, max_terms=4)
        expr_big = reineke_invert(alpha, Z.g, max_terms=24)
        err_small = abs(integrate_product(Z, expr_small) - direct)
        err_big = abs(integrate_product(Z, expr_big) - direct)
        rows.append((f"partial expansion converges for {tuple(alpha)}",
                     (err_big < err_small or err_big == err_small == SqrtExt(0, 0, Z.q)),
                     f"{len(expr_small.terms)} -> {len(expr_big.terms)} terms"))
    return rows


def quiver_suite(Q: Quiver, theta, dims=None, qs=(2, 3)) -> list:
    """Recursion, inversion and invariances against the exhaustive oracle."""
    from itertools import product

    theta = tuple(Fraction(x) for x in theta)
    if dims is None:
        dims = [d for d in product(range(3), repeat=Q.vertices)
                if any(d) and sum(d) <= 4]
    rows = []
    for d in dims:
        cells = sum(d[s] * d[t] for s, t in Q.arrows)
        for q in qs:
            if cells > 16 or q > 3:
                continue
            vss, strata = brute_force(Q, theta, d, q)
            rec = vol_ss_quiver(Q, theta, d, q)
            rows.append((f"brute force d={d} q={q}", rec == vss, f"{rec} vs {vss}"))
            total = sum(strata.values(), Fraction(0))
            rows.append((f"partition of unity d={d} q={q}",
                         total == vol_rep(Q, d, q), f"{total}"))
            rows.append((f"inversion d={d} q={q}",
                         reineke_vol_ss_quiver(Q, theta, d, q) == rec, ""))
            for t, volume in strata.items():
                predicted = Fraction(1, q) ** sum(
                    quiver_euler_form(Q, t[i], t[j])
                    for i in range(len(t)) for j in range(i + 1, len(t)))
                for part in t:
                    predicted *= vol_ss_quiver(Q, theta, part, q)
                if predicted != volume:
                    rows.append((f"stratum twist d={d} q={q} t={t}", False,
                                 f"{predicted} vs {volume}"))
                    break
        scaled = tuple(3 * x for x in theta)
        shifted = tuple(x + 7 for x in theta)
        base = enumerate_hn_types_quiver(d, theta)
        rows.append((f"theta scaling invariance d={d}",
                     enumerate_hn_types_quiver(d, scaled) == base, ""))
        rows.append((f"theta shift invariance d={d}",
                     enumerate_hn_types_quiver(d, shifted) == base, ""))
    return rows


def run_suites(which: str, q=2, window=-4, quiver_path=None, zeta_path=None,
               alpha=(2, 0)):
    """Assemble the requested suite rows; `which` in p1|quiver|inversion|all."""
    from .curves import load_zeta
    from .quiver import load_quiver
    rows = []
    if which in ("p1", "all"):
        rows += p1_suite(q, window)
        if which == "all":
            rows += p1_suite(3, max(window, -4))
    if which in ("quiver", "all"):
        if quiver_path is not None:
            Q, theta = load_quiver(quiver_path)
            rows += quiver_suite(Q, theta)
        else:
            rows += quiver_suite(Quiver(2, ((0, 1), (0, 1))), (1, 0),
                                 dims=[(1, 1), (1, 2), (2, 2)])
            rows += quiver_suite(Quiver(2, ((0, 1),)), (1, 0),
                                 dims=[(1, 1), (2, 1), (2, 2)])
    if which in ("inversion", "all"):
        Z = load_zeta(zeta_path) if zeta_path is not None else p1_datum(q)
        rows += inversion_suite(Z, alpha)
        if which == "all":
            for extra in [(1, -1), (2, 1), (3, 0)]:
                rows += inversion_suite(Z, extra)
    return rows
