"""Pairwise formulations of the non-overlap disjunction for one pair of boxes.

Every builder adds rows over shared box variables ``c_s_k`` / ``l_s_k`` plus
its own binaries to an existing model. :func:`pairwise_model` wraps a single
pair with its ground set into a standalone model.
"""

from __future__ import annotations

import math

from .. import names
from ..embedding import D4_ORDER
from ..instance import AXES, BoxBounds
from ..milp.model import LinExpr, MilpModel, eq, lin_sum

BIGM_UNARY = "bigm_unary"
UNARY = "unary"
GRAY_BINARY = "gray_binary"
BLDP1 = "bldp1"
SEQUENCE_PAIR = "sequence_pair"
REFINED_UNARY = "refined_unary"
EXTENDED = "extended"

KINDS = (BIGM_UNARY, UNARY, GRAY_BINARY, BLDP1, SEQUENCE_PAIR, REFINED_UNARY, EXTENDED)

ALIASES = {
    "u-bigm": BIGM_UNARY,
    "u": UNARY,
    "gray": GRAY_BINARY,
    "bldp1": BLDP1,
    "sp": SEQUENCE_PAIR,
    "ru": REFINED_UNARY,
    "ext": EXTENDED,
}
SHORT_NAMES = {v: k for k, v in ALIASES.items()}

# code family per kind, used when translating cuts written over z
KIND_TARGET = {
    BIGM_UNARY: "U4v",
    UNARY: "U4",
    GRAY_BINARY: "GB4",
    SEQUENCE_PAIR: "GB4",
    BLDP1: "BB4",
    REFINED_UNARY: "C8",
    EXTENDED: None,
}


class FormulationError(ValueError):
    pass


def resolve_kind(kind: str) -> str:
    k = ALIASES.get(kind, kind)
    if k not in KINDS:
        raise FormulationError(f"unknown formulation kind {kind!r}")
    return k


def _v(name: str) -> LinExpr:
    return LinExpr({name: 1.0})


def C(axis, box):
    return _v(names.c(axis, box))


def W(axis, box):
    return _v(names.l(axis, box))


def prec_expr(p: int, q: int, axis: str) -> LinExpr:
    """``c_p + l_p/2 - (c_q - l_q/2)``; nonpositive iff ``p`` precedes ``q``."""
    return C(axis, p) + 0.5 * W(axis, p) - C(axis, q) + 0.5 * W(axis, q)


def code_names(kind: str, i: int, j: int) -> list[str]:
    """Binary variable names of the pair fragment, in their natural order."""
    kind = resolve_kind(kind)
    if kind == UNARY:
        return [names.prec("u", s, p, q) for s, p, q in _slots(i, j)]
    if kind == REFINED_UNARY:
        return [names.prec("z", s, p, q) for s, p, q in _slots(i, j)]
    if kind in (BIGM_UNARY, EXTENDED):
        return [names.code("v", i, j, k) for k in range(1, 5)]
    if kind in (GRAY_BINARY, SEQUENCE_PAIR):
        return [names.code("w", i, j, k) for k in (1, 2)]
    return [names.code("y", i, j, k) for k in (1, 2)]


def _slots(i: int, j: int):
    """Precedence slots in code order ``(y,i,j), (x,i,j), (y,j,i), (x,j,i)``."""
    for axis, flip in D4_ORDER:
        yield (axis, j, i) if flip else (axis, i, j)


# ---------------------------------------------------------------------------
# ground set pieces


def add_box(model: MilpModel, box: int, bounds: BoxBounds, floor: dict[str, float], width_ub: bool = True) -> None:
    for s in AXES:
        model.add_var(names.c(s, box), 0.0, floor[s])
    for s in AXES:
        upper = bounds.upper(box, s) if width_ub else floor[s]
        model.add_var(names.l(s, box), bounds.lower(box, s), upper)


def add_sitb(model: MilpModel, box: int, floor: dict[str, float]) -> None:
    """Box inside the floor: ``l/2 <= c <= L - l/2``."""
    for s in AXES:
        model.add(C(s, box) - 0.5 * W(s, box) >= 0, name=f"sitb_lo_{s}_{box}")
        model.add(C(s, box) + 0.5 * W(s, box) <= floor[s], name=f"sitb_hi_{s}_{box}")


def tight_sitb_rows(family: str, i: int, j: int, bounds: BoxBounds, floor: dict[str, float]):
    """Stay-on-floor rows tightened by the partner's minimum width."""
    rows = []
    for s in AXES:
        for p, q in ((i, j), (j, i)):
            b_qp = _v(names.prec(family, s, q, p))
            b_pq = _v(names.prec(family, s, p, q))
            lbq = bounds.lower(q, s)
            rows.append((0.5 * W(s, p) + lbq * b_qp <= C(s, p)).named(f"tsitb_lo_{s}_{p}_{q}"))
            rows.append((C(s, p) <= floor[s] - 0.5 * W(s, p) - lbq * b_pq).named(f"tsitb_hi_{s}_{p}_{q}"))
    return rows


# ---------------------------------------------------------------------------
# pair fragments


def add_pair(
    model: MilpModel,
    kind: str,
    i: int,
    j: int,
    bounds: BoxBounds,
    floor: dict[str, float],
    tight_sitb: bool = False,
    priority: int = 0,
) -> None:
    """Append the pair fragment of ``kind`` for boxes ``i < j`` to ``model``."""
    kind = resolve_kind(kind)
    if not i < j:
        raise FormulationError(f"pair must satisfy i<j, got ({i}, {j})")
    for box in (i, j):
        for s in AXES:
            if not model.has_var(names.c(s, box)):
                raise FormulationError(f"box {box} is not in the model")
    builder = _BUILDERS[kind]
    if tight_sitb and kind not in (UNARY, REFINED_UNARY):
        raise FormulationError("tightened stay-on-floor rows exist only for unary and refined unary")
    builder(model, i, j, bounds, floor, tight_sitb, priority)


def _bigm_unary(model, i, j, bounds, floor, tight, prio):
    v = [model.add_binary(n, prio) for n in code_names(BIGM_UNARY, i, j)]
    for k, (s, p, q) in enumerate(_slots(i, j)):
        model.add(prec_expr(p, q, s) <= floor[s] * (1 - v[k]), name=f"bigm_{k + 1}_{i}_{j}")
    model.add(eq(lin_sum(v), 1), name=f"sum_v_{i}_{j}")


def _unary(model, i, j, bounds, floor, tight, prio):
    u = {}
    for s, p, q in _slots(i, j):
        u[s, p, q] = model.add_binary(names.prec("u", s, p, q), prio)
    if tight:
        model.add_all(tight_sitb_rows("u", i, j, bounds, floor))
    for s in AXES:
        for p, q in ((i, j), (j, i)):
            model.add(prec_expr(p, q, s) <= floor[s] * (1 - u[s, p, q]), name=f"nov_{s}_{p}_{q}")
    model.add(eq(lin_sum(u.values()), 1), name=f"sum_u_{i}_{j}")


# big-M coefficients of the two-bit formulations, per D4 branch: (const, w1, w2)
_GRAY_R = ((0, 1, 1), (1, -1, 1), (2, -1, -1), (1, 1, -1))
_BLDP1_R = ((0, 1, 1), (2, -1, -1), (1, -1, 1), (1, 1, -1))


def _two_bit(kind, R):
    def build(model, i, j, bounds, floor, tight, prio):
        b1, b2 = (model.add_binary(n, prio) for n in code_names(kind, i, j))
        for k, (s, p, q) in enumerate(_slots(i, j)):
            const, a1, a2 = R[k]
            model.add(prec_expr(p, q, s) <= floor[s] * (const + a1 * b1 + a2 * b2), name=f"bin_{k + 1}_{i}_{j}")
    return build


def _refined_unary(model, i, j, bounds, floor, tight, prio):
    z = {}
    for s, p, q in _slots(i, j):
        z[s, p, q] = model.add_binary(names.prec("z", s, p, q), prio)
    if tight:
        model.add_all(tight_sitb_rows("z", i, j, bounds, floor))
    for s in AXES:
        for p, q in ((i, j), (j, i)):
            model.add(prec_expr(p, q, s) <= floor[s] * (1 - z[s, p, q]), name=f"nov_{s}_{p}_{q}")
    model.add(lin_sum(z.values()) >= 1, name=f"cover_{i}_{j}")
    for s in AXES:
        model.add(z[s, i, j] + z[s, j, i] <= 1, name=f"excl_{s}_{i}_{j}")
    for s in AXES:
        both = z[s, i, j] + z[s, j, i]
        lbsum = bounds.lower(i, s) + bounds.lower(j, s)
        for p, q in ((i, j), (j, i)):
            lhs = C(s, p) + 0.5 * W(s, p) + floor[s] * z[s, p, q]
            model.add(lhs >= C(s, q) - 0.5 * W(s, q) + lbsum * both, name=f"nprec_{s}_{p}_{q}")


def _extended(model, i, j, bounds, floor, tight, prio):
    v = [model.add_binary(n, prio) for n in code_names(EXTENDED, i, j)]
    copies_c = {}
    copies_l = {}
    for k in range(1, 5):
        for box in (i, j):
            for s in AXES:
                cc = model.add_var(names.copy_c(s, box, i, j, k), 0.0, floor[s])
                lc = model.add_var(names.copy_l(s, box, i, j, k), 0.0, model.variable(names.l(s, box)).ub)
                copies_c[s, box, k] = cc
                copies_l[s, box, k] = lc
                vk = v[k - 1]
                model.add(0.5 * lc <= cc, name=f"ext_lo_{s}_{box}_{i}_{j}_{k}")
                model.add(cc <= floor[s] * vk - 0.5 * lc, name=f"ext_hi_{s}_{box}_{i}_{j}_{k}")
                ub = model.variable(names.l(s, box)).ub
                model.add(bounds.lower(box, s) * vk <= lc, name=f"ext_lb_{s}_{box}_{i}_{j}_{k}")
                model.add(lc <= ub * vk, name=f"ext_ub_{s}_{box}_{i}_{j}_{k}")
    for k, (s, p, q) in enumerate(_slots(i, j), start=1):
        expr = copies_c[s, p, k] - copies_c[s, q, k] + 0.5 * (copies_l[s, p, k] + copies_l[s, q, k])
        model.add(expr <= 0, name=f"ext_br_{k}_{i}_{j}")
    for box in (i, j):
        for s in AXES:
            model.add(eq(lin_sum(copies_c[s, box, k] for k in range(1, 5)), C(s, box)), name=f"ext_aggc_{s}_{box}_{i}_{j}")
            model.add(eq(lin_sum(copies_l[s, box, k] for k in range(1, 5)), W(s, box)), name=f"ext_aggl_{s}_{box}_{i}_{j}")
    model.add(eq(lin_sum(v), 1), name=f"sum_v_{i}_{j}")


_BUILDERS = {
    BIGM_UNARY: _bigm_unary,
    UNARY: _unary,
    GRAY_BINARY: _two_bit(GRAY_BINARY, _GRAY_R),
    SEQUENCE_PAIR: _two_bit(SEQUENCE_PAIR, _GRAY_R),
    BLDP1: _two_bit(BLDP1, _BLDP1_R),
    REFINED_UNARY: _refined_unary,
    EXTENDED: _extended,
}


def floor_map(floor) -> dict[str, float]:
    if isinstance(floor, dict):
        return floor
    fx, fy = floor
    return {"x": float(fx), "y": float(fy)}


def pairwise_model(
    kind: str,
    pair: tuple[int, int],
    bounds: BoxBounds,
    floor,
    tight_sitb: bool | None = None,
    width_ub: bool = True,
    simple_sitb: bool | None = None,
) -> MilpModel:
    """Standalone model of one pair fragment with its ground set.

    For unary and refined unary the tightened stay-on-floor rows are part of
    the display and replace the simple ones by default. ``width_ub=False``
    drops the width upper bounds (the ``Q^lb`` ground set).
    """
    kind = resolve_kind(kind)
    i, j = pair
    floor = floor_map(floor)
    if tight_sitb is None:
        tight_sitb = kind in (UNARY, REFINED_UNARY)
    if simple_sitb is None:
        simple_sitb = not tight_sitb
    model = MilpModel(f"{SHORT_NAMES[kind]}-pair-{i}-{j}")
    for box in (i, j):
        add_box(model, box, bounds, floor, width_ub)
    if simple_sitb:
        for box in (i, j):
            add_sitb(model, box, floor)
    add_pair(model, kind, i, j, bounds, floor, tight_sitb)
    model.meta.update(kind=kind, pair=(i, j), bounds=bounds, floor=floor)
    return model


# ---------------------------------------------------------------------------
# global pieces


def sequence_pair_globals(n: int, w: dict | None = None):
    """Triangle rows ``w^ij_t + w^jk_t + w^ki_t <= 2`` with flipped reversed pairs.

    One row per ordered triple of distinct boxes and per coordinate, so the
    cyclic rotations of a triple appear as repeated rows.
    """
    rows = []
    if n < 3:
        return rows

    def hat(p, q, t):
        if p < q:
            return _v(names.code("w", p, q, t))
        return 1 - _v(names.code("w", q, p, t))

    for i in range(1, n + 1):
        for j in range(1, n + 1):
            for k in range(1, n + 1):
                if len({i, j, k}) < 3:
                    continue
                for t in (1, 2):
                    rows.append((hat(i, j, t) + hat(j, k, t) + hat(k, i, t) <= 2).named(f"sp_{t}_{i}_{j}_{k}"))
    return rows


def tangent_points(lo: float, hi: float, K: int) -> list[float]:
    if K <= 0:
        return []
    if K == 1 or hi <= lo:
        return [math.sqrt(lo * hi)]
    ratio = hi / lo
    pts = [lo * ratio ** (k / (K - 1)) for k in range(K)]
    out = []
    for x in pts:
        if not out or abs(x - out[-1]) > 1e-12 * max(1.0, x):
            out.append(x)
    return out


def area_outer_approx(box: int, area: float, lb_x: float, ub_x: float, K: int):
    """Tangents ``(a/x^2) l_x + l_y >= 2a/x`` to ``l_x l_y = a`` at geometrically spaced ``x``."""
    rows = []
    for k, x in enumerate(tangent_points(lb_x, ub_x, K)):
        rows.append((area / (x * x) * W("x", box) + W("y", box) >= 2 * area / x).named(f"area_{box}_{k}"))
    return rows


def area_tangent_at(box: int, area: float, x: float, tag: str):
    return (area / (x * x) * W("x", box) + W("y", box) >= 2 * area / x).named(f"area_{box}_{tag}")
