"""Valid inequalities, encoding translations and symmetry breaking.

Cuts are generated over the refined-unary precedence binaries ``z_s_p_q``
(``z^s_{p,q} = 1`` means box ``p`` precedes box ``q`` along ``s``) or, for
the literature families, over the unary binaries ``u_s_p_q``. They are then
translated into the code variables of the target formulation:

* ``C8``  refined unary, identity on ``z``
* ``U4``  unary, ``z -> u``
* ``U4v`` big-M unary and extended, ``z -> v`` in branch order
* ``GB4`` Gray binary, affine map of ``(w1, w2)``
* ``BB4`` BLDP1 codes, affine map of ``(y1, y2)``

The affine maps send every code to a vector that is componentwise below the
refined code of any layout in that branch. A cut whose code coefficients are
nonnegative in ``<=`` form therefore stays valid after substitution.
"""

from __future__ import annotations

import itertools
import re
import warnings
from dataclasses import dataclass, field

from . import names
from .instance import AXES, BoxBounds, FlpInstance
from .milp.model import Constraint, LinExpr

CUT_LEVELS = ("none", "plus", "vi", "vi3")
TARGETS = ("C8", "U4", "U4v", "GB4", "BB4")


class CutError(ValueError):
    pass


class CutTranslationError(CutError):
    pass


@dataclass
class LinearCut:
    coeffs: dict[str, float]
    sense: str
    rhs: float
    tag: str
    family: str = ""
    codes: str = "z"  # code family the cut is written in: "z" or "u"

    @classmethod
    def from_constraint(cls, con: Constraint, tag: str, family: str, codes: str = "z") -> "LinearCut":
        return cls(dict(con.coeffs), con.sense, con.rhs, tag, family, codes)

    def constraint(self) -> Constraint:
        return Constraint(dict(self.coeffs), self.sense, self.rhs, self.tag)

    def violation(self, point) -> float:
        return self.constraint().violation(point)


# ---------------------------------------------------------------------------
# helpers


def _x(name: str) -> LinExpr:
    return LinExpr({name: 1.0})


def C(s, k):
    return _x(names.c(s, k))


def W(s, k):
    return _x(names.l(s, k))


def D(s, i, j):
    return _x(names.d(s, i, j))


def Z(s, p, q, fam="z"):
    return _x(names.prec(fam, s, p, q))


def _other(s: str) -> str:
    return "y" if s == "x" else "x"


def _cut(con: Constraint, tag: str, family: str, codes: str = "z") -> LinearCut:
    return LinearCut.from_constraint(con, tag, family, codes)


# ---------------------------------------------------------------------------
# pairwise families


def ub_cuts(i: int, j: int, bounds: BoxBounds, floor: dict[str, float]) -> list[LinearCut]:
    """Upper-bound cuts: ``c_p + ub_q (1 - z_qp) >= l_p/2 + l_q`` and the gated cover row.

    The first family does not depend on the second axis, so each of its four
    distinct rows is emitted once.
    """
    out = []
    for s in AXES:
        for p, q in ((i, j), (j, i)):
            ubq = bounds.upper(q, s)
            con = C(s, p) + ubq * (1 - Z(s, q, p)) >= 0.5 * W(s, p) + W(s, q)
            out.append(_cut(con, f"cut_ub1_{s}_{p}_{q}", "ub1"))
    out.extend(ub_cover_cuts(i, j, bounds, floor))
    return out


def ub_cover_cuts(i, j, bounds, floor, fam: str = "z") -> list[LinearCut]:
    """``z^r_pq + z^r_qp >= (l^s_p + l^s_q - L^s) / (ub^s_p + ub^s_q - L^s)`` when ``L^s < ub_p + ub_q``."""
    out = []
    for s in AXES:
        r = _other(s)
        ubsum = bounds.upper(i, s) + bounds.upper(j, s)
        if not floor[s] < ubsum:
            continue
        denom = ubsum - floor[s]
        con = Z(r, i, j, fam) + Z(r, j, i, fam) >= (W(s, i) + W(s, j) - floor[s]) / denom
        out.append(_cut(con, f"cut_ub2_{r}_{i}_{j}", "ub2", fam))
    return out


def objective_cuts(i: int, j: int, bounds: BoxBounds, floor: dict[str, float]) -> list[LinearCut]:
    """Lower bounds on the distance variables ``d^s_ij`` in terms of ``z``."""
    out = []
    for s in AXES:
        L = floor[s]
        both = Z(s, i, j) + Z(s, j, i)
        d = D(s, i, j)
        out.append(_cut(d >= 0.5 * (W(s, i) + W(s, j)) - L * (1 - both), f"cut_obj1_{s}_{i}_{j}", "obj1"))
        for p, q in ((i, j), (j, i)):
            lbp, lbq = bounds.lower(p, s), bounds.lower(q, s)
            zpq = Z(s, p, q)
            out.append(_cut(
                d >= C(s, p) - C(s, q) + W(s, p) + lbq * both - L * (1 - zpq),
                f"cut_obj2_{s}_{p}_{q}", "obj2",
            ))
            out.append(_cut(d >= C(s, p) - C(s, q) + (lbp + lbq) * zpq, f"cut_obj3_{s}_{p}_{q}", "obj3"))
            out.append(_cut(
                2 * d >= W(s, p) - L * (1 - both) + lbq * both,
                f"cut_obj4_{s}_{p}_{q}", "obj4",
            ))
    return out


def tight_sitb_cuts(i: int, j: int, bounds: BoxBounds, floor: dict[str, float]) -> list[LinearCut]:
    out = []
    for s in AXES:
        for p, q in ((i, j), (j, i)):
            lbq = bounds.lower(q, s)
            out.append(_cut(0.5 * W(s, p) + lbq * Z(s, q, p) <= C(s, p), f"cut_tsitb_lo_{s}_{p}_{q}", "tsitb"))
            out.append(_cut(
                C(s, p) <= floor[s] - 0.5 * W(s, p) - lbq * Z(s, p, q), f"cut_tsitb_hi_{s}_{p}_{q}", "tsitb"
            ))
    return out


def literature_cuts(i: int, j: int, bounds: BoxBounds, floor: dict[str, float], kind: str) -> list[LinearCut]:
    """B2 and V2 rows, written over the unary binaries ``u``.

    V2 is ``d >= (l_i + l_j)/2 - (ub_i + ub_j)/2 * (1 - u_ij - u_ji)``.
    """
    out = []
    for s in AXES:
        both = Z(s, i, j, "u") + Z(s, j, i, "u")
        d = D(s, i, j)
        if kind == "B2":
            coef = 0.5 * (bounds.lower(i, s) + bounds.lower(j, s))
            out.append(_cut(d >= coef * both, f"cut_b2_{s}_{i}_{j}", "B2", "u"))
        elif kind == "V2":
            # the widths may sum past L when the boxes sit side by side along the
            # other axis, so the coefficient is the largest possible width sum
            coef = 0.5 * (bounds.upper(i, s) + bounds.upper(j, s))
            out.append(_cut(d >= 0.5 * (W(s, i) + W(s, j)) - coef * (1 - both), f"cut_v2_{s}_{i}_{j}", "V2", "u"))
        else:
            raise CutError(f"unknown literature family {kind!r}")
    return out


# ---------------------------------------------------------------------------
# multi-box families


@dataclass(frozen=True)
class Path:
    """Ordered boxes ``t0 -> t1 -> ... -> t_{m+1}`` along one axis."""

    boxes: tuple[int, ...]
    axis: str

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))
        if len(self.boxes) < 3:
            raise CutError("a path needs at least one interior box")
        if len(set(self.boxes)) != len(self.boxes):
            raise CutError(f"path {self.boxes} repeats a box")
        if self.axis not in AXES:
            raise CutError(f"bad axis {self.axis!r}")

    @property
    def start(self) -> int:
        return self.boxes[0]

    @property
    def end(self) -> int:
        return self.boxes[-1]

    @property
    def interior(self) -> tuple[int, ...]:
        return self.boxes[1:-1]

    def edges(self):
        return list(zip(self.boxes[:-1], self.boxes[1:]))

    def gamma(self, bounds: BoxBounds) -> float:
        return sum(bounds.lower(t, self.axis) for t in self.interior)


def path_indicator(path: Path) -> LinExpr:
    """``1 + sum (z_edge - 1)``: equals 1 when every edge precedes, at most 0 otherwise."""
    expr = LinExpr(const=1.0)
    for a, b in path.edges():
        expr = expr + Z(path.axis, a, b) - 1
    return expr


MULTIBOX_FAMILIES = ("m1", "m2", "m3", "m4", "m5", "m6", "m7")


def multibox_cuts(path: Path, bounds: BoxBounds, floor: dict[str, float], families=MULTIBOX_FAMILIES) -> list[LinearCut]:
    """Pairwise rows for the path endpoints lifted by ``gamma_P * M_P(z)``.

    The ``m2`` family uses ``c_p - c_q`` for the chosen orientation ``(p, q)``.
    """
    s = path.axis
    i, j = path.start, path.end
    L = floor[s]
    g = path.gamma(bounds)
    M = g * path_indicator(path)
    both = Z(s, i, j) + Z(s, j, i)
    d = D(s, i, j)
    key = "_".join(map(str, path.boxes))
    out = []
    fams = set(families)
    if "m1" in fams:
        out.append(_cut(d >= 0.5 * (W(s, i) + W(s, j)) - L * (1 - both) + M, f"cut_m1_{s}_{key}", "m1"))
    for p, q in ((i, j), (j, i)):
        if "m2" in fams:
            con = d >= C(s, p) - C(s, q) + W(s, p) + bounds.lower(q, s) * both - L * (1 - Z(s, p, q)) + M
            out.append(_cut(con, f"cut_m2_{s}_{key}_{p}", "m2"))
    if "m3" in fams:
        con = d >= C(s, i) - C(s, j) + (bounds.lower(i, s) + bounds.lower(j, s)) * Z(s, i, j) + M
        out.append(_cut(con, f"cut_m3_{s}_{key}", "m3"))
    for p, q in ((i, j), (j, i)):
        if "m4" in fams:
            con = 2 * d >= W(s, p) + bounds.lower(q, s) * both - L * (1 - both) + 2 * M
            out.append(_cut(con, f"cut_m4_{s}_{key}_{p}", "m4"))
    if "m5" in fams:
        con = 0.5 * W(s, j) + bounds.lower(i, s) * Z(s, i, j) + M <= C(s, j)
        out.append(_cut(con, f"cut_m5_{s}_{key}", "m5"))
    if "m6" in fams:
        con = C(s, i) + M <= L - 0.5 * W(s, i) - bounds.lower(j, s) * Z(s, i, j)
        out.append(_cut(con, f"cut_m6_{s}_{key}", "m6"))
    if "m7" in fams:
        con = C(s, i) + 0.5 * W(s, i) + M <= C(s, j) - 0.5 * W(s, j) + L * (1 - Z(s, i, j))
        out.append(_cut(con, f"cut_m7_{s}_{key}", "m7"))
    return out


# ---------------------------------------------------------------------------
# symmetry breaking


def symmetry_pair(instance: FlpInstance) -> tuple[int, int] | None:
    best = None
    for (i, j), p in sorted(instance.costs.items()):
        if p > 0 and (best is None or p > best[0]):
            best = (p, (i, j))
    return None if best is None else best[1]


def symmetry_breaking(instance: FlpInstance, bounds: BoxBounds) -> list[LinearCut]:
    """Order the most expensive pair ``p < q``: ``c_p <= c_q``, ``q`` never precedes ``p``."""
    pair = symmetry_pair(instance)
    if pair is None:
        if instance.n >= 2:
            warnings.warn("all costs are zero; symmetry breaking skipped", stacklevel=2)
        return []
    p, q = pair
    out = []
    for s in AXES:
        out.append(_cut(C(s, p) <= C(s, q), f"sym_order_{s}_{p}_{q}", "sym"))
    for s in AXES:
        out.append(_cut(Z(s, q, p) <= 0, f"sym_fix_{s}_{q}_{p}", "sym"))
    sep = 0.5 * min(bounds.lower(p, "x") + bounds.lower(q, "x"), bounds.lower(p, "y") + bounds.lower(q, "y"))
    con = (C("x", q) - C("x", p)) + (C("y", q) - C("y", p)) >= sep
    out.append(_cut(con, f"sym_sep_{p}_{q}", "sym"))
    return out


# ---------------------------------------------------------------------------
# translations

_CODE_RE = re.compile(r"^([zu])_([xy])_(\d+)_(\d+)$")

# (const, coef of bit 1, coef of bit 2) for slots (y,i,j), (x,i,j), (y,j,i), (x,j,i)
GB_MAP = ((1.0, -1.0, -1.0), (0.0, 1.0, -1.0), (-1.0, 1.0, 1.0), (0.0, -1.0, 1.0))
BB_MAP = ((1.0, -1.0, -1.0), (-1.0, 1.0, 1.0), (0.0, 1.0, -1.0), (0.0, -1.0, 1.0))


def parse_code_var(name: str):
    m = _CODE_RE.match(name)
    if not m:
        return None
    fam, s, p, q = m.group(1), m.group(2), int(m.group(3)), int(m.group(4))
    return fam, s, p, q


def slot_index(s: str, p: int, q: int) -> int:
    return (0 if s == "y" else 1) + (0 if p < q else 2)


def affine_map(target: str, s: str, p: int, q: int) -> LinExpr:
    """Image of the slot ``z^s_{p,q}`` under the encoding map of ``target``."""
    a, b = min(p, q), max(p, q)
    k = slot_index(s, p, q)
    if target == "C8":
        return Z(s, p, q)
    if target == "U4":
        return Z(s, p, q, "u")
    if target == "U4v":
        return _x(names.code("v", a, b, k + 1))
    if target in ("GB4", "BB4"):
        fam = "w" if target == "GB4" else "y"
        const, c1, c2 = (GB_MAP if target == "GB4" else BB_MAP)[k]
        return LinExpr({names.code(fam, a, b, 1): c1, names.code(fam, a, b, 2): c2}, const)
    raise CutTranslationError(f"unknown target encoding {target!r}")


def _le_form(cut: LinearCut) -> list[tuple[dict[str, float], float]]:
    return cut.constraint().as_le()


def lift_cut(cut: LinearCut) -> LinearCut:
    """Rewrite a unary cut over ``z``; each pair's code terms must lie on a single axis."""
    if cut.codes != "u":
        raise CutTranslationError(f"{cut.tag}: lift expects a cut over u")
    axes_per_pair: dict[tuple[int, int], set[str]] = {}
    for n, v in cut.coeffs.items():
        parsed = parse_code_var(n)
        if parsed and v != 0:
            _, s, p, q = parsed
            axes_per_pair.setdefault((min(p, q), max(p, q)), set()).add(s)
    for pair, axes in axes_per_pair.items():
        if len(axes) > 1:
            raise CutTranslationError(
                f"{cut.tag}: code coefficients of pair {pair} use both axes; lift needs one axis all zero"
            )
    coeffs = {}
    for n, v in cut.coeffs.items():
        parsed = parse_code_var(n)
        coeffs[names.prec("z", *parsed[1:]) if parsed else n] = v
    return LinearCut(coeffs, cut.sense, cut.rhs, cut.tag, cut.family, "z")


def translate_cut(cut: LinearCut, target: str) -> LinearCut:
    """Express ``cut`` in the code variables of ``target``.

    Cuts written over ``u`` are renamed for unary targets and lifted to ``z``
    otherwise. Cuts over ``z`` need nonnegative code coefficients in ``<=``
    form unless the target is ``C8``.
    """
    if target not in TARGETS:
        raise CutTranslationError(f"unknown target encoding {target!r}")
    if cut.codes == "u":
        if target in ("U4", "U4v"):
            return _substitute(cut, target, check=False)
        cut = lift_cut(cut)
    if target == "C8":
        return cut
    return _substitute(cut, target, check=True)


def _substitute(cut: LinearCut, target: str, check: bool) -> LinearCut:
    rows = _le_form(cut)
    if check:
        for coeffs, _ in rows:
            for n, v in coeffs.items():
                if parse_code_var(n) and v < 0:
                    raise CutTranslationError(
                        f"{cut.tag}: code coefficient {v:g} on {n} is negative in <= form"
                    )
    out = LinExpr()
    for n, v in cut.coeffs.items():
        parsed = parse_code_var(n)
        if parsed:
            out = out + v * affine_map(target, *parsed[1:])
        else:
            out = out + LinExpr({n: v})
    con = Constraint.from_sides(out, cut.sense, cut.rhs)
    return LinearCut(con.coeffs, con.sense, con.rhs, cut.tag, cut.family, target)


# ---------------------------------------------------------------------------
# selection


def top_pairs(instance: FlpInstance, count: int) -> list[tuple[int, int]]:
    ranked = sorted(instance.pairs(), key=lambda ij: (-instance.cost(*ij), ij))
    return ranked[:count]


def top_triplets(instance: FlpInstance, count: int) -> list[tuple[int, int, int]]:
    def score(t):
        i, j, k = t
        return instance.cost(i, j) + instance.cost(i, k) + instance.cost(j, k)

    triples = itertools.combinations(range(1, instance.n + 1), 3)
    ranked = sorted(triples, key=lambda t: (-score(t), t))
    return ranked[:count]


def triplet_paths(triplets) -> list[Path]:
    return [Path(perm, s) for t in triplets for perm in itertools.permutations(t) for s in AXES]


@dataclass
class CutSelection:
    level: str
    cuts: list[LinearCut] = field(default_factory=list)
    pairs: list[tuple[int, int]] = field(default_factory=list)
    triplets: list[tuple[int, int, int]] = field(default_factory=list)


def select_cut_subset(
    instance: FlpInstance,
    level: str,
    bounds: BoxBounds,
    refined: bool = False,
    tight_sitb: bool = True,
) -> CutSelection:
    """Cuts of a level, before translation.

    ``plus`` adds B2 and V2 on every pair. ``vi`` adds to that the objective,
    upper-bound and three-box placement cuts on the ``N`` costliest pairs and
    the ``N`` costliest triplets (all six orders, both axes); with
    ``refined=True`` also the cover rows and the tightened stay-on-floor rows.
    ``vi3`` further adds the three-box distance cuts on the same paths.
    """
    if level not in CUT_LEVELS:
        raise CutError(f"unknown cut level {level!r}")
    floor = {s: instance.floor(s) for s in AXES}
    sel = CutSelection(level)
    if level == "none":
        return sel
    for i, j in instance.pairs():
        sel.cuts += literature_cuts(i, j, bounds, floor, "B2")
        sel.cuts += literature_cuts(i, j, bounds, floor, "V2")
    if level == "plus":
        return sel
    n = instance.n
    sel.pairs = top_pairs(instance, n)
    for i, j in sel.pairs:
        sel.cuts += objective_cuts(i, j, bounds, floor)
        sel.cuts += [c for c in ub_cuts(i, j, bounds, floor) if c.family == "ub1"]
        if refined:
            sel.cuts += ub_cover_cuts(i, j, bounds, floor)
            if tight_sitb:
                sel.cuts += tight_sitb_cuts(i, j, bounds, floor)
    sel.triplets = top_triplets(instance, n) if n >= 3 else []
    paths = triplet_paths(sel.triplets)
    for path in paths:
        sel.cuts += multibox_cuts(path, bounds, floor, ("m5", "m6", "m7"))
    if level == "vi3":
        for path in paths:
            sel.cuts += multibox_cuts(path, bounds, floor, ("m1", "m2", "m3", "m4"))
    return sel
