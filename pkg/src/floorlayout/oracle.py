"""Ground truth: brute-force optimum, layout checks, feasible-point sampling, vertices.

Everything here solves its LPs with HiGHS through :mod:`scipy.optimize` so
the answers do not depend on the package's own simplex.
"""

from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from . import names
from .embedding import BB4, C8, GB4, U4, d4_disjunction, d8_disjunction
from .formulations.pairwise import EXTENDED, KIND_TARGET, add_box, add_sitb, area_outer_approx, code_names
from .instance import AXES, BoxBounds, FlpInstance, Layout, derive_bounds
from .milp.model import MilpModel

FEAS_TOL = 1e-6
MAX_N = {"d4": 4, "d8": 3}
TARGET_ENCODING = {"U4v": U4, "U4": U4, "GB4": GB4, "BB4": BB4, "C8": C8, None: U4}


class OracleError(ValueError):
    pass


# ---------------------------------------------------------------------------
# brute force


@dataclass
class OracleResult:
    status: str  # "optimal" or "infeasible"
    value: float | None
    layout: Layout | None
    assignment: tuple[int, ...] | None  # 0-based branch per pair
    lps: int


def ground_model(instance: FlpInstance, area_k: int = 8, bounds: BoxBounds | None = None) -> MilpModel:
    """Boxes on the floor with width bounds, area tangents and the distance linearization."""
    bounds = bounds or derive_bounds(instance)
    floor = {s: instance.floor(s) for s in AXES}
    m = MilpModel(f"{instance.name}-ground")
    for box in range(1, instance.n + 1):
        add_box(m, box, bounds, floor)
        add_sitb(m, box, floor)
    obj = {}
    for i, j in instance.pairs():
        for s in AXES:
            d = m.add_var(names.d(s, i, j), 0.0, floor[s])
            ci, cj = m.var(names.c(s, i)), m.var(names.c(s, j))
            m.add(d >= ci - cj)
            m.add(d >= cj - ci)
            obj[names.d(s, i, j)] = instance.cost(i, j)
    m.set_objective(obj)
    for spec in instance.boxes:
        m.add_all(area_outer_approx(spec.id, spec.area, bounds.lower(spec.id, "x"), bounds.upper(spec.id, "x"), area_k))
    return m


def _rows(model: MilpModel, cons):
    idx = {n: k for k, n in enumerate(model.names)}
    A = np.zeros((0, len(idx)))
    b = []
    rows = []
    for con in cons:
        for coeffs, rhs in con.as_le():
            row = np.zeros(len(idx))
            for k, v in coeffs.items():
                row[idx[k]] += v
            rows.append(row)
            b.append(rhs)
    if rows:
        A = np.array(rows)
    return A, np.array(b)


def _highs(c, A_ub, b_ub, lb, ub, A_eq=None, b_eq=None):
    res = linprog(c, A_ub=A_ub if len(b_ub) else None, b_ub=b_ub if len(b_ub) else None,
                  A_eq=A_eq, b_eq=b_eq, bounds=list(zip(lb, ub)), method="highs")
    return res


def brute_force_optimum(
    instance: FlpInstance,
    area_k: int = 8,
    variant: str = "d4",
    bounds: BoxBounds | None = None,
) -> OracleResult:
    """Minimum over every choice of one disjunction branch per pair.

    ``variant="d4"`` enumerates the four-branch disjunction (``N <= 4``);
    ``"d8"`` the eight-branch refinement (``N <= 3``).
    """
    if variant not in MAX_N:
        raise OracleError(f"unknown variant {variant!r}")
    if instance.n > MAX_N[variant]:
        raise OracleError(f"brute force with {variant} is limited to N <= {MAX_N[variant]}")
    base = ground_model(instance, area_k, bounds)
    c, A, senses, b, lb, ub = base.to_arrays()
    A_base, b_base = _rows(base, base.constraints)
    make = d4_disjunction if variant == "d4" else d8_disjunction
    pairs = instance.pairs()
    branch_rows = [[_rows(base, br) for br in make(i, j).branches] for i, j in pairs]

    best = (math.inf, None, None)
    lps = 0
    for assign in itertools.product(*(range(len(br)) for br in branch_rows)):
        blocks = [A_base] + [branch_rows[k][a][0] for k, a in enumerate(assign)]
        rhs = [b_base] + [branch_rows[k][a][1] for k, a in enumerate(assign)]
        res = _highs(c, np.vstack(blocks), np.concatenate(rhs), lb, ub)
        lps += 1
        if res.status == 0 and res.fun < best[0] - 1e-12:
            best = (float(res.fun), res.x, assign)
    if best[1] is None:
        return OracleResult("infeasible", None, None, None, lps)
    point = dict(zip(base.names, best[1]))
    return OracleResult("optimal", best[0], _layout(instance, point), best[2], lps)


def _layout(instance: FlpInstance, point) -> Layout:
    center = {(b, s): float(point[names.c(s, b)]) for b in range(1, instance.n + 1) for s in AXES}
    width = {(b, s): float(point[names.l(s, b)]) for b in range(1, instance.n + 1) for s in AXES}
    dist = {(i, j, s): abs(center[i, s] - center[j, s]) for i, j in instance.pairs() for s in AXES}
    return Layout(center, width, dist)


def layout_point(layout: Layout) -> dict[str, float]:
    """Model-variable view of a layout (centers, widths, exact distances)."""
    pt = {}
    for (b, s), v in layout.center.items():
        pt[names.c(s, b)] = v
    for (b, s), v in layout.width.items():
        pt[names.l(s, b)] = v
    boxes = layout.boxes
    for i, j in itertools.combinations(boxes, 2):
        for s in AXES:
            pt[names.d(s, i, j)] = abs(layout.center[i, s] - layout.center[j, s])
    return pt


# ---------------------------------------------------------------------------
# layout checks


@dataclass
class Verdict:
    name: str
    slack: float
    ok: bool


@dataclass
class PairVerdict:
    i: int
    j: int
    branches: list[str]
    ok: bool


@dataclass
class FeasibilityReport:
    floor: list[Verdict] = field(default_factory=list)
    widths: list[Verdict] = field(default_factory=list)
    areas: list[Verdict] = field(default_factory=list)
    pairs: list[PairVerdict] = field(default_factory=list)
    objective: float = 0.0

    CSV_HEADER = "feasible,objective,floor_ok,widths_ok,areas_ok,pairs_ok,min_area_slack"

    @property
    def feasible(self) -> bool:
        return all(v.ok for v in self.floor + self.widths + self.areas) and all(p.ok for p in self.pairs)

    def to_text(self) -> str:
        out = io.StringIO()
        out.write(f"feasible: {'yes' if self.feasible else 'no'}\n")
        out.write(f"objective: {self.objective:.10g}\n")
        for title, group in (("floor", self.floor), ("width", self.widths), ("area", self.areas)):
            for v in group:
                out.write(f"{title} {v.name}: {'ok' if v.ok else 'FAIL'} slack {v.slack:.6g}\n")
        for p in self.pairs:
            sat = " ".join(p.branches) if p.branches else "none"
            out.write(f"pair {p.i} {p.j}: {'ok' if p.ok else 'FAIL'} branches {sat}\n")
        return out.getvalue()

    def to_csv_row(self) -> str:
        min_area = min((v.slack for v in self.areas), default=math.inf)
        flags = [all(v.ok for v in g) for g in (self.floor, self.widths, self.areas)]
        flags.append(all(p.ok for p in self.pairs))
        cells = [str(int(self.feasible)), repr(self.objective)] + [str(int(f)) for f in flags] + [repr(min_area)]
        return ",".join(cells)


def check_layout(instance: FlpInstance, layout: Layout, bounds: BoxBounds | None = None, tol: float = FEAS_TOL) -> FeasibilityReport:
    """Check a layout against the floor, width bounds, areas and non-overlap."""
    bounds = bounds or derive_bounds(instance)
    for b in range(1, instance.n + 1):
        for s in AXES:
            if (b, s) not in layout.center or (b, s) not in layout.width:
                raise OracleError(f"layout lacks box {b} on axis {s}")
    rep = FeasibilityReport()
    for spec in instance.boxes:
        b = spec.id
        for s in AXES:
            lo, hi = layout.edges(b, s)
            slack = min(lo, instance.floor(s) - hi)
            rep.floor.append(Verdict(f"{b} {s}", slack, slack >= -tol))
            w = layout.width[b, s]
            slack = min(w - bounds.lower(b, s), bounds.upper(b, s) - w)
            rep.widths.append(Verdict(f"{b} {s}", slack, slack >= -tol))
        slack = layout.width[b, "x"] * layout.width[b, "y"] - spec.area
        rep.areas.append(Verdict(str(b), slack, slack >= -tol * max(1.0, spec.area)))
    point = layout_point(layout)
    for i, j in instance.pairs():
        D = d4_disjunction(i, j)
        sat = [D.labels[k] for k in D.satisfied(point, tol)]
        rep.pairs.append(PairVerdict(i, j, sat, bool(sat)))
    rep.objective = sum(
        instance.cost(i, j) * sum(abs(layout.center[i, s] - layout.center[j, s]) for s in AXES)
        for i, j in instance.pairs()
    )
    return rep


# ---------------------------------------------------------------------------
# sampling


@dataclass
class Sample:
    point: dict[str, float]
    codes: dict[tuple[int, int], tuple[int, ...]]
    branches: dict[tuple[int, int], int]  # D4 branch used to place the pair (0-based)


def _is_cut_row(name: str) -> bool:
    return name.startswith("cut_") or name.startswith("sym_")


def _code_vars(model: MilpModel) -> set[str]:
    return set(model.binaries())


def _random_widths(instance, bounds, rng):
    width = {}
    for spec in instance.boxes:
        b = spec.id
        for _ in range(1000):
            lx = math.exp(rng.uniform(math.log(bounds.lower(b, "x")), math.log(bounds.upper(b, "x"))))
            ly = spec.area / lx
            if rng.random() < 0.5:
                ly *= rng.uniform(1.0, 1.3)
            ly = min(ly, bounds.upper(b, "y"))
            if lx * ly >= spec.area * (1 - 1e-12) and ly >= bounds.lower(b, "y"):
                break
        else:
            raise OracleError(f"could not draw widths for box {b}")
        width[b, "x"], width[b, "y"] = lx, ly
    return width


def _place(instance, width, branch, rng):
    """LP over centers with fixed widths and one D4 branch per pair, random objective."""
    n = instance.n
    idx = {(b, s): k for k, (b, s) in enumerate((b, s) for b in range(1, n + 1) for s in AXES)}
    A, rhs = [], []
    for (i, j), k in branch.items():
        s, flip = (("y", 0), ("x", 0), ("y", 1), ("x", 1))[k]
        p, q = (j, i) if flip else (i, j)
        row = np.zeros(len(idx))
        row[idx[p, s]] += 1.0
        row[idx[q, s]] -= 1.0
        A.append(row)
        rhs.append(-0.5 * (width[p, s] + width[q, s]))
    lo = [0.5 * width[b, s] for (b, s) in idx]
    hi = [instance.floor(s) - 0.5 * width[b, s] for (b, s) in idx]
    if any(a > c for a, c in zip(lo, hi)):
        return None
    c = rng.uniform(-1.0, 1.0, len(idx))
    res = linprog(c, A_ub=np.array(A) if A else None, b_ub=np.array(rhs) if A else None,
                  bounds=list(zip(lo, hi)), method="highs")
    if res.status != 0:
        return None
    return {key: float(res.x[k]) for key, k in idx.items()}


def _pair_completion(kind: str, model: MilpModel, i: int, j: int, code, center, width) -> dict[str, float]:
    vals = dict(zip(code_names(kind, i, j), (float(b) for b in code)))
    if kind == EXTENDED:
        k_on = code.index(1) + 1
        for k in range(1, 5):
            for box in (i, j):
                for s in AXES:
                    on = k == k_on
                    vals[names.copy_c(s, box, i, j, k)] = center[box, s] if on else 0.0
                    vals[names.copy_l(s, box, i, j, k)] = width[box, s] if on else 0.0
    return vals


def sample_feasible_points(
    model: MilpModel,
    count: int,
    seed: int = 42,
    reflect_pair: tuple[int, int] | None = None,
    max_retries: int = 200,
    tol: float = FEAS_TOL,
) -> list[Sample]:
    """Integer-feasible points of an assembled model, ignoring its cut rows.

    Each sample draws widths on the true area curve region, a D4 branch per
    pair, places the boxes by an LP with a random objective, sets every
    distance to its exact value and picks a random feasible code per pair.
    With ``reflect_pair=(p, q)`` the layout is mirrored so that ``p`` is
    left of and below ``q`` (the region kept by symmetry breaking).
    """
    if count <= 0:
        return []
    meta = model.meta
    try:
        instance, bounds, kind = meta["instance"], meta["bounds"], meta["kind"]
    except KeyError as exc:
        raise OracleError("model was not built by assemble_nbox") from exc
    if reflect_pair is None and getattr(meta.get("options"), "symmetry", False):
        from .cuts import symmetry_pair

        reflect_pair = symmetry_pair(instance)
    enc = TARGET_ENCODING[KIND_TARGET[kind]]
    rng = np.random.default_rng(seed)
    base = model.copy()
    base.constraints = [c for c in base.constraints if not _is_cut_row(c.name)]
    pairs = instance.pairs()
    # rows that touch the code variables of exactly one pair
    bins = _code_vars(base)
    owner = {n: (i, j) for i, j in pairs for n in code_names(kind, i, j)}
    if kind == EXTENDED:
        for i, j in pairs:
            for k in range(1, 5):
                for box in (i, j):
                    for s in AXES:
                        owner[names.copy_c(s, box, i, j, k)] = (i, j)
                        owner[names.copy_l(s, box, i, j, k)] = (i, j)
    pair_rows = {p: [] for p in pairs}
    for con in base.constraints:
        touched = {owner[v] for v in con.coeffs if v in owner}
        if len(touched) == 1:
            pair_rows[touched.pop()].append(con)

    out: list[Sample] = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > count * max_retries:
            raise OracleError("sampler exceeded its retry budget")
        width = _random_widths(instance, bounds, rng)
        branch = {p: int(rng.integers(4)) for p in pairs}
        center = _place(instance, width, branch, rng)
        if center is None:
            continue
        if reflect_pair is not None:
            p, q = reflect_pair
            for s in AXES:
                if center[p, s] > center[q, s]:
                    for b in range(1, instance.n + 1):
                        center[b, s] = instance.floor(s) - center[b, s]
        point = {}
        for b in range(1, instance.n + 1):
            for s in AXES:
                point[names.c(s, b)] = center[b, s]
                point[names.l(s, b)] = width[b, s]
        for i, j in pairs:
            for s in AXES:
                point[names.d(s, i, j)] = abs(center[i, s] - center[j, s])
        options = {}
        for (i, j) in pairs:
            ok = []
            for code in enc.codes:
                trial = {**point, **_pair_completion(kind, base, i, j, code, center, width)}
                if all(r.violation(trial) <= tol for r in pair_rows[i, j]):
                    ok.append(code)
            options[i, j] = ok
        if any(not v for v in options.values()):
            continue
        for _ in range(20):
            codes = {p: options[p][int(rng.integers(len(options[p])))] for p in pairs}
            full = dict(point)
            for (i, j), code in codes.items():
                full.update(_pair_completion(kind, base, i, j, code, center, width))
            if base.max_violation(full) <= tol:
                out.append(Sample(full, codes, branch))
                break
    return out


# ---------------------------------------------------------------------------
# vertex enumeration


def enumerate_vertices(
    A_ub,
    b_ub,
    A_eq=None,
    b_eq=None,
    tol: float = 1e-7,
    max_dim: int = 14,
    max_bases: int = 500_000,
) -> np.ndarray:
    """All vertices of the bounded polytope ``{x : A_ub x <= b_ub, A_eq x = b_eq}``.

    Walks the graph of feasible bases of the standard form (slack per
    inequality, free variables split) by simplex pivots from a starting
    vertex; the set of feasible bases is connected, so every vertex is met.
    """
    A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
    n = A_ub.shape[1]
    if n > max_dim:
        raise OracleError(f"dimension {n} exceeds the limit {max_dim}")
    b_ub = np.asarray(b_ub, dtype=float)
    if A_eq is None or len(A_eq) == 0:
        A_eq, b_eq = np.zeros((0, n)), np.zeros(0)
    A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float)).reshape(-1, n)
    b_eq = np.asarray(b_eq, dtype=float)

    A_ub, b_ub = _drop_redundant(A_ub, b_ub, A_eq, b_eq)
    # a starting vertex; the variables are free, so shift by a lower bound box
    lows = np.empty(n)
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        res = linprog(e, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq if len(b_eq) else None, b_eq=b_eq if len(b_eq) else None,
                      bounds=[(None, None)] * n, method="highs")
        if res.status == 2:
            return np.zeros((0, n))
        if res.status != 0:
            raise OracleError("polytope is unbounded or the LP failed")
        lows[k] = res.fun
    # y = x - lows >= 0 is implied, so standard form over (y, slack)
    m1, m2 = A_ub.shape[0], A_eq.shape[0]
    A = np.zeros((m1 + m2, n + m1))
    A[:m1, :n] = A_ub
    A[:m1, n:] = np.eye(m1)
    A[m1:, :n] = A_eq
    b = np.concatenate([b_ub - A_ub @ lows, b_eq - A_eq @ lows])
    # drop redundant equality rows
    keep = _independent_rows(A)
    A, b = A[keep], b[keep]
    m = A.shape[0]

    res = linprog(np.zeros(n + m1), A_eq=A, b_eq=b, bounds=[(0, None)] * (n + m1), method="highs-ds")
    if res.status != 0:
        return np.zeros((0, n))
    y0 = res.x
    basis = _complete_basis(A, [k for k in np.argsort(-y0) if y0[k] > tol])
    # perturb b by B0 (eps, eps^2, ...): every basis met is then lexicographically
    # feasible and the ratio test has a unique winner, so degenerate vertices
    # split into a few simple ones instead of all their bases
    P = A[:, basis]
    seen = {frozenset(basis)}
    stack = [list(basis)]
    verts: dict[tuple, np.ndarray] = {}
    ncol = A.shape[1]
    while stack:
        B = stack.pop()
        AB = A[:, B]
        try:
            T = np.linalg.solve(AB, np.column_stack([b, P, A]))
        except np.linalg.LinAlgError:
            continue
        xB = T[:, 0]
        L = T[:, : m + 1]
        D = T[:, m + 1 :]
        y = np.zeros(ncol)
        y[B] = xB
        x = y[:n] + lows
        key = tuple(np.round(x / tol).astype(np.int64))
        verts.setdefault(key, x)
        inB = np.zeros(ncol, dtype=bool)
        inB[B] = True
        pos = D > 1e-9
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(pos, np.maximum(xB, 0.0)[:, None] / np.where(pos, D, 1.0), np.inf)
        best = ratio.min(axis=0)
        for j in np.flatnonzero(~inB & np.isfinite(best)):
            rows = np.flatnonzero(ratio[:, j] <= best[j] + 1e-9 * max(1.0, best[j]))
            r = rows[0] if rows.size == 1 else rows[_lex_min_row(L[rows] / D[rows, j, None])]
            nb = list(B)
            nb[r] = j
            fs = frozenset(nb)
            if fs in seen:
                continue
            seen.add(fs)
            if len(seen) > max_bases:
                raise OracleError("vertex enumeration exceeded its basis budget")
            stack.append(nb)
    V = np.array(list(verts.values()))
    # keep only points that satisfy the system; guards against ill-conditioned bases
    ok = (A_ub @ V.T <= b_ub[:, None] + 1e-6).all(axis=0)
    if len(b_eq):
        ok &= (np.abs(A_eq @ V.T - b_eq[:, None]) <= 1e-6).all(axis=0)
    return V[ok]


def _lex_min_row(R: np.ndarray, tol: float = 1e-9) -> int:
    Q = np.round(R / tol)
    return int(np.lexsort(Q.T[::-1])[0])


def _drop_redundant(A_ub, b_ub, A_eq, b_eq, tol: float = 1e-9):
    """Remove inequalities implied by the others (fewer ties at degenerate vertices)."""
    keep = list(range(len(b_ub)))
    eq = dict(A_eq=A_eq, b_eq=b_eq) if len(b_eq) else {}
    n = A_ub.shape[1]
    for r in range(len(b_ub)):
        others = [k for k in keep if k != r]
        res = linprog(-A_ub[r], A_ub=A_ub[others] if others else None, b_ub=b_ub[others] if others else None,
                      bounds=[(None, None)] * n, method="highs", **eq)
        if res.status == 0 and -res.fun <= b_ub[r] + tol * max(1.0, abs(b_ub[r])):
            keep.remove(r)
    return A_ub[keep], b_ub[keep]


def _independent_rows(A: np.ndarray) -> list[int]:
    keep, rank = [], 0
    for r in range(A.shape[0]):
        if np.linalg.matrix_rank(A[keep + [r]]) > rank:
            keep.append(r)
            rank += 1
    return keep


def _complete_basis(A: np.ndarray, start) -> list[int]:
    basis, rank = [], 0
    for j in list(start) + list(range(A.shape[1])):
        if j in basis:
            continue
        if np.linalg.matrix_rank(A[:, basis + [j]]) > rank:
            basis.append(j)
            rank += 1
        if rank == A.shape[0]:
            break
    return basis


def model_vertices(model: MilpModel, **kw) -> tuple[list[str], np.ndarray]:
    """Vertices of the LP relaxation of ``model``."""
    names_, A_ub, b_ub, A_eq, b_eq = model.relaxation_system()
    return names_, enumerate_vertices(A_ub, b_ub, A_eq, b_eq, **kw)


def fractional_vertices(model: MilpModel, tol: float = 1e-6, **kw) -> tuple[int, list[dict[str, float]]]:
    """Vertex count and the vertices whose binaries are not all within ``tol`` of 0/1."""
    names_, V = model_vertices(model, **kw)
    bidx = [names_.index(n) for n in model.binaries()]
    frac = []
    for v in V:
        b = v[bidx]
        if np.any(np.abs(b - np.round(b)) > tol):
            frac.append(dict(zip(names_, v)))
    return len(V), frac


__all__ = [
    "OracleError", "OracleResult", "brute_force_optimum", "ground_model", "layout_point", "Verdict",
    "PairVerdict", "FeasibilityReport", "check_layout", "Sample", "sample_feasible_points",
    "enumerate_vertices", "model_vertices", "fractional_vertices",
]
