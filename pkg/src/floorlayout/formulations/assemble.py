"""N-box models: shared box blocks, pair fragments, objective, area, cuts."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .. import cuts as cutlib
from .. import names
from ..instance import AXES, BoxBounds, FlpInstance, Layout, derive_bounds
from ..milp.bnb import SolveResult, solve_milp
from ..milp.model import LinExpr, MilpModel
from .pairwise import (
    EXTENDED,
    KIND_TARGET,
    REFINED_UNARY,
    SEQUENCE_PAIR,
    SHORT_NAMES,
    UNARY,
    FormulationError,
    add_box,
    add_pair,
    add_sitb,
    area_outer_approx,
    area_tangent_at,
    resolve_kind,
    sequence_pair_globals,
)

TIGHT_SITB_MODES = ("as-cuts", "in-formulation")


@dataclass(frozen=True)
class AssemblyOptions:
    kind: str = REFINED_UNARY
    cuts: str = "none"
    symmetry: bool = False
    tight_sitb: str = "as-cuts"
    area_k: int = 8

    def __post_init__(self):
        object.__setattr__(self, "kind", resolve_kind(self.kind))
        if self.cuts not in cutlib.CUT_LEVELS:
            raise FormulationError(f"unknown cut level {self.cuts!r}")
        if self.tight_sitb not in TIGHT_SITB_MODES:
            raise FormulationError(f"unknown tightened stay-on-floor mode {self.tight_sitb!r}")
        if self.area_k < 0:
            raise FormulationError("area tangent count must be >= 0")
        if self.kind == EXTENDED and (self.cuts != "none" or self.symmetry):
            raise FormulationError("the extended formulation is not combined with cuts or symmetry breaking")
        if self.tight_sitb == "in-formulation" and self.kind not in (UNARY, REFINED_UNARY):
            raise FormulationError("tightened stay-on-floor rows exist only for unary and refined unary")

    @property
    def label(self) -> str:
        suffix = {"none": "", "plus": "+", "vi": "-VI", "vi3": "-VI3"}[self.cuts]
        return SHORT_NAMES[self.kind] + suffix + ("-sym" if self.symmetry else "")


def branch_priorities(instance: FlpInstance) -> dict[tuple[int, int], int]:
    """Dense rank of the pair costs, so the costliest pairs branch first."""
    levels = sorted({instance.cost(i, j) for i, j in instance.pairs()})
    rank = {p: k for k, p in enumerate(levels)}
    return {(i, j): rank[instance.cost(i, j)] for i, j in instance.pairs()}


def assemble_nbox(instance: FlpInstance, options: AssemblyOptions | None = None, bounds: BoxBounds | None = None) -> MilpModel:
    options = options or AssemblyOptions()
    kind = options.kind
    bounds = bounds or derive_bounds(instance)
    floor = {s: instance.floor(s) for s in AXES}
    model = MilpModel(f"{instance.name}-{options.label}")

    for box in range(1, instance.n + 1):
        add_box(model, box, bounds, floor)
    for box in range(1, instance.n + 1):
        add_sitb(model, box, floor)

    objective = LinExpr()
    for i, j in instance.pairs():
        for s in AXES:
            d = model.add_var(names.d(s, i, j), 0.0, floor[s])
            ci, cj = model.var(names.c(s, i)), model.var(names.c(s, j))
            model.add(d >= ci - cj, name=f"dist_{s}_{i}_{j}")
            model.add(d >= cj - ci, name=f"dist_{s}_{j}_{i}")
            objective = objective + instance.cost(i, j) * d
    model.set_objective(objective)

    for spec in instance.boxes:
        rows = area_outer_approx(spec.id, spec.area, bounds.lower(spec.id, "x"), bounds.upper(spec.id, "x"), options.area_k)
        model.add_all(rows)

    tight_in = options.tight_sitb == "in-formulation"
    prio = branch_priorities(instance)
    for i, j in instance.pairs():
        add_pair(model, kind, i, j, bounds, floor, tight_sitb=tight_in, priority=prio[i, j])
    if kind == SEQUENCE_PAIR:
        model.add_all(sequence_pair_globals(instance.n))

    target = KIND_TARGET[kind]
    added = []
    if options.cuts != "none":
        sel = cutlib.select_cut_subset(
            instance, options.cuts, bounds, refined=kind == REFINED_UNARY, tight_sitb=not tight_in
        )
        added += sel.cuts
    if options.symmetry:
        added += cutlib.symmetry_breaking(instance, bounds)
    for cut in added:
        model.add(cutlib.translate_cut(cut, target).constraint(), name=cut.tag)

    model.meta.update(
        instance=instance, bounds=bounds, kind=kind, options=options, floor=floor, target=target, n_cuts=len(added)
    )
    return model


# ---------------------------------------------------------------------------
# layouts and lazy area refinement


def layout_from_point(instance: FlpInstance, point) -> Layout:
    center, width, dist = {}, {}, {}
    for box in range(1, instance.n + 1):
        for s in AXES:
            center[box, s] = float(point[names.c(s, box)])
            width[box, s] = float(point[names.l(s, box)])
    for i, j in instance.pairs():
        for s in AXES:
            key = names.d(s, i, j)
            if key in point:
                dist[i, j, s] = float(point[key])
    return Layout(center, width, dist)


def area_violations(instance: FlpInstance, point, tol: float = 1e-6) -> dict[int, float]:
    """Boxes whose widths in ``point`` miss the area by more than ``tol`` (relative)."""
    out = {}
    for spec in instance.boxes:
        lx, ly = point[names.l("x", spec.id)], point[names.l("y", spec.id)]
        short = spec.area - lx * ly
        if short > tol * spec.area:
            out[spec.id] = short
    return out


def refine_area(model: MilpModel, instance: FlpInstance, point, tol: float = 1e-6) -> int:
    """Add a tangent at the projection of each area-violating box; returns rows added."""
    bounds = model.meta.get("bounds") or derive_bounds(instance)
    added = 0
    for box in area_violations(instance, point, tol):
        area = instance.boxes[box - 1].area
        lx, ly = point[names.l("x", box)], point[names.l("y", box)]
        # point on the curve with the same aspect as the relaxed widths
        x = math.sqrt(area * lx / ly) if ly > 0 else bounds.upper(box, "x")
        x = min(max(x, bounds.lower(box, "x")), bounds.upper(box, "x"))
        tag = f"lazy{len(model.constraints)}"
        model.add(area_tangent_at(box, area, x, tag))
        added += 1
    return added


def solve_with_area_refinement(model: MilpModel, instance: FlpInstance, max_rounds: int = 10, tol: float = 1e-6, **kw) -> SolveResult:
    """Solve, then add tangents where the incumbent misses an area, until none does."""
    model = model.copy()
    result = solve_milp(model, **kw)
    for _ in range(max_rounds):
        if result.point is None or not refine_area(model, instance, result.point, tol):
            break
        result = solve_milp(model, **kw)
    return result


def with_options(options: AssemblyOptions, **changes) -> AssemblyOptions:
    return replace(options, **changes)
