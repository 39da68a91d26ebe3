"""Best-bound branch-and-bound over :class:`MilpModel` using the bundled simplex."""

from __future__ import annotations

import csv
import heapq
import io
import itertools
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import BINARY, MilpModel
from .simplex import NUMERICAL, OPTIMAL, UNBOUNDED, BoundedSimplex

INT_TOL = 1e-6
FEAS_TOL = 1e-6

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_BOUND_LIMIT = "bound-limit"
STATUS_NODE_LIMIT = "node-limit"
STATUS_TIME_LIMIT = "time-limit"


class SolverError(RuntimeError):
    pass


def relative_gap(upper: float | None, lower: float) -> float:
    """``100 (U - L) / U`` in percent; 0 when the bounds meet, inf without an incumbent."""
    if upper is None or not math.isfinite(upper):
        return math.inf
    diff = upper - lower
    if diff <= 1e-9 * max(1.0, abs(upper)):
        return 0.0
    if upper == 0:
        return math.inf
    return 100.0 * diff / abs(upper)


@dataclass
class SolveResult:
    status: str
    incumbent: float | None
    point: dict[str, float] | None
    bound: float
    nodes: int
    wall_time: float
    root_bound: float = -math.inf
    lp_iterations: int = 0
    log: list[tuple[int, float, float, int]] = field(default_factory=list, repr=False)

    @property
    def gap(self) -> float:
        return relative_gap(self.incumbent, self.bound)


@dataclass(order=True)
class _Node:
    key: tuple
    lb: np.ndarray = field(compare=False)
    ub: np.ndarray = field(compare=False)
    depth: int = field(compare=False)


class _LPCache:
    """One prepared simplex per model; falls back to Bland pricing on numerical trouble."""

    def __init__(self, model: MilpModel):
        c, A, senses, b, lb, ub = model.to_arrays()
        self.lb, self.ub = lb, ub
        self.const = model.objective_const
        self.lp = BoundedSimplex(c, A, senses, b)
        self.safe = BoundedSimplex(c, A, senses, b, bland_after=0, refactor_every=20)
        self.iterations = 0

    def solve(self, lb, ub):
        res = self.lp.solve(lb, ub)
        if res.status == NUMERICAL:
            res = self.safe.solve(lb, ub)
        self.iterations += res.iterations
        if res.status == NUMERICAL:
            raise SolverError("LP relaxation failed numerically")
        if res.status == UNBOUNDED:
            raise SolverError("LP relaxation is unbounded; all variables need finite bounds")
        if res.status == OPTIMAL:
            res.value += self.const
        return res


def solve_milp(
    model: MilpModel,
    time_limit: float | None = None,
    node_limit: int | None = None,
    gap_tol: float = 1e-6,
    cutoff: float | None = None,
    node_log=None,
    polish_every: int = 20,
) -> SolveResult:
    """Minimize ``model`` by LP-based branch-and-bound.

    Nodes are explored best-bound first (ties: deeper first, then creation
    order). The branching variable is the fractional binary with the highest
    priority; ties go to the most fractional, then the lowest index.

    ``cutoff`` stops the search with status ``bound-limit`` once the dual bound
    reaches it. ``node_log`` may be a path or a text stream; one CSV line
    ``node,best_bound,incumbent,depth`` is written per processed node.
    """
    t0 = time.perf_counter()
    model.validate()
    cache = _LPCache(model)
    names = model.names
    bin_idx = np.array([k for k, v in enumerate(model.variables) if v.kind == BINARY], dtype=int)
    prio = np.array([model.variables[k].priority for k in bin_idx], dtype=float)
    counter = itertools.count()

    upper = math.inf
    best_x: np.ndarray | None = None
    heap: list[_Node] = []
    nodes = 0
    root_bound = -math.inf
    log: list[tuple[int, float, float, int]] = []
    status = None

    lb0 = cache.lb.copy()
    ub0 = cache.ub.copy()
    if bin_idx.size:
        lb0[bin_idx] = np.ceil(lb0[bin_idx] - INT_TOL)
        ub0[bin_idx] = np.floor(ub0[bin_idx] + INT_TOL)
    heapq.heappush(heap, _Node((-math.inf, 0, next(counter)), lb0, ub0, 0))

    def converged(lower: float) -> bool:
        if not math.isfinite(upper):
            return False
        return upper - lower <= gap_tol * max(1.0, abs(upper))

    def try_incumbent(x: np.ndarray, value: float):
        nonlocal upper, best_x
        if value < upper - 1e-12:
            upper, best_x = value, x.copy()

    def polish(x: np.ndarray, lb: np.ndarray, ub: np.ndarray):
        flb, fub = lb.copy(), ub.copy()
        r = np.clip(np.round(x[bin_idx]), lb[bin_idx], ub[bin_idx])
        flb[bin_idx] = r
        fub[bin_idx] = r
        res = cache.solve(flb, fub)
        if res.status == OPTIMAL:
            try_incumbent(res.x, res.value)

    while heap:
        if time_limit is not None and time.perf_counter() - t0 >= time_limit:
            status = STATUS_TIME_LIMIT
            break
        if node_limit is not None and nodes >= node_limit:
            status = STATUS_NODE_LIMIT
            break
        node = heapq.heappop(heap)
        parent_bound = node.key[0]
        if parent_bound >= upper or converged(parent_bound):
            continue
        if cutoff is not None and parent_bound >= cutoff:
            heapq.heappush(heap, node)
            status = STATUS_BOUND_LIMIT
            break
        nodes += 1
        res = cache.solve(node.lb, node.ub)
        if nodes == 1:
            root_bound = res.value if res.status == OPTIMAL else math.inf
        if res.status == OPTIMAL and res.value < upper and not converged(res.value):
            x = res.x
            frac = np.abs(x[bin_idx] - np.round(x[bin_idx])) if bin_idx.size else np.zeros(0)
            fractional = frac > INT_TOL
            if not fractional.any():
                x = x.copy()
                if bin_idx.size:
                    x[bin_idx] = np.round(x[bin_idx])
                try_incumbent(x, res.value)
            else:
                if nodes == 1 or (polish_every and nodes % polish_every == 0):
                    polish(x, node.lb, node.ub)
                cand = np.flatnonzero(fractional)
                # priority desc, fractionality desc, index asc
                order = np.lexsort((cand, -frac[cand], -prio[cand]))
                k = bin_idx[cand[order[0]]]
                bound = max(res.value, parent_bound)
                down_ub = node.ub.copy()
                down_ub[k] = 0.0
                up_lb = node.lb.copy()
                up_lb[k] = 1.0
                d = node.depth + 1
                heapq.heappush(heap, _Node((bound, -d, next(counter)), node.lb, down_ub, d))
                heapq.heappush(heap, _Node((bound, -d, next(counter)), up_lb, node.ub, d))
        open_bound = heap[0].key[0] if heap else upper
        lower = min(open_bound, upper)
        log.append((nodes, lower, upper, node.depth))

    if heap:
        lower = min(min(n.key[0] for n in heap), upper)
    else:
        lower = upper
    if status is None:
        status = STATUS_INFEASIBLE if best_x is None else STATUS_OPTIMAL
    elif best_x is not None and converged(lower):
        status = STATUS_OPTIMAL

    _write_log(node_log, log)
    point = None
    if best_x is not None:
        point = {n: float(v) for n, v in zip(names, best_x)}
    return SolveResult(
        status=status,
        incumbent=None if best_x is None else float(upper),
        point=point,
        bound=float(lower) if best_x is not None or heap else math.inf,
        nodes=nodes,
        wall_time=time.perf_counter() - t0,
        root_bound=float(root_bound),
        lp_iterations=cache.iterations,
        log=log,
    )


def _write_log(target, log) -> None:
    if target is None:
        return
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="", encoding="utf-8") as fh:
            _write_log(fh, log)
        return
    writer = csv.writer(target)
    writer.writerow(["node", "best_bound", "incumbent", "depth"])
    for row in log:
        writer.writerow([row[0], repr(row[1]), repr(row[2]), row[3]])


def read_node_log(text: str) -> list[tuple[int, float, float, int]]:
    rows = list(csv.reader(io.StringIO(text)))
    return [(int(a), float(b), float(c), int(d)) for a, b, c, d in rows[1:]]
