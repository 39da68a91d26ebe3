"""Command line: generate, build, solve, benchmark, check and brute-force instances.

Exit codes: 0 optimal (or feasible for ``check``), 2 limit reached,
3 infeasible, 1 usage or other error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .cuts import CUT_LEVELS
from .formulations import ALIASES, KINDS, SHORT_NAMES, AssemblyOptions, assemble_nbox, layout_from_point
from .formulations.assemble import TIGHT_SITB_MODES, solve_with_area_refinement
from .instance import (
    SHIPPED,
    InstanceError,
    load_instance,
    parse_layout,
    perturb_instance,
    shipped_instance,
    write_instance,
    write_layout,
)
from .milp import SolverError, export_model, solve_milp
from .oracle import brute_force_optimum, check_layout

EXIT_OK, EXIT_ERROR, EXIT_LIMIT, EXIT_INFEASIBLE = 0, 1, 2, 3
STATUS_EXIT = {
    "optimal": EXIT_OK,
    "node-limit": EXIT_LIMIT,
    "time-limit": EXIT_LIMIT,
    "bound-limit": EXIT_LIMIT,
    "infeasible": EXIT_INFEASIBLE,
    "error": EXIT_ERROR,
}
CSV_FIELDS = ("instance", "formulation", "cuts", "symmetry", "status", "incumbent", "bound", "gap_pct", "nodes", "time_ms")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with code 1 instead of argparse's 2 (2 means a limit was hit)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# benchmark rows


@dataclass
class BenchRow:
    instance: str
    formulation: str
    cuts: str
    symmetry: bool
    status: str
    incumbent: float | None
    bound: float | None
    gap_pct: float | None
    nodes: int
    time_ms: float

    def cells(self) -> list[str]:
        def num(x):
            return "" if x is None else repr(float(x))

        return [
            self.instance, self.formulation, self.cuts, str(int(self.symmetry)), self.status,
            num(self.incumbent), num(self.bound), num(self.gap_pct), str(self.nodes), f"{self.time_ms:.3f}",
        ]

    @classmethod
    def from_cells(cls, cells) -> "BenchRow":
        if isinstance(cells, dict):
            cells = [cells[f] for f in CSV_FIELDS]

        def num(x):
            return None if x == "" else float(x)

        inst, form, cuts, sym, status, inc, bnd, gap, nodes, ms = cells
        return cls(inst, form, cuts, sym == "1", status, num(inc), num(bnd), num(gap), int(nodes), float(ms))


def read_bench_csv(text: str) -> list[BenchRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [BenchRow.from_cells(r) for r in reader]


def append_rows(path: str | Path, rows) -> None:
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if new:
            w.writerow(CSV_FIELDS)
        for row in rows:
            w.writerow(row.cells())


# ---------------------------------------------------------------------------
# shared helpers


def _load(spec: str):
    path = Path(spec)
    if not path.exists() and spec in SHIPPED:
        return shipped_instance(spec)
    if not path.exists():
        raise UsageError(f"instance file not found: {spec}")
    return load_instance(path)


def _options(args) -> AssemblyOptions:
    return AssemblyOptions(
        kind=ALIASES[args.formulation],
        cuts=args.cuts,
        symmetry=args.symmetry,
        tight_sitb=args.tight_sitb,
        area_k=args.area_k,
    )


def run_one(instance, options: AssemblyOptions, time_limit=None, node_limit=None, node_log=None, refine_area=False):
    """Build and solve one cell; returns the bench row and the solve result."""
    model = assemble_nbox(instance, options)
    if refine_area:
        result = solve_with_area_refinement(model, instance, time_limit=time_limit, node_limit=node_limit, node_log=node_log)
    else:
        result = solve_milp(model, time_limit=time_limit, node_limit=node_limit, node_log=node_log)
    gap = result.gap
    row = BenchRow(
        instance.name, SHORT_NAMES[options.kind], options.cuts, options.symmetry, result.status,
        result.incumbent, result.bound if math.isfinite(result.bound) else None,
        gap if math.isfinite(gap) else None, result.nodes, 1000.0 * result.wall_time,
    )
    return row, result


def _error_row(name, form, cuts, sym) -> BenchRow:
    return BenchRow(name, form, cuts, sym, "error", None, None, None, 0, 0.0)


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    base = _load(args.base)
    inst = perturb_instance(base, args.gamma, args.alpha, seed=args.seed)
    out = Path(args.output) if args.output else Path(inst.name)
    if out.is_dir():
        out = out / inst.name
    out.write_text(write_instance(inst), encoding="utf-8")
    print(out)
    return EXIT_OK


def cmd_build(args) -> int:
    inst = _load(args.instance)
    model = assemble_nbox(inst, _options(args))
    text = export_model(model)
    if args.output and args.output != "-":
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    row, result = run_one(
        inst, _options(args), args.time_limit, args.node_limit, args.node_log, refine_area=args.refine_area
    )
    if args.csv:
        append_rows(args.csv, [row])
    print(f"status {row.status}")
    print(f"incumbent {'-' if row.incumbent is None else repr(row.incumbent)}")
    print(f"bound {'-' if row.bound is None else repr(row.bound)}")
    print(f"gap_pct {'-' if row.gap_pct is None else f'{row.gap_pct:.6g}'}")
    print(f"nodes {row.nodes}")
    print(f"time_ms {row.time_ms:.1f}")
    if args.layout_out and result.point is not None:
        Path(args.layout_out).write_text(write_layout(layout_from_point(inst, result.point)), encoding="utf-8")
    return STATUS_EXIT[row.status]


def _bench_cell(job):
    path, kind, cuts, sym, tight, area_k, time_limit, node_limit = job
    name = Path(path).name
    try:
        inst = _load(path)
        name = inst.name
        options = AssemblyOptions(kind=kind, cuts=cuts, symmetry=sym, tight_sitb=tight, area_k=area_k)
        row, _ = run_one(inst, options, time_limit, node_limit)
        return row
    except Exception:  # noqa: BLE001 - a failed cell is recorded, the harness goes on
        return _error_row(name, SHORT_NAMES[kind], cuts, sym)


def cmd_bench(args) -> int:
    d = Path(args.dir)
    if not d.is_dir():
        raise UsageError(f"not a directory: {args.dir}")
    files = sorted(p for p in d.iterdir() if p.is_file() and not p.name.startswith("."))
    kinds = [ALIASES[k] for k in args.formulations]
    syms = {"off": [False], "on": [True], "both": [False, True]}[args.symmetry_mode]
    jobs = [
        (str(f), k, c, s, args.tight_sitb, args.area_k, args.time_limit, args.node_limit)
        for f in files for k in kinds for c in args.cut_levels for s in syms
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_bench_cell, jobs))
    else:
        rows = [_bench_cell(j) for j in jobs]
    if args.csv:
        append_rows(args.csv, rows)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for r in rows:
            w.writerow(r.cells())
    return EXIT_OK


def cmd_check(args) -> int:
    inst = _load(args.instance)
    layout = parse_layout(Path(args.layout).read_text(encoding="utf-8"))
    report = check_layout(inst, layout)
    if args.csv_row:
        print(report.CSV_HEADER)
        print(report.to_csv_row())
    else:
        sys.stdout.write(report.to_text())
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_oracle(args) -> int:
    inst = _load(args.instance)
    res = brute_force_optimum(inst, area_k=args.area_k, variant=args.variant)
    print(f"status {res.status}")
    print(f"value {'-' if res.value is None else repr(res.value)}")
    print(f"lps {res.lps}")
    if res.layout is not None:
        text = write_layout(res.layout)
        if args.layout_out:
            Path(args.layout_out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    return EXIT_OK if res.status == "optimal" else EXIT_INFEASIBLE


# ---------------------------------------------------------------------------
# parser


def _model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", required=True, help=f"instance file or shipped name ({', '.join(SHIPPED)})")
    p.add_argument("--formulation", choices=list(ALIASES), default="ru")
    p.add_argument("--cuts", choices=CUT_LEVELS, default="none")
    p.add_argument("--symmetry", action="store_true", help="add symmetry-breaking rows")
    p.add_argument("--tight-sitb", choices=TIGHT_SITB_MODES, default="as-cuts")
    p.add_argument("--area-k", type=int, default=8, help="area tangent rows per box")


def _limit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--time-limit", type=float, default=None, help="seconds")
    p.add_argument("--node-limit", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="floorlayout", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="perturb a base instance")
    p.add_argument("--base", required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True, help="aspect ratio for every box")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("-o", "--output", default=None, help="file or directory (default: instance name)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build", help="export a model in LP format")
    _model_flags(p)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("solve", help="build and solve one model")
    _model_flags(p)
    _limit_flags(p)
    p.add_argument("--csv", default=None, help="append a result row to this CSV file")
    p.add_argument("--node-log", default=None, help="write the node log CSV here")
    p.add_argument("--layout-out", default=None, help="write the incumbent layout here")
    p.add_argument("--refine-area", action="store_true", help="add tangents until the incumbent meets every area")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="solve every instance in a directory over a grid of options")
    p.add_argument("--dir", required=True)
    p.add_argument("--csv", default=None, help="append rows here (default: stdout)")
    p.add_argument("--formulations", nargs="+", choices=list(ALIASES), default=[SHORT_NAMES[k] for k in KINDS])
    p.add_argument("--cut-levels", nargs="+", choices=CUT_LEVELS, default=list(CUT_LEVELS))
    p.add_argument("--symmetry-mode", choices=("off", "on", "both"), default="off")
    p.add_argument("--tight-sitb", choices=TIGHT_SITB_MODES, default="as-cuts")
    p.add_argument("--area-k", type=int, default=8)
    p.add_argument("--jobs", type=int, default=1, help="cells solved in parallel")
    _limit_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("check", help="check a layout file against an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--layout", required=True)
    p.add_argument("--csv-row", action="store_true", help="print a CSV summary instead of the report")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("oracle", help="brute-force optimum over all branch assignments")
    p.add_argument("--instance", required=True)
    p.add_argument("--area-k", type=int, default=8)
    p.add_argument("--variant", choices=("d4", "d8"), default="d4")
    p.add_argument("--layout-out", default=None)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InstanceError, SolverError, ValueError, OSError) as exc:
        print(f"floorlayout: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
