"""LP-file text export and import.

The dialect is the common CPLEX-style LP format::

    \\ Problem name: toy
    \\ priority z_x_1_2 3
    Minimize
     obj: + 1.0 d_x_1_2 + 1.0 d_y_1_2
    Subject To
     r0: + 1.0 c_x_1 - 1.0 c_x_2 <= 0.0
    Bounds
     0.0 <= c_x_1 <= 10.0
    Binaries
     z_x_1_2
    End

Every variable is listed in ``Bounds`` in model order so that import
reproduces the variable order. Numbers are written with ``repr`` and
round-trip exactly. Branch priorities travel in comment lines.
"""

from __future__ import annotations

import math
import re

from .model import BINARY, CONTINUOUS, Constraint, MilpModel, ModelError, Variable

_SECTIONS = {
    "minimize": "obj", "minimum": "obj", "min": "obj",
    "subject to": "rows", "such that": "rows", "st": "rows", "s.t.": "rows",
    "bounds": "bounds", "binaries": "bin", "binary": "bin", "bin": "bin",
    "generals": "gen", "general": "gen", "end": "end",
}


class LPFormatError(ModelError):
    pass


def _num(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return repr(float(v) + 0.0)


def _terms(coeffs, const: float = 0.0) -> str:
    parts = []
    for name, v in coeffs.items():
        if v == 0:
            continue
        parts.append(f"{'-' if v < 0 else '+'} {_num(abs(v))} {name}")
    if const:
        parts.append(f"{'-' if const < 0 else '+'} {_num(abs(const))}")
    return " ".join(parts)


def export_model(model: MilpModel, fmt: str = "lp-text") -> str:
    if fmt != "lp-text":
        raise ValueError(f"unsupported export format {fmt!r}")
    out = [f"\\ Problem name: {model.name}"]
    for v in model.variables:
        if v.priority:
            out.append(f"\\ priority {v.name} {v.priority}")
    out.append("Minimize")
    out.append(f" obj: {_terms(model.objective, model.objective_const)}".rstrip())
    out.append("Subject To")
    sense_text = {"<=": "<=", ">=": ">=", "==": "="}
    for con in model.constraints:
        lhs = _terms(con.coeffs) or "0"
        out.append(f" {con.name}: {lhs} {sense_text[con.sense]} {_num(con.rhs)}")
    out.append("Bounds")
    for v in model.variables:
        if v.lb == -math.inf and v.ub == math.inf:
            out.append(f" {v.name} free")
        else:
            out.append(f" {_num(v.lb)} <= {v.name} <= {_num(v.ub)}")
    bins = [v.name for v in model.variables if v.kind == BINARY]
    out.append("Binaries")
    out.extend(f" {n}" for n in bins)
    out.append("End")
    return "\n".join(out) + "\n"


_TOKEN = re.compile(r"\s*([+-])?\s*([0-9.]+(?:[eE][+-]?\d+)?|inf(?:inity)?(?!\w))?\s*([A-Za-z_][\w.\[\]]*)?")


def _parse_expr(text: str, lineno: int) -> tuple[dict[str, float], float]:
    coeffs: dict[str, float] = {}
    const = 0.0
    pos = 0
    text = text.strip()
    if text in ("", "0"):
        return coeffs, const
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise LPFormatError(f"line {lineno}: cannot parse expression near {text[pos:]!r}")
        sign, num, name = m.groups()
        pos = m.end()
        if num is None and name is None:
            if text[pos:].strip():
                raise LPFormatError(f"line {lineno}: dangling sign in {text!r}")
            break
        s = -1.0 if sign == "-" else 1.0
        value = s * (float(num) if num is not None else 1.0)
        if name is None:
            const += value
        else:
            coeffs[name] = coeffs.get(name, 0.0) + value
    return coeffs, const


def _parse_float(tok: str, lineno: int) -> float:
    t = tok.strip().lower()
    if t in ("inf", "+inf", "infinity", "+infinity"):
        return math.inf
    if t in ("-inf", "-infinity"):
        return -math.inf
    try:
        return float(t)
    except ValueError:
        raise LPFormatError(f"line {lineno}: not a number: {tok!r}") from None


_SENSE_RE = re.compile(r"(<=|>=|=<|=>|=|<|>)")
_NORM_SENSE = {"<=": "<=", "=<": "<=", "<": "<=", ">=": ">=", "=>": ">=", ">": ">=", "=": "=="}


def import_model(text: str) -> MilpModel:
    """Parse LP text written by :func:`export_model` (and simple hand-written files)."""
    name = "model"
    priorities: dict[str, int] = {}
    section = None
    obj_text: list[str] = []
    rows: list[tuple[int, str]] = []
    bounds: list[tuple[int, str]] = []
    bins: list[str] = []
    pending = ""
    pending_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("\\"):
            body = line[1:].strip()
            if body.lower().startswith("problem name:"):
                name = body.split(":", 1)[1].strip() or name
            elif body.startswith("priority "):
                parts = body.split()
                if len(parts) == 3:
                    priorities[parts[1]] = int(parts[2])
            continue
        if not line:
            continue
        key = line.lower()
        if key in _SECTIONS:
            if pending:
                raise LPFormatError(f"line {pending_line}: incomplete constraint")
            section = _SECTIONS[key]
            if section == "end":
                break
            continue
        if section == "obj":
            obj_text.append(line)
        elif section == "rows":
            if not pending:
                pending_line = lineno
            pending = f"{pending} {line}".strip()
            if _SENSE_RE.search(pending.split(":", 1)[-1]):
                rows.append((pending_line, pending))
                pending = ""
        elif section == "bounds":
            bounds.append((lineno, line))
        elif section == "bin":
            bins.extend(line.split())
        elif section == "gen":
            raise LPFormatError(f"line {lineno}: general integers are not supported")
        else:
            raise LPFormatError(f"line {lineno}: content outside any section")
    if pending:
        raise LPFormatError(f"line {pending_line}: incomplete constraint")

    model = MilpModel(name)
    declared: dict[str, tuple[float, float]] = {}
    order: list[str] = []
    for lineno, line in bounds:
        parts = line.split()
        if len(parts) == 2 and parts[1].lower() == "free":
            vname, lo, hi = parts[0], -math.inf, math.inf
        elif len(parts) == 5 and parts[1] in ("<=", "=<") and parts[3] in ("<=", "=<"):
            vname = parts[2]
            lo, hi = _parse_float(parts[0], lineno), _parse_float(parts[4], lineno)
        elif len(parts) == 3 and parts[1] in ("<=", ">=", "="):
            vname, val = parts[0], _parse_float(parts[2], lineno)
            lo0, hi0 = declared.get(vname, (0.0, math.inf))
            lo, hi = {"<=": (lo0, val), ">=": (val, hi0), "=": (val, val)}[parts[1]]
        else:
            raise LPFormatError(f"line {lineno}: cannot parse bound {line!r}")
        if vname not in declared:
            order.append(vname)
        declared[vname] = (lo, hi)
    binset = set(bins)
    obj_body = " ".join(obj_text)
    if ":" in obj_body:
        obj_body = obj_body.split(":", 1)[1]
    obj, obj_const = _parse_expr(obj_body, 0)
    parsed_rows = []
    for lineno, row in rows:
        rname, body = ("", row)
        if ":" in row:
            rname, body = row.split(":", 1)
        m = _SENSE_RE.search(body)
        lhs, sense, rhs = body[: m.start()], m.group(1), body[m.end():]
        coeffs, const = _parse_expr(lhs, lineno)
        parsed_rows.append((rname.strip(), coeffs, _NORM_SENSE[sense], _parse_float(rhs, lineno) - const))
    # variables only seen in rows/objective/binaries get default bounds
    for coeffs in [obj] + [r[1] for r in parsed_rows]:
        for v in coeffs:
            if v not in declared:
                declared[v] = (0.0, math.inf)
                order.append(v)
    for v in bins:
        if v not in declared:
            declared[v] = (0.0, 1.0)
            order.append(v)
    for v in order:
        lo, hi = declared[v]
        kind = BINARY if v in binset else CONTINUOUS
        model.variables.append(Variable(v, lo, hi, kind, priorities.get(v, 0)))
    model.__post_init__()
    model.validate()
    for rname, coeffs, sense, rhs in parsed_rows:
        model.add(Constraint(coeffs, sense, rhs), name=rname or None)
    model.objective = obj
    model.objective_const = obj_const
    return model
