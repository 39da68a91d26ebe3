"""Solver-agnostic mixed-integer linear model.

Linear expressions are built with ordinary arithmetic on :class:`LinExpr`;
comparisons ``<=`` and ``>=`` produce :class:`Constraint` objects and
:func:`eq` builds equalities::

    m = MilpModel()
    x = m.add_var("x", 0, 4)
    m.add(x >= 3)
    m.set_objective(x)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from numbers import Real
from typing import Iterable, Mapping

import numpy as np

CONTINUOUS = "continuous"
BINARY = "binary"
SENSES = ("<=", ">=", "==")


class ModelError(ValueError):
    pass


class LinExpr:
    """Sparse affine expression ``sum(coef * var) + const``."""

    __slots__ = ("terms", "const")

    def __init__(self, terms: Mapping[str, float] | None = None, const: float = 0.0):
        self.terms = dict(terms) if terms else {}
        self.const = float(const)

    @staticmethod
    def _lift(other) -> "LinExpr":
        if isinstance(other, LinExpr):
            return other
        if isinstance(other, Real):
            return LinExpr(const=float(other))
        return NotImplemented

    def copy(self) -> "LinExpr":
        return LinExpr(self.terms, self.const)

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = self.copy()
        for k, v in other.terms.items():
            out.terms[k] = out.terms.get(k, 0.0) + v
        out.const += other.const
        return out

    __radd__ = __add__

    def __neg__(self):
        return LinExpr({k: -v for k, v in self.terms.items()}, -self.const)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if not isinstance(scalar, Real):
            return NotImplemented
        s = float(scalar)
        return LinExpr({k: s * v for k, v in self.terms.items()}, s * self.const)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def __le__(self, other):
        return Constraint.from_sides(self, "<=", other)

    def __ge__(self, other):
        return Constraint.from_sides(self, ">=", other)

    def value(self, point: Mapping[str, float]) -> float:
        return self.const + sum(v * point[k] for k, v in self.terms.items())

    def cleaned(self, tol: float = 0.0) -> "LinExpr":
        return LinExpr({k: v for k, v in self.terms.items() if abs(v) > tol}, self.const)

    def __repr__(self):
        body = " ".join(f"{v:+g}*{k}" for k, v in self.terms.items())
        return f"LinExpr({body} {self.const:+g})"


def eq(lhs, rhs) -> "Constraint":
    return Constraint.from_sides(LinExpr._lift(lhs), "==", rhs)


def lin_sum(exprs: Iterable) -> LinExpr:
    out = LinExpr()
    for e in exprs:
        out = out + e
    return out


@dataclass
class Constraint:
    coeffs: dict[str, float]
    sense: str
    rhs: float
    name: str = ""

    @classmethod
    def from_sides(cls, lhs, sense, rhs) -> "Constraint":
        lhs = LinExpr._lift(lhs)
        rhs = LinExpr._lift(rhs)
        if lhs is NotImplemented or rhs is NotImplemented:
            raise TypeError("constraint sides must be LinExpr or numbers")
        diff = (lhs - rhs).cleaned()
        return cls(diff.terms, sense, -diff.const)

    def named(self, name: str) -> "Constraint":
        self.name = name
        return self

    def activity(self, point: Mapping[str, float]) -> float:
        return sum(v * point[k] for k, v in self.coeffs.items())

    def violation(self, point: Mapping[str, float]) -> float:
        """Amount by which ``point`` violates the row (0 when satisfied)."""
        a = self.activity(point)
        if self.sense == "<=":
            return max(0.0, a - self.rhs)
        if self.sense == ">=":
            return max(0.0, self.rhs - a)
        return abs(a - self.rhs)

    def as_le(self) -> list[tuple[dict[str, float], float]]:
        """The row as one or two ``a x <= b`` inequalities."""
        neg = ({k: -v for k, v in self.coeffs.items()}, -self.rhs)
        if self.sense == "<=":
            return [(dict(self.coeffs), self.rhs)]
        if self.sense == ">=":
            return [neg]
        return [(dict(self.coeffs), self.rhs), neg]

    def normalized(self, digits: int = 9) -> tuple:
        """Canonical key for comparing rows up to positive scaling and sense flips."""
        coeffs, rhs = dict(self.coeffs), self.rhs
        sense = self.sense
        if sense == ">=":
            coeffs = {k: -v for k, v in coeffs.items()}
            rhs, sense = -rhs, "<="
        scale = max((abs(v) for v in coeffs.values()), default=1.0) or 1.0
        if sense == "==":
            first = min(coeffs) if coeffs else None
            if first is not None and coeffs[first] < 0:
                scale = -scale
        items = tuple(sorted((k, round(v / scale, digits) + 0.0) for k, v in coeffs.items() if v))
        return items, sense, round(rhs / scale, digits) + 0.0


@dataclass
class Variable:
    name: str
    lb: float
    ub: float
    kind: str = CONTINUOUS
    priority: int = 0


@dataclass
class MilpModel:
    """Variables, linear rows and a linear minimization objective.

    ``meta`` carries builder context (instance, formulation kind, bounds) for
    tools that need to interpret the model, e.g. the point sampler.
    """

    name: str = "model"
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[str, float] = field(default_factory=dict)
    objective_const: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self._index = {v.name: k for k, v in enumerate(self.variables)}

    # construction -------------------------------------------------------
    def add_var(self, name: str, lb: float, ub: float, kind: str = CONTINUOUS, priority: int = 0) -> LinExpr:
        if name in self._index:
            raise ModelError(f"duplicate variable {name!r}")
        if kind not in (CONTINUOUS, BINARY):
            raise ModelError(f"unknown variable kind {kind!r}")
        if kind == BINARY and (lb < 0 or ub > 1):
            raise ModelError(f"binary {name!r} needs bounds within [0, 1]")
        if lb > ub:
            raise ModelError(f"variable {name!r} has lb > ub")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, float(lb), float(ub), kind, priority))
        return LinExpr({name: 1.0})

    def add_binary(self, name: str, priority: int = 0) -> LinExpr:
        return self.add_var(name, 0.0, 1.0, BINARY, priority)

    def var(self, name: str) -> LinExpr:
        if name not in self._index:
            raise ModelError(f"unknown variable {name!r}")
        return LinExpr({name: 1.0})

    def has_var(self, name: str) -> bool:
        return name in self._index

    def variable(self, name: str) -> Variable:
        return self.variables[self._index[name]]

    def add(self, con: Constraint, name: str | None = None) -> Constraint:
        if con.sense not in SENSES:
            raise ModelError(f"bad sense {con.sense!r}")
        for k in con.coeffs:
            if k not in self._index:
                raise ModelError(f"constraint {name or con.name!r} references unknown variable {k!r}")
        if name is not None:
            con.name = name
        if not con.name:
            con.name = f"r{len(self.constraints)}"
        self.constraints.append(con)
        return con

    def add_all(self, cons: Iterable[Constraint]) -> None:
        for con in cons:
            self.add(con)

    def set_objective(self, expr: LinExpr | Mapping[str, float]) -> None:
        if isinstance(expr, LinExpr):
            terms, const = expr.cleaned().terms, expr.const
        else:
            terms, const = dict(expr), 0.0
        for k in terms:
            if k not in self._index:
                raise ModelError(f"objective references unknown variable {k!r}")
        self.objective = dict(terms)
        self.objective_const = const

    def set_bounds(self, name: str, lb: float, ub: float) -> None:
        v = self.variable(name)
        v.lb, v.ub = float(lb), float(ub)

    def copy(self) -> "MilpModel":
        out = MilpModel(
            self.name,
            [Variable(v.name, v.lb, v.ub, v.kind, v.priority) for v in self.variables],
            [Constraint(dict(c.coeffs), c.sense, c.rhs, c.name) for c in self.constraints],
            dict(self.objective),
            self.objective_const,
            dict(self.meta),
        )
        return out

    # inspection ---------------------------------------------------------
    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def index(self, name: str) -> int:
        return self._index[name]

    def binaries(self) -> list[str]:
        return [v.name for v in self.variables if v.kind == BINARY]

    def validate(self) -> None:
        seen = set()
        for v in self.variables:
            if v.name in seen:
                raise ModelError(f"duplicate variable {v.name!r}")
            seen.add(v.name)
            if v.kind == BINARY and (v.lb < 0 or v.ub > 1):
                raise ModelError(f"binary {v.name!r} has bounds outside [0, 1]")
        for c in self.constraints:
            for k in c.coeffs:
                if k not in seen:
                    raise ModelError(f"row {c.name!r} references unknown variable {k!r}")

    def objective_value(self, point: Mapping[str, float]) -> float:
        return self.objective_const + sum(v * point[k] for k, v in self.objective.items())

    def max_violation(self, point: Mapping[str, float], include_bounds: bool = True) -> float:
        worst = max((c.violation(point) for c in self.constraints), default=0.0)
        if include_bounds:
            for v in self.variables:
                x = point[v.name]
                worst = max(worst, v.lb - x, x - v.ub)
        return worst

    def is_feasible(self, point: Mapping[str, float], tol: float = 1e-6, integrality: bool = True) -> bool:
        if self.max_violation(point) > tol:
            return False
        if integrality:
            return all(abs(point[n] - round(point[n])) <= tol for n in self.binaries())
        return True

    def to_arrays(self):
        """Dense arrays ``(c, A, senses, b, lb, ub)`` in variable order."""
        n = len(self.variables)
        c = np.zeros(n)
        for k, v in self.objective.items():
            c[self._index[k]] = v
        A = np.zeros((len(self.constraints), n))
        b = np.zeros(len(self.constraints))
        senses = []
        for r, con in enumerate(self.constraints):
            for k, v in con.coeffs.items():
                A[r, self._index[k]] += v
            b[r] = con.rhs
            senses.append(con.sense)
        lb = np.array([v.lb for v in self.variables], dtype=float)
        ub = np.array([v.ub for v in self.variables], dtype=float)
        return c, A, senses, b, lb, ub

    def structurally_equal(self, other: "MilpModel", digits: int = 12) -> bool:
        if [(v.name, v.lb, v.ub, v.kind, v.priority) for v in self.variables] != [
            (v.name, v.lb, v.ub, v.kind, v.priority) for v in other.variables
        ]:
            return False
        if len(self.constraints) != len(other.constraints):
            return False
        for a, b in zip(self.constraints, other.constraints):
            if a.name != b.name or a.sense != b.sense or a.rhs != b.rhs:
                return False
            if {k: v for k, v in a.coeffs.items() if v} != {k: v for k, v in b.coeffs.items() if v}:
                return False
        return self.objective == other.objective and self.objective_const == other.objective_const

    def relaxation_system(self):
        """LP relaxation as ``(names, A_ub, b_ub, A_eq, b_eq)`` with bounds written as rows."""
        names = self.names
        n = len(names)
        ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
        for con in self.constraints:
            row = np.zeros(n)
            for k, v in con.coeffs.items():
                row[self._index[k]] += v
            if con.sense == "<=":
                ub_rows.append(row); ub_rhs.append(con.rhs)
            elif con.sense == ">=":
                ub_rows.append(-row); ub_rhs.append(-con.rhs)
            else:
                eq_rows.append(row); eq_rhs.append(con.rhs)
        for k, v in enumerate(self.variables):
            if v.lb == v.ub:
                row = np.zeros(n); row[k] = 1.0
                eq_rows.append(row); eq_rhs.append(v.lb)
                continue
            if np.isfinite(v.lb):
                row = np.zeros(n); row[k] = -1.0
                ub_rows.append(row); ub_rhs.append(-v.lb)
            if np.isfinite(v.ub):
                row = np.zeros(n); row[k] = 1.0
                ub_rows.append(row); ub_rhs.append(v.ub)
        A_ub = np.array(ub_rows).reshape(-1, n)
        A_eq = np.array(eq_rows).reshape(-1, n)
        return names, A_ub, np.array(ub_rhs), A_eq, np.array(eq_rhs)
