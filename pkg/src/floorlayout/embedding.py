"""Disjunctions, encodings and the generic big-M embedding.

An embedding pairs every branch ``A^k x <= b^k`` of a disjunction with a
distinct 0/1 code ``h^k``. Given a bounded ground set ``Q`` and affine
functions ``R^k_l`` that equal ``b^k_l`` at ``h^k`` and dominate the row over
``Q`` at every other code, the rows ``(A^k)_l x <= R^k_l(v)`` together with a
formulation of the code set give a valid MIP formulation of ``{x in Q : D}``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import names
from .milp.model import BINARY, Constraint, LinExpr, MilpModel, Variable, eq, lin_sum
from .milp.simplex import OPTIMAL, BoundedSimplex


class EmbeddingError(ValueError):
    pass


class UnsupportedEncoding(EmbeddingError):
    pass


# ---------------------------------------------------------------------------
# disjunctions


@dataclass(frozen=True)
class Disjunction:
    """``OR_k [A^k x <= b^k]``; each branch is a tuple of linear rows."""

    branches: tuple[tuple[Constraint, ...], ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.branches:
            raise EmbeddingError("a disjunction needs at least one branch")
        object.__setattr__(self, "branches", tuple(tuple(b) for b in self.branches))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"branch{k + 1}" for k in range(len(self.branches))))

    def __len__(self):
        return len(self.branches)

    def variables(self) -> set[str]:
        return {v for br in self.branches for row in br for v in row.coeffs}

    def satisfied(self, point, tol: float = 1e-9) -> list[int]:
        """0-based indices of the branches satisfied by ``point``."""
        return [k for k, br in enumerate(self.branches) if all(r.violation(point) <= tol for r in br)]


def precedes(p: int, q: int, axis: str) -> Constraint:
    """Box ``p`` lies before box ``q`` along ``axis``: ``c_p + l_p/2 <= c_q - l_q/2``."""
    cp, cq = LinExpr({names.c(axis, p): 1.0}), LinExpr({names.c(axis, q): 1.0})
    lp, lq = LinExpr({names.l(axis, p): 1.0}), LinExpr({names.l(axis, q): 1.0})
    return (cp + 0.5 * lp - cq + 0.5 * lq <= 0).named(f"prec_{axis}_{p}_{q}")


def not_precedes(p: int, q: int, axis: str) -> Constraint:
    """``c_p + l_p/2 >= c_q - l_q/2``."""
    cp, cq = LinExpr({names.c(axis, p): 1.0}), LinExpr({names.c(axis, q): 1.0})
    lp, lq = LinExpr({names.l(axis, p): 1.0}), LinExpr({names.l(axis, q): 1.0})
    return (cp + 0.5 * lp - cq + 0.5 * lq >= 0).named(f"nprec_{axis}_{p}_{q}")


# precedence meaning of the four D4 branches / unary code slots, in order
D4_ORDER = (("y", 0), ("x", 0), ("y", 1), ("x", 1))


def d4_disjunction(i: int, j: int) -> Disjunction:
    """Non-overlap of boxes ``i`` and ``j``: i<-y j, i<-x j, j<-y i, j<-x i."""
    branches = []
    for axis, flip in D4_ORDER:
        p, q = (j, i) if flip else (i, j)
        branches.append((precedes(p, q, axis),))
    return Disjunction(tuple(branches), ("d1", "d2", "d3", "d4"))


def d8_disjunction(i: int, j: int) -> Disjunction:
    """Refined non-overlap disjunction with eight mutually (almost) exclusive branches."""
    P, N = precedes, not_precedes
    br = [
        (P(i, j, "y"), N(i, j, "x"), N(j, i, "x")),
        (P(i, j, "y"), P(i, j, "x")),
        (P(i, j, "x"), N(i, j, "y"), N(j, i, "y")),
        (P(i, j, "x"), P(j, i, "y")),
        (P(j, i, "y"), N(i, j, "x"), N(j, i, "x")),
        (P(j, i, "x"), P(j, i, "y")),
        (P(j, i, "x"), N(i, j, "y"), N(j, i, "y")),
        (P(j, i, "x"), P(i, j, "y")),
    ]
    return Disjunction(tuple(br), tuple(f"br{k}" for k in range(1, 9)))


# ---------------------------------------------------------------------------
# encodings


@dataclass(frozen=True)
class Encoding:
    """Distinct 0/1 codes; code ``k`` is assigned to branch ``k``."""

    codes: tuple[tuple[int, ...], ...]
    name: str = "custom"

    def __post_init__(self):
        codes = tuple(tuple(int(b) for b in c) for c in self.codes)
        object.__setattr__(self, "codes", codes)
        if not codes:
            raise EmbeddingError("an encoding needs at least one code")
        r = len(codes[0])
        if any(len(c) != r for c in codes):
            raise EmbeddingError("codes must share a common length")
        if any(b not in (0, 1) for c in codes for b in c):
            raise EmbeddingError("codes must be 0/1 vectors")
        if len(set(codes)) != len(codes):
            raise EmbeddingError("codes must be pairwise distinct")
        if 2 ** r < len(codes):
            raise EmbeddingError("code length too short for the number of codes")

    @property
    def size(self) -> int:
        return len(self.codes)

    @property
    def length(self) -> int:
        return len(self.codes[0])

    @classmethod
    def unary(cls, k: int) -> "Encoding":
        return cls(tuple(tuple(int(a == b) for b in range(k)) for a in range(k)), f"U{k}")

    @classmethod
    def gray4(cls) -> "Encoding":
        # positional in D4 branch order; see decisions notes for the ordering
        return cls(((0, 0), (1, 0), (1, 1), (0, 1)), "GB4")

    @classmethod
    def bb4(cls) -> "Encoding":
        return cls(((0, 0), (1, 1), (1, 0), (0, 1)), "BB4")

    @classmethod
    def c8(cls) -> "Encoding":
        e = np.eye(4, dtype=int)
        seq = [e[0], e[0] + e[1], e[1], e[1] + e[2], e[2], e[2] + e[3], e[3], e[3] + e[0]]
        return cls(tuple(tuple(int(b) for b in v) for v in seq), "C8")


U4 = Encoding.unary(4)
GB4 = Encoding.gray4()
BB4 = Encoding.bb4()
C8 = Encoding.c8()


def code_set_formulation(C: Encoding, code_names: Sequence[str]) -> tuple[list[Variable], list[Constraint]]:
    """Binaries plus rows whose 0/1 solutions are exactly the codes of ``C``.

    Unary codes get ``sum v = 1``, a full cube gets no rows and the C8 family
    gets ``sum z >= 1`` with the two forbidden opposite pairs. Other code sets
    of length up to 8 are cut out by one no-good row per missing 0/1 vector.
    """
    r = C.length
    if len(code_names) != r:
        raise EmbeddingError(f"need {r} code variable names, got {len(code_names)}")
    codes = set(C.codes)
    v = [LinExpr({n: 1.0}) for n in code_names]
    if len(codes) == 1:
        (only,) = codes
        return [Variable(n, b, b, BINARY) for n, b in zip(code_names, only)], []
    variables = [Variable(n, 0.0, 1.0, BINARY) for n in code_names]
    if codes == set(Encoding.unary(r).codes):
        return variables, [eq(lin_sum(v), 1).named("codes_sum")]
    if len(codes) == 2 ** r:
        return variables, []
    if r == 4 and codes == set(C8.codes):
        return variables, [
            (lin_sum(v) >= 1).named("codes_cover"),
            (v[0] + v[2] <= 1).named("codes_pair_a"),
            (v[1] + v[3] <= 1).named("codes_pair_b"),
        ]
    if r > 8:
        raise UnsupportedEncoding(f"no code-set formulation for {C.name} with {r} bits")
    rows = []
    for k, vec in enumerate(itertools.product((0, 1), repeat=r)):
        if vec in codes:
            continue
        expr = lin_sum((1 - v[t]) if vec[t] else v[t] for t in range(r))
        rows.append((expr >= 1).named(f"codes_nogood_{k}"))
    return variables, rows


# ---------------------------------------------------------------------------
# ground sets and big-M functions


@dataclass
class GroundSet:
    """Bounded polyhedron ``Q``: named variables with finite bounds plus common rows."""

    variables: list[Variable]
    constraints: list[Constraint] = field(default_factory=list)

    def validate(self) -> None:
        known = {v.name for v in self.variables}
        for v in self.variables:
            if not (math.isfinite(v.lb) and math.isfinite(v.ub)):
                raise EmbeddingError(f"ground set is unbounded in {v.name!r}")
        for con in self.constraints:
            missing = set(con.coeffs) - known
            if missing:
                raise EmbeddingError(f"row {con.name!r} uses unknown variables {sorted(missing)}")

    def to_model(self, name: str = "Q") -> MilpModel:
        m = MilpModel(name, [Variable(v.name, v.lb, v.ub, v.kind, v.priority) for v in self.variables])
        for con in self.constraints:
            m.add(Constraint(dict(con.coeffs), con.sense, con.rhs, con.name))
        return m

    def maximize(self, coeffs: dict[str, float]) -> float:
        """``max coeffs . x`` over ``Q``; ``-inf`` when ``Q`` is empty."""
        m = self.to_model()
        c, A, senses, b, lb, ub = m.to_arrays()
        obj = np.zeros(len(m.variables))
        for k, val in coeffs.items():
            obj[m.index(k)] = -val
        res = BoundedSimplex(obj, A, senses, b).solve(lb, ub)
        if res.status != OPTIMAL:
            return -math.inf
        return -res.value


AffineCode = tuple[dict[int, float], float]  # ({bit: coef}, const) over code bits


def _le_rows(con: Constraint) -> list[tuple[dict[str, float], float]]:
    return con.as_le()


def code_distance(C: Encoding, k: int) -> AffineCode:
    """Affine ``phi`` with ``phi(h^k) = 0`` and ``phi(h^s) >= 1`` for every other code.

    Uses a single bit when code ``k`` owns a private 1 (``1 - v_t``) or a
    private 0 (``v_t``); otherwise the Hamming distance to ``h^k``.
    """
    hk = C.codes[k]
    others = [h for s, h in enumerate(C.codes) if s != k]
    if not others:
        return {}, 0.0
    for t in range(C.length):
        if hk[t] == 1 and all(h[t] == 0 for h in others):
            return {t: -1.0}, 1.0
    for t in range(C.length):
        if hk[t] == 0 and all(h[t] == 1 for h in others):
            return {t: 1.0}, 0.0
    coef, const = {}, 0.0
    for t, b in enumerate(hk):
        if b:
            coef[t] = -1.0
            const += 1.0
        else:
            coef[t] = 1.0
    return coef, const


def default_bigM(Q: GroundSet, row: tuple[dict[str, float], float], C: Encoding, k: int) -> AffineCode:
    """``R(v) = b + M phi_k(v)`` with ``M = max_Q (a x) - b`` (never negative)."""
    coeffs, rhs = row
    Q.validate()
    M = max(0.0, Q.maximize(coeffs) - rhs)
    phi, const = code_distance(C, k)
    return {t: M * c for t, c in phi.items()}, rhs + M * const


RFunction = Callable[[int, int, tuple[dict[str, float], float]], AffineCode]


def build_bigM_embedding(
    Q: GroundSet,
    D: Disjunction,
    C: Encoding,
    code_names: Sequence[str] | None = None,
    V: tuple[list[Variable], list[Constraint]] | None = None,
    R: RFunction | None = None,
    name: str = "embedding",
) -> MilpModel:
    """Big-M formulation of ``Em(Q, D, C)``.

    ``R(k, l, (a, b))`` returns the affine function for row ``l`` of branch
    ``k`` (both 0-based, rows in ``<=`` form) as ``({bit: coef}, const)``.
    When omitted, :func:`default_bigM` is used.
    """
    if len(D) != C.size:
        raise EmbeddingError(f"{len(D)} branches but {C.size} codes")
    Q.validate()
    missing = D.variables() - {v.name for v in Q.variables}
    if missing:
        raise EmbeddingError(f"disjunction uses variables outside Q: {sorted(missing)}")
    code_names = list(code_names or [f"v{t + 1}" for t in range(C.length)])
    variables, vrows = V if V is not None else code_set_formulation(C, code_names)
    model = Q.to_model(name)
    for var in variables:
        model.add_var(var.name, var.lb, var.ub, var.kind, var.priority)
    for con in vrows:
        model.add(Constraint(dict(con.coeffs), con.sense, con.rhs, con.name))
    for k, branch in enumerate(D.branches):
        l = 0
        for con in branch:
            for coeffs, rhs in _le_rows(con):
                bits, const = R(k, l, (coeffs, rhs)) if R else default_bigM(Q, (coeffs, rhs), C, k)
                expr = LinExpr(coeffs) - LinExpr({code_names[t]: c for t, c in bits.items() if c}, const)
                model.add(expr <= 0, name=f"bigM_{k + 1}_{l + 1}")
                l += 1
    return model


def embedding_contains(model: MilpModel, D: Disjunction, C: Encoding, code_names, point, tol=1e-9) -> bool:
    """Membership of ``(x, code)`` in ``Em(Q, D, C)`` where ``Q`` is the model's base part."""
    h = tuple(int(round(point[n])) for n in code_names)
    if h not in C.codes:
        return False
    k = C.codes.index(h)
    return all(r.violation(point) <= tol for r in D.branches[k])


# ---------------------------------------------------------------------------
# small fixtures


def refined_disjunction_fixture() -> tuple[GroundSet, Disjunction, Disjunction]:
    """``Q1 = [0,1]^2`` with ``D^A`` (two overlapping branches) and its refinement ``D^B``."""
    x1, x2 = LinExpr({"x1": 1.0}), LinExpr({"x2": 1.0})
    Q = GroundSet([Variable("x1", 0.0, 1.0), Variable("x2", 0.0, 1.0)])
    DA = Disjunction(((x1 + x2 <= 1,), (x2 <= x1,)), ("A1", "A2"))
    DB = Disjunction(
        ((x1 + x2 <= 1, x1 <= x2), (x1 + x2 <= 1, x2 <= x1), (x1 + x2 >= 1, x2 <= x1)),
        ("B1", "B2", "B3"),
    )
    return Q, DA, DB
