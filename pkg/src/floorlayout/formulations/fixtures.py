"""Toy models showing how the choice of common constraints changes LP strength."""

from __future__ import annotations

from ..milp.model import LinExpr, MilpModel, eq

# point (x1, x2, v1, v2) feasible for the weak two-branch model but not the strong one
M2_WITNESS = {"x1": 1.0, "x2": 1.0, "v1": 0.5, "v2": 0.5}


def _m2(strong: bool) -> MilpModel:
    m = MilpModel("M2-strong" if strong else "M2-weak")
    x1 = m.add_var("x1", 0.0, 2.0)
    x2 = m.add_var("x2", 0.0, 2.0)
    v1 = m.add_binary("v1")
    v2 = m.add_binary("v2")
    m.add(x2 >= 0, name="x2_lo")
    m.add(x2 <= 3 - 2 * v1 - x1, name="x2_hi")
    m.add(1 - v1 <= x1, name="x1_lo")
    m.add(x1 <= 2 - v1, name="x1_hi")
    if strong:
        m.add(1 + x2 <= x1 + 1.5 * v1, name="branch2")
    else:
        m.add(1 + x2 <= x1 + 2 * v1, name="branch2")
    m.add(eq(v1 + v2, 1), name="one_branch")
    m.add(x2 <= x1 + 0.5, name="common")
    return m


def m2_strengthened_row():
    x1, x2, v1 = (LinExpr({n: 1.0}) for n in ("x1", "x2", "v1"))
    return (1 + x2 <= x1 + 1.5 * v1).named("branch2_strong")


def _m3(strong: bool) -> MilpModel:
    m = MilpModel("M3-strong" if strong else "M3-weak")
    x1 = m.add_var("x1", 0.0, 4.0)
    y1 = m.add_var("y1", 0.0, 4.0)
    v1 = m.add_binary("v1")
    v2 = m.add_binary("v2")
    m.add(3 - 3 * v1 <= x1, name="x1_lo")
    m.add(x1 <= 4 - 3 * v1, name="x1_hi")
    m.add(eq(v1 + v2, 1), name="one_branch")
    if strong:
        m.add(x1 - 2 + 2 * v1 <= y1, name="abs_pos")
        m.add(-x1 + 2 + 2 * (1 - v1) <= y1, name="abs_neg")
    else:
        m.add(x1 - 2 <= y1, name="abs_pos")
        m.add(-x1 + 2 <= y1, name="abs_neg")
    m.set_objective(y1)
    return m


def fixture_models() -> dict[str, MilpModel]:
    return {
        "M2-weak": _m2(False),
        "M2-strong": _m2(True),
        "M3-weak": _m3(False),
        "M3-strong": _m3(True),
    }
