import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from floorlayout.formulations import AssemblyOptions, assemble_nbox
from floorlayout.milp import (
    LPFormatError,
    MilpModel,
    ModelError,
    export_model,
    import_model,
    relative_gap,
    solve_lp,
    solve_milp,
)
from floorlayout.milp.bnb import read_node_log
from floorlayout.milp.model import LinExpr, eq


def test_linexpr_algebra():
    x, y = LinExpr({"x": 1.0}), LinExpr({"y": 1.0})
    e = 2 * x - y + 3 - (x - 1)
    assert e.terms == {"x": 1.0, "y": -1.0} and e.const == 4.0
    assert e.value({"x": 2, "y": 5}) == 1.0


def test_constraint_violation_and_le_form():
    x = LinExpr({"x": 1.0})
    con = eq(x, 2)
    assert con.violation({"x": 2.5}) == pytest.approx(0.5)
    assert len(con.as_le()) == 2
    assert (x >= 3).violation({"x": 1}) == pytest.approx(2)


def test_model_errors():
    m = MilpModel("m")
    m.add_var("x", 0, 1)
    with pytest.raises(ModelError):
        m.add_var("x", 0, 1)
    with pytest.raises(ModelError):
        m.add(LinExpr({"y": 1.0}) <= 1)
        m.validate()


def test_lp_simple_bound():
    m = MilpModel("t")
    x = m.add_var("x", 0, 4)
    m.add(x >= 3)
    m.set_objective(x)
    res = solve_lp(m)
    assert res.status == "optimal" and res.value == pytest.approx(3)


def test_lp_infeasible_and_unbounded():
    m = MilpModel("inf")
    x = m.add_var("x", 0, 1)
    m.add(x >= 2)
    assert solve_lp(m).status == "infeasible"
    m = MilpModel("unb")
    x = m.add_var("x", -math.inf, math.inf)
    m.set_objective(x)
    assert solve_lp(m).status == "unbounded"


def test_two_box_unary_root_zero(toy2):
    assert solve_lp(assemble_nbox(toy2, AssemblyOptions(kind="u"))).value == pytest.approx(0, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_simplex_matches_highs(seed):
    rng = np.random.default_rng(seed)
    n, k = rng.integers(2, 6), rng.integers(1, 7)
    m = MilpModel("r")
    xs = [m.add_var(f"x{t}", float(rng.uniform(-3, 0)), float(rng.uniform(0, 3))) for t in range(n)]
    A = rng.normal(size=(k, n))
    b = rng.uniform(-1, 2, size=k)
    senses = rng.choice(["<=", ">=", "=="], size=k, p=[0.45, 0.45, 0.1])
    for row, rhs, sense in zip(A, b, senses):
        expr = sum((float(a) * x for a, x in zip(row, xs)), LinExpr())
        m.add({"<=": expr <= float(rhs), ">=": expr >= float(rhs), "==": eq(expr, float(rhs))}[sense])
    c = rng.normal(size=n)
    m.set_objective(sum((float(a) * x for a, x in zip(c, xs)), LinExpr()))
    ours = solve_lp(m)
    ub_rows = [(r if s == "<=" else -r, v if s == "<=" else -v) for r, v, s in zip(A, b, senses) if s != "=="]
    eq_rows = [(r, v) for r, v, s in zip(A, b, senses) if s == "=="]
    ref = linprog(
        c,
        A_ub=np.array([r for r, _ in ub_rows]) if ub_rows else None,
        b_ub=np.array([v for _, v in ub_rows]) if ub_rows else None,
        A_eq=np.array([r for r, _ in eq_rows]) if eq_rows else None,
        b_eq=np.array([v for _, v in eq_rows]) if eq_rows else None,
        bounds=[(v.lb, v.ub) for v in m.variables],
        method="highs",
    )
    if ref.status == 2:
        assert ours.status == "infeasible"
    else:
        assert ours.status == "optimal"
        assert ours.value == pytest.approx(ref.fun, abs=1e-7)


def test_milp_integral_root_one_node():
    m = MilpModel("int")
    x = m.add_binary("x")
    y = m.add_binary("y")
    m.add(x + y >= 1)
    m.set_objective(x + 2 * y)
    res = solve_milp(m)
    assert res.status == "optimal" and res.incumbent == pytest.approx(1) and res.nodes == 1


def test_milp_infeasible():
    m = MilpModel("inf")
    x = m.add_binary("x")
    m.add(x >= 2)
    res = solve_milp(m)
    assert res.status == "infeasible" and res.incumbent is None


def test_milp_knapsack_matches_enumeration():
    rng = np.random.default_rng(1)
    w, v = rng.integers(1, 10, 8), rng.integers(1, 10, 8)
    m = MilpModel("knap")
    xs = [m.add_binary(f"x{t}") for t in range(8)]
    m.add(sum((int(a) * x for a, x in zip(w, xs)), LinExpr()) <= 20)
    m.set_objective(sum((-int(a) * x for a, x in zip(v, xs)), LinExpr()))
    best = min(-v @ bits for bits in np.ndindex(*(2,) * 8) if w @ np.array(bits) <= 20)
    res = solve_milp(m)
    assert res.incumbent == pytest.approx(best)
    assert res.bound <= res.incumbent + 1e-6


def test_milp_toy2_ru(toy2):
    res = solve_milp(assemble_nbox(toy2, AssemblyOptions(kind="ru")))
    assert res.status == "optimal" and res.incumbent == pytest.approx(1.0)


def test_node_limit_and_log(toy3):
    buf = io.StringIO()
    res = solve_milp(assemble_nbox(toy3, AssemblyOptions(kind="u")), node_limit=1, node_log=buf)
    assert res.status == "node-limit" and res.nodes == 1
    rows = read_node_log(buf.getvalue())
    assert len(rows) == 1
    # weak duality along the log
    full = solve_milp(assemble_nbox(toy3, AssemblyOptions(kind="u")))
    for _, bound, inc, _ in full.log:
        assert bound <= inc + 1e-6


def test_cutoff_bound_limit(toy3):
    res = solve_milp(assemble_nbox(toy3, AssemblyOptions(kind="ru", cuts="vi")), cutoff=-1.0)
    assert res.status == "bound-limit"


def test_relative_gap():
    assert relative_gap(10.0, 9.0) == pytest.approx(10.0)
    assert relative_gap(None, 0.0) == math.inf


def test_export_empty_model():
    text = export_model(MilpModel("empty"))
    for section in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
        assert section in text
    assert import_model(text).structurally_equal(MilpModel("empty"))


def test_export_one_variable_roundtrip():
    m = MilpModel("one")
    x = m.add_var("x", -1.5, 2.0)
    m.add(x >= -1, name="low")
    m.set_objective(3 * x + 1)
    back = import_model(export_model(m))
    assert back.structurally_equal(m)
    assert solve_lp(back).value == pytest.approx(solve_lp(m).value)


def test_export_unary_model_roundtrip(toy2):
    m = assemble_nbox(toy2, AssemblyOptions(kind="u", cuts="vi"))
    back = import_model(export_model(m))
    assert back.structurally_equal(m)
    assert solve_milp(back).incumbent == pytest.approx(solve_milp(m).incumbent)


def test_export_keeps_cut_tags(toy3):
    text = export_model(assemble_nbox(toy3, AssemblyOptions(kind="ru", cuts="vi")))
    assert " cut_obj3_x_" in text


def test_import_errors():
    with pytest.raises(LPFormatError):
        import_model("Minimize\n obj: x\nSubject To\n c1: x <=\nEnd\n")
    with pytest.raises(ValueError):
        export_model(MilpModel("m"), fmt="mps")
