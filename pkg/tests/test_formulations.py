import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floorlayout.formulations import (
    KINDS,
    M2_WITNESS,
    AssemblyOptions,
    FormulationError,
    area_outer_approx,
    assemble_nbox,
    branch_priorities,
    code_names,
    fixture_models,
    layout_from_point,
    m2_strengthened_row,
    pairwise_model,
    resolve_kind,
    sequence_pair_globals,
    solve_with_area_refinement,
)
from floorlayout.instance import BoxSpec, FlpInstance, derive_bounds, parse_instance, random_instance
from floorlayout.milp import solve_lp, solve_milp
from floorlayout.oracle import brute_force_optimum, check_layout


def test_aliases():
    assert resolve_kind("ru") == "refined_unary" and resolve_kind("unary") == "unary"
    with pytest.raises(FormulationError):
        resolve_kind("nope")


def test_refined_unary_fragment_rows(toy2):
    m = pairwise_model("ru", (1, 2), derive_bounds(toy2), (10, 10))
    assert len(m.binaries()) == 4
    names = {c.name for c in m.constraints}
    assert {"cover_1_2", "excl_x_1_2", "excl_y_1_2"} <= names
    assert any(n.startswith("tsitb_") for n in names)


def test_extended_fragment_copies(toy2):
    m = pairwise_model("ext", (1, 2), derive_bounds(toy2), (10, 10))
    copies = [v.name for v in m.variables if v.name.startswith(("cc_", "lc_"))]
    assert len(copies) == 4 * 2 * 2 * 2
    assert "sum_v_1_2" in {c.name for c in m.constraints}


def test_unary_code_fixes_precedence(toy2):
    m = pairwise_model("u", (1, 2), derive_bounds(toy2), (10, 10))
    m.set_bounds("u_x_1_2", 1, 1)
    # maximize the right edge of box 1 minus the left edge of box 2
    obj = {"c_x_1": -1.0, "l_x_1": -0.5, "c_x_2": 1.0, "l_x_2": -0.5}
    m.set_objective(obj)
    assert solve_lp(m).value >= -1e-9


def test_code_names_per_kind():
    assert code_names("u", 1, 2) == ["u_y_1_2", "u_x_1_2", "u_y_2_1", "u_x_2_1"]
    assert len(code_names("gray", 1, 2)) == 2 and len(code_names("ext", 1, 2)) == 4


def test_pair_order_enforced(toy2):
    m = pairwise_model("u", (1, 2), derive_bounds(toy2), (10, 10))
    from floorlayout.formulations import add_pair
    with pytest.raises(FormulationError):
        add_pair(m, "u", 2, 1, derive_bounds(toy2), {"x": 10, "y": 10})


def test_single_box_model():
    inst = FlpInstance(10, 10, (BoxSpec(1, 4, 2),))
    res = solve_milp(assemble_nbox(inst))
    assert res.status == "optimal" and res.incumbent == 0


@pytest.mark.parametrize("kind", KINDS)
def test_toy2_every_kind(toy2, kind):
    res = solve_milp(assemble_nbox(toy2, AssemblyOptions(kind=kind)))
    assert res.incumbent == pytest.approx(1.0)


@pytest.mark.parametrize("kind", KINDS)
def test_equal_costs_all_kinds_agree(kind):
    inst = parse_instance(
        "floor 6 6\nbox 1 4 2\nbox 2 3 3\nbox 3 5 2\ncost 1 2 1\ncost 1 3 1\ncost 2 3 1\n", "eq3"
    )
    ref = brute_force_optimum(inst).value
    assert solve_milp(assemble_nbox(inst, AssemblyOptions(kind=kind))).incumbent == pytest.approx(ref, rel=1e-6)


@pytest.mark.parametrize("kind", [k for k in KINDS if k != "extended"])
def test_toy3_with_cuts_and_symmetry(toy3, kind):
    ref = brute_force_optimum(toy3).value
    res = solve_milp(assemble_nbox(toy3, AssemblyOptions(kind=kind, cuts="vi3", symmetry=True)))
    assert res.incumbent == pytest.approx(ref, rel=1e-6)
    assert check_layout(toy3, layout_from_point(toy3, res.point)).feasible


def test_tight_sitb_in_formulation(toy3):
    ref = brute_force_optimum(toy3).value
    for kind in ("u", "ru"):
        m = assemble_nbox(toy3, AssemblyOptions(kind=kind, cuts="vi", tight_sitb="in-formulation"))
        assert any(c.name.startswith("tsitb_") for c in m.constraints)
        assert solve_milp(m).incumbent == pytest.approx(ref, rel=1e-6)


def test_option_validation():
    with pytest.raises(FormulationError):
        AssemblyOptions(kind="ext", cuts="vi")
    with pytest.raises(FormulationError):
        AssemblyOptions(kind="ext", symmetry=True)
    with pytest.raises(FormulationError):
        AssemblyOptions(kind="gray", tight_sitb="in-formulation")
    with pytest.raises(FormulationError):
        AssemblyOptions(cuts="all")
    assert AssemblyOptions(kind="gray", cuts="vi", symmetry=True).label == "gray-VI-sym"


def test_branch_priorities_dense_rank(toy4):
    prio = branch_priorities(toy4)
    assert prio[3, 4] == max(prio.values())
    assert prio[1, 3] == prio[2, 4] == 0


def test_model_meta_and_cut_tags(toy3):
    m = assemble_nbox(toy3, AssemblyOptions(kind="ru", cuts="vi3", symmetry=True))
    assert m.meta["n_cuts"] > 0 and m.meta["target"] == "C8"
    tags = {c.name for c in m.constraints}
    assert any(t.startswith("cut_obj3_x_") for t in tags)
    assert any(t.startswith("cut_m1_") for t in tags)
    assert any(t.startswith("sym_") for t in tags)


def test_sequence_pair_global_rows():
    assert sequence_pair_globals(2) == []
    rows = sequence_pair_globals(3)
    assert len(rows) == 12
    # every cyclic order of precedence codes on one coordinate is cut off
    names = ["w_1_2_1", "w_1_3_1", "w_2_3_1"]
    for bits in itertools.product((0, 1), repeat=3):
        pt = dict(zip(names, bits))
        pt.update({n.replace("_1", "_2", 1)[:-1] + "2": 0 for n in names})
        w12, w13, w23 = bits
        cyclic = (w12 and w23 and not w13) or (not w12 and not w23 and w13)
        ok = all(r.violation(pt) <= 1e-9 for r in rows if r.name.startswith("sp_1_"))
        assert ok == (not cyclic)


def test_area_tangent_example():
    (row,) = area_outer_approx(1, 4.0, 2.0, 2.0, 1)
    assert row.violation({"l_x_1": 2.0, "l_y_1": 2.0}) == 0
    assert row.activity({"l_x_1": 1.0, "l_y_1": 4.0}) - row.rhs == pytest.approx(1.0)
    assert area_outer_approx(1, 4.0, 1.0, 4.0, 0) == []


@settings(max_examples=100, deadline=None)
@given(st.floats(0.5, 20), st.floats(1, 8), st.integers(1, 12), st.floats(0, 1))
def test_area_tangents_valid(area, aspect, K, t):
    inst = FlpInstance(100, 100, (BoxSpec(1, area, aspect),))
    bd = derive_bounds(inst)
    lo, hi = bd.lower(1, "x"), bd.upper(1, "x")
    lx = lo + t * (hi - lo)
    pt = {"l_x_1": lx, "l_y_1": area / lx}
    for row in area_outer_approx(1, area, lo, hi, K):
        assert row.violation(pt) <= 1e-9 * max(1.0, area)


def test_m2_fixture():
    models = fixture_models()
    assert models["M2-weak"].is_feasible(M2_WITNESS, tol=1e-12, integrality=False)
    assert m2_strengthened_row().violation(M2_WITNESS) == pytest.approx(0.25, abs=1e-12)


def test_m2_strengthened_row_valid_on_integers():
    weak = fixture_models()["M2-weak"]
    row = m2_strengthened_row()
    for v1 in (0, 1):
        m = weak.copy()
        m.set_bounds("v1", v1, v1)
        m.set_bounds("v2", 1 - v1, 1 - v1)
        m.add(row.__class__(dict(row.coeffs), row.sense, row.rhs, "s"))
        for sign in (1, -1):
            for var in ("x1", "x2"):
                m.set_objective({var: float(sign)})
                base = weak.copy()
                base.set_bounds("v1", v1, v1)
                base.set_bounds("v2", 1 - v1, 1 - v1)
                base.set_objective({var: float(sign)})
                assert solve_lp(m).value == pytest.approx(solve_lp(base).value, abs=1e-9)


def test_m3_fixture_values():
    models = fixture_models()
    assert solve_lp(models["M3-weak"]).value == pytest.approx(0, abs=1e-12)
    assert solve_lp(models["M3-strong"]).value == pytest.approx(1, abs=1e-12)
    assert solve_milp(models["M3-weak"]).incumbent == pytest.approx(1)


def test_area_refinement_reaches_exact_area(toy3):
    m = assemble_nbox(toy3, AssemblyOptions(kind="ru", area_k=0))
    res = solve_with_area_refinement(m, toy3, max_rounds=20, tol=1e-6)
    lay = layout_from_point(toy3, res.point)
    assert check_layout(toy3, lay, tol=1e-5).feasible


def test_n_random_instances_feasible_points():
    inst = random_instance(3, 4)
    res = solve_milp(assemble_nbox(inst, AssemblyOptions(kind="sp")))
    assert check_layout(inst, layout_from_point(inst, res.point)).feasible
