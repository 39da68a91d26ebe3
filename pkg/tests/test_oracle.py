"""Ground-truth oracle: frozen optima, layout checks, sampler, vertex enumeration."""

import numpy as np
import pytest

from floorlayout.formulations import AssemblyOptions, assemble_nbox, layout_from_point, pairwise_model
from floorlayout.instance import BoxSpec, FlpInstance, Layout, derive_bounds, parse_instance, random_instance
from floorlayout.oracle import (
    OracleError,
    brute_force_optimum,
    check_layout,
    enumerate_vertices,
    fractional_vertices,
    sample_feasible_points,
)

# frozen before the formulations were compared against them
FROZEN = {"toy2": 1.0, "toy3": 7.898430766356346, "toy4": 25.290884589140262}


def test_single_box_value_zero():
    inst = FlpInstance(10, 10, (BoxSpec(1, 4, 4),))
    res = brute_force_optimum(inst)
    assert res.status == "optimal" and res.value == 0.0


def test_toy2_frozen(toy2):
    assert brute_force_optimum(toy2).value == pytest.approx(FROZEN["toy2"], abs=1e-9)


def test_toy3_frozen(toy3):
    assert brute_force_optimum(toy3).value == pytest.approx(FROZEN["toy3"], rel=1e-9)


def test_toy4_frozen(toy4):
    res = brute_force_optimum(toy4)
    assert res.lps == 4 ** 6
    assert res.value == pytest.approx(FROZEN["toy4"], rel=1e-9)


def test_d8_variant_agrees(toy3):
    assert brute_force_optimum(toy3, variant="d8").value == pytest.approx(FROZEN["toy3"], rel=1e-9)


def test_zero_cost_value_zero(zero_cost_pair):
    assert brute_force_optimum(zero_cost_pair).value == 0.0


def test_guard_refuses_large():
    with pytest.raises(OracleError):
        brute_force_optimum(random_instance(5, 0))
    with pytest.raises(OracleError):
        brute_force_optimum(random_instance(4, 0), variant="d8")


def test_infeasible_verdict():
    # two boxes that each need the whole floor
    inst = parse_instance("floor 2 2\nbox 1 4 1\nbox 2 4 1\ncost 1 2 1\n")
    res = brute_force_optimum(inst)
    assert res.status == "infeasible" and res.value is None


def test_oracle_layout_is_feasible(toy3):
    res = brute_force_optimum(toy3)
    rep = check_layout(toy3, res.layout)
    assert rep.feasible
    assert rep.objective == pytest.approx(res.value, rel=1e-9)


# ---------------------------------------------------------------------------
# check_layout


def _two_unit_boxes(dx):
    center = {(1, "x"): 1.0, (1, "y"): 1.0, (2, "x"): 1.0 + dx, (2, "y"): 1.0}
    width = {(b, s): 1.0 for b in (1, 2) for s in ("x", "y")}
    return Layout(center, width)


def test_side_by_side_feasible():
    inst = parse_instance("floor 10 10\nbox 1 1 1\nbox 2 1 1\ncost 1 2 2.5\n")
    rep = check_layout(inst, _two_unit_boxes(1.0))
    assert rep.feasible
    assert rep.objective == pytest.approx(2.5)
    assert rep.pairs[0].branches == ["d2"]


def test_overlap_fails():
    inst = parse_instance("floor 10 10\nbox 1 1 1\nbox 2 1 1\ncost 1 2 1\n")
    rep = check_layout(inst, _two_unit_boxes(0.5))
    assert not rep.feasible
    assert rep.pairs[0].branches == [] and not rep.pairs[0].ok


def test_area_shortfall_slack():
    inst = parse_instance("floor 10 10\nbox 1 4 4\n")
    lay = Layout({(1, "x"): 5.0, (1, "y"): 5.0}, {(1, "x"): 2.0, (1, "y"): 1.95})
    rep = check_layout(inst, lay)
    assert rep.areas[0].slack == pytest.approx(-0.1)
    assert not rep.areas[0].ok and not rep.feasible
    assert "area 1: FAIL" in rep.to_text()
    assert rep.to_csv_row().startswith("0,")


# ---------------------------------------------------------------------------
# sampler


def test_sampler_count_zero(toy3):
    assert sample_feasible_points(assemble_nbox(toy3), 0) == []


@pytest.mark.parametrize("kind", ["u-bigm", "u", "gray", "bldp1", "sp", "ru", "ext"])
def test_samples_are_feasible_layouts(toy3, kind):
    model = assemble_nbox(toy3, AssemblyOptions(kind=kind))
    samples = sample_feasible_points(model, 40, seed=3)
    assert len(samples) == 40
    for s in samples:
        assert model.max_violation(s.point) <= 1e-6
        assert check_layout(toy3, layout_from_point(toy3, s.point)).feasible


def test_sampler_deterministic(toy3):
    model = assemble_nbox(toy3, AssemblyOptions(kind="ru"))
    a = sample_feasible_points(model, 10, seed=9)
    b = sample_feasible_points(model, 10, seed=9)
    assert [s.point for s in a] == [s.point for s in b]


def test_objective_matches_model(toy3):
    model = assemble_nbox(toy3, AssemblyOptions(kind="u"))
    for s in sample_feasible_points(model, 10, seed=5):
        rep = check_layout(toy3, layout_from_point(toy3, s.point))
        assert rep.objective == pytest.approx(model.objective_value(s.point), abs=1e-9)


# ---------------------------------------------------------------------------
# vertices


def test_unit_cube_vertices():
    A = np.vstack([np.eye(3), -np.eye(3)])
    b = np.r_[np.ones(3), np.zeros(3)]
    V = enumerate_vertices(A, b)
    assert len(V) == 8
    assert {tuple(v.round(9)) for v in V} == {tuple(map(float, p)) for p in np.ndindex(2, 2, 2)}


def test_simplex_vertices():
    V = enumerate_vertices(-np.eye(3), np.zeros(3), np.ones((1, 3)), [1.0])
    assert sorted(tuple(v.round(9)) for v in V) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]


def test_vertices_satisfy_rows_and_are_distinct():
    rng = np.random.default_rng(0)
    A = np.vstack([rng.normal(size=(8, 4)), np.eye(4), -np.eye(4)])
    b = np.r_[rng.uniform(0.5, 2, 8), np.ones(4), np.ones(4)]
    V = enumerate_vertices(A, b)
    assert len(V) > 0
    assert (A @ V.T <= b[:, None] + 1e-7).all()
    keys = {tuple(np.round(v / 1e-7)) for v in V}
    assert len(keys) == len(V)


def test_dimension_guard():
    with pytest.raises(OracleError):
        enumerate_vertices(np.eye(15), np.ones(15))


def test_unary_fragment_integral():
    inst = random_instance(2, 1)
    m = pairwise_model("u", (1, 2), derive_bounds(inst), (10, 10), width_ub=False)
    count, frac = fractional_vertices(m)
    assert count > 0 and frac == []
