import numpy as np
import pytest

from helpers import small_instance, tiny
from rmfs_alloc.errors import CapacityShortfall, EmptyTheta
from rmfs_alloc.formulations import (
    FormulationOptions,
    Strategy,
    big_m,
    build_first_stage,
    build_second_stage,
    partition_orders,
    picker_capacities,
)
from rmfs_alloc.instance import derive_sets
from rmfs_alloc.milp import Status, solve


def names(sm):
    return {c.name for c in sm.model.constraints}


def test_strategy_parse():
    assert Strategy.parse("s2") is Strategy.S2
    assert Strategy.parse("3") is Strategy.S3
    with pytest.raises(ValueError):
        Strategy.parse("s9")


def test_partitions():
    # order 0 single unit; order 1 fits rack 0 alone; order 2 needs two racks
    demand = [[1, 1, 3], [0, 1, 1]]
    stock = [[2, 3], [2, 0]]
    inst = tiny(demand, stock, [3])
    sets = derive_sets(inst)
    assert partition_orders("S1", sets, 3) == ((0, 1, 2), ())
    assert partition_orders("S2", sets, 3) == ((1, 2), (0,))
    assert partition_orders("S3", sets, 3) == ((0, 1), (2,))


def test_big_m_exceeds_every_rack_term():
    inst = small_instance(4)
    sets = derive_sets(inst)
    m = big_m(inst, sets)
    for r in range(inst.n_racks):
        term = sum(inst.stock[i, r] / sets.total_demand[i] for i in sets.active_products)
        assert m - term >= 1.0 - 1e-12


def test_artificial_picker_added_only_when_short():
    inst = tiny([[1, 1, 1]], [[3]], [1])
    assert picker_capacities(inst, 3, True) == (1, 2)
    assert picker_capacities(inst, 1, True) == (1,)
    with pytest.raises(CapacityShortfall):
        picker_capacities(inst, 3, False)


def test_irrelevant_racks_get_no_variables():
    inst = tiny([[1], [0]], [[1, 0], [0, 4]], [1])
    sm = build_first_stage(inst, derive_sets(inst), "S1")
    assert set(sm.u) == {0}
    assert all(r == 0 for r, _ in sm.y)


def test_strategy_three_blocks_present():
    demand = [[1, 1], [1, 1]]
    stock = [[1, 1, 1], [1, 1, 0]]
    inst = tiny(demand, stock, [2])
    sm = build_first_stage(inst, derive_sets(inst), "S3")
    assert set(sm.z) == {(0, 0), (0, 1), (1, 0), (1, 1)}
    got = names(sm)
    assert {"single_0", "omega_0", "zlink_lo_0_0_0"} <= got
    assert not any(n.startswith("delta_") for n in got)


def test_option_toggles_control_blocks():
    inst = small_instance(7)
    sets = derive_sets(inst)
    full = names(build_first_stage(inst, sets, "S1"))
    bare = names(build_first_stage(inst, sets, "S1", FormulationOptions().without_extras()))
    assert any(n.startswith("gamma_") for n in full)
    assert not any(n.startswith(("gamma_", "delta_", "ord_", "picker_lb", "solo_")) for n in bare)


def test_rack_penalty_changes_costs_only_outside_kept():
    inst = small_instance(12)
    sets = derive_sets(inst)
    plain = build_first_stage(inst, sets, "S2")
    kept = frozenset(sets.useful_racks[:1])
    pen = build_first_stage(inst, sets, "S2", FormulationOptions(rack_penalty=(kept, None)))
    for r, var in plain.u.items():
        diff = pen.model.objective[var] - plain.model.objective[var]
        assert diff == pytest.approx(0.0 if r in kept else plain.big_m / 2)


def test_second_stage_needs_theta():
    inst = small_instance(3)
    sets = derive_sets(inst)
    F, S = partition_orders("S2", sets, inst.n_orders)
    with pytest.raises(EmptyTheta):
        build_second_stage(inst, sets, "S2", F, S, ())


def test_second_stage_uses_only_theta():
    inst = small_instance(21)
    sets = derive_sets(inst)
    F, S = partition_orders("S2", sets, inst.n_orders)
    theta = sets.useful_racks
    sm = build_second_stage(inst, sets, "S2", F, S, theta)
    assert {r for r, _ in sm.y} == set(theta)
    assert set(sm.v) == set(S)
    assert sm.model.sense == "max"


def test_first_stage_rack_count_single_order():
    # one order of two products on two different racks: two racks needed
    inst = tiny([[1], [1]], [[1, 0], [0, 1]], [1])
    sm = build_first_stage(inst, derive_sets(inst), "S1")
    out = solve(sm.model)
    assert out.status is Status.OPTIMAL
    assert out.objective == pytest.approx(2)


def test_stage_one_solution_satisfies_all_constraints():
    inst = small_instance(33)
    sm = build_first_stage(inst, derive_sets(inst), "S2")
    out = solve(sm.model)
    if out.has_incumbent:
        assert sm.model.violations(out.values) == []
        assert np.isclose(out.values[list(sm.u.values())], np.round(out.values[list(sm.u.values())])).all()
