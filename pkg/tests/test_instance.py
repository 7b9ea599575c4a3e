import json

import numpy as np
import pytest

from helpers import tiny
from rmfs_alloc.errors import InfeasibleStockError, InvariantError, ParseError, ProfileError
from rmfs_alloc.instance import (
    GeneratorProfile,
    base_sets,
    build_instance,
    derive_sets,
    dump_instance,
    generate_instance,
    instance_to_dict,
    load_instance,
    read_instance,
    unsatisfiable_orders,
)


def test_pickers_sorted_by_capacity_with_permutation_kept():
    inst = tiny([[1, 1, 1]], [[3]], [1, 2])
    assert inst.capacity.tolist() == [2, 1]
    assert list(inst.picker_ids) == [1, 0]


def test_arrays_are_read_only():
    inst = tiny([[1]], [[1]], [1])
    with pytest.raises(ValueError):
        inst.demand[0, 0] = 5


@pytest.mark.parametrize(
    "demand, stock, caps",
    [
        ([[-1]], [[1]], [1]),
        ([[1]], [[1]], [0]),
        ([[0]], [[1]], [1]),
        ([[3]], [[1]], [1]),
    ],
)
def test_invalid_data_rejected(demand, stock, caps):
    with pytest.raises(InvariantError):
        tiny(demand, stock, caps)


def test_drop_unsatisfiable_orders():
    demand = np.array([[1, 5]])
    stock = np.array([[2]])
    assert unsatisfiable_orders(demand, stock) == [(1, 0)]
    inst = build_instance(demand, stock, [1], drop_unsatisfiable=True)
    assert inst.n_orders == 1
    assert list(inst.dropped_orders) == [1]
    assert list(inst.order_ids) == [0]


def test_json_round_trip_is_byte_stable():
    inst = generate_instance(5, 7, 4, 2, seed=9)
    text = dump_instance(inst, "json")
    back = load_instance(text, "json")
    assert back.same_data(inst)
    assert dump_instance(back, "json") == text


def test_text_round_trip_and_comments():
    inst = generate_instance(4, 6, 3, 2, seed=2)
    text = dump_instance(inst, "text")
    assert load_instance("# leading comment\n" + text, "text").same_data(inst)


def test_text_accepts_colon_pairs():
    text = "2 1 1 1\n1\n0:1 1:2\n2 0 1 1 2\n"
    inst = load_instance(text, "text")
    assert inst.demand[:, 0].tolist() == [1, 2]


@pytest.mark.parametrize("text", ["{", json.dumps({"version": 1}), json.dumps({"version": 99, "orders": []})])
def test_bad_json(text):
    with pytest.raises(ParseError):
        load_instance(text, "json")


def test_read_instance_picks_format_by_suffix(tmp_path):
    inst = generate_instance(3, 4, 3, 1, seed=1)
    (tmp_path / "a.json").write_text(dump_instance(inst, "json"))
    (tmp_path / "a.txt").write_text(dump_instance(inst, "text"))
    assert read_instance(tmp_path / "a.json").same_data(inst)
    assert read_instance(tmp_path / "a.txt").same_data(inst)


def test_generator_is_deterministic_and_covers_demand():
    a = generate_instance(20, 30, 15, 3, seed=4)
    b = generate_instance(20, 30, 15, 3, seed=4)
    c = generate_instance(20, 30, 15, 3, seed=5)
    assert a.same_data(b) and not a.same_data(c)
    assert (a.stock.sum(axis=1) >= a.demand.sum(axis=1)).all()
    assert a.capacity.sum() == 30


def test_generator_single_unit_share_roughly_respected():
    inst = generate_instance(50, 400, 40, 4, seed=0, profile=GeneratorProfile(single_unit_share=0.5))
    share = (inst.demand.sum(axis=0) == 1).mean()
    assert 0.4 < share < 0.6


@pytest.mark.parametrize(
    "profile, counts",
    [
        (GeneratorProfile(scatter=5), (3, 3, 2, 1)),
        (GeneratorProfile(single_unit_share=1.5), (3, 3, 3, 1)),
        (GeneratorProfile(), (3, 1, 3, 2)),
        (GeneratorProfile(slots_per_rack=1), (5, 3, 2, 1)),
    ],
)
def test_bad_profiles(profile, counts):
    with pytest.raises(ProfileError):
        generate_instance(*counts, seed=0, profile=profile)


def test_profile_from_dict_rejects_unknown_keys():
    with pytest.raises(ProfileError):
        GeneratorProfile.from_dict({"nope": 1})
    assert GeneratorProfile.from_dict(GeneratorProfile().as_dict()) == GeneratorProfile()


def test_derived_sets_small_example():
    # product 0: racks 0,1; product 1: rack 1 only; product 2 unused
    demand = [[2, 1], [1, 0], [0, 0]]
    stock = [[1, 3], [0, 1], [4, 0]]
    inst = tiny(demand, stock, [1, 1])
    sets = derive_sets(inst)
    assert sets.active_products == (0, 1)
    assert sets.single_unit_orders == frozenset({1})
    assert sets.racks_of_product[0] == (0, 1)
    assert sets.racks_of_order[0] == (0, 1)
    assert sets.full_supply_racks[0] == (1,)
    assert sets.gamma[0] == 1 and sets.gamma[1] == 1
    assert sets.delta == (1, 1)
    assert sets.useful_racks == (0, 1)


def test_irrelevant_rack_is_not_useful():
    inst = tiny([[1], [0]], [[1, 0], [0, 5]], [1])
    assert base_sets(inst).useful_racks == (0,)


def test_derive_sets_raises_on_stock_shortfall():
    inst = tiny([[1, 1]], [[1, 1]], [1, 1])
    object.__setattr__(inst, "stock", np.array([[1, 0]]))
    with pytest.raises(InfeasibleStockError):
        derive_sets(inst)


def test_instance_dict_has_schema_fields():
    doc = instance_to_dict(generate_instance(2, 2, 2, 1, seed=0))
    for key in ("version", "n_products", "n_orders", "n_racks", "n_pickers", "capacity", "orders", "racks"):
        assert key in doc
