import itertools

import numpy as np
import pytest

from helpers import tiny
from rmfs_alloc.bounds import BoundsSolver, enumerate_multi_cover, greedy_cover_count
from rmfs_alloc.errors import InfeasibleStockError
from rmfs_alloc.instance import base_sets


def brute(stock, need):
    n = stock.shape[1]
    for k in range(1, n + 1):
        for c in itertools.combinations(range(n), k):
            if (stock[:, list(c)].sum(axis=1) >= need).all():
                return k
    return None


def test_greedy_counts():
    assert greedy_cover_count([1, 5, 2], 6) == 2
    assert greedy_cover_count([1, 1], 3) is None
    assert greedy_cover_count([], 0) == 0


def test_largest_rack_covering_gives_one():
    inst = tiny([[3]], [[1, 4, 2]], [1])
    assert BoundsSolver().min_racks_for_product(0, inst, base_sets(inst)) == 1


def test_gamma_needs_several_racks():
    inst = tiny([[5]], [[2, 2, 2]], [1])
    assert BoundsSolver().min_racks_for_product(0, inst, base_sets(inst)) == 3


def test_gamma_reports_shortfall():
    inst = tiny([[1, 1]], [[1, 1]], [1])
    object.__setattr__(inst, "stock", np.array([[1, 0]]))
    with pytest.raises(InfeasibleStockError) as info:
        BoundsSolver().all_gammas(inst, base_sets(inst))
    assert info.value.products == [0]


def test_single_unit_order_delta_is_one():
    inst = tiny([[1], [0]], [[1, 0], [0, 1]], [1])
    assert BoundsSolver().min_racks_for_order(0, inst, base_sets(inst)) == 1


def test_delta_greedy_per_product_is_not_enough():
    # each product alone needs one rack, but no rack holds both
    inst = tiny([[1], [1]], [[1, 0], [0, 1]], [1])
    assert BoundsSolver().min_racks_for_order(0, inst, base_sets(inst)) == 2


@pytest.mark.parametrize("seed", range(40))
def test_enumeration_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n, R = int(rng.integers(1, 4)), int(rng.integers(1, 9))
    stock = rng.integers(0, 4, (n, R))
    need = np.array([int(rng.integers(1, max(2, stock[i].sum() + 1))) for i in range(n)])
    assert enumerate_multi_cover(stock, need) == brute(stock, need)


@pytest.mark.parametrize("seed", range(15))
def test_milp_mode_agrees_with_enumeration(seed):
    rng = np.random.default_rng(100 + seed)
    R = int(rng.integers(2, 9))
    stock = np.where(rng.random((3, R)) < 0.5, rng.integers(1, 4, (3, R)), 0)
    stock[:, 0] = np.maximum(stock[:, 0], 1)
    need = np.array([int(rng.integers(1, stock[i].sum() + 1)) for i in range(3)])
    inst = tiny(need[:, None], stock, [1])
    sets = base_sets(inst)
    fast = BoundsSolver().min_racks_for_order(0, inst, sets)
    slow = BoundsSolver(mode="milp_backend").min_racks_for_order(0, inst, sets)
    capped = BoundsSolver(enumeration_cap=1).min_racks_for_order(0, inst, sets)
    assert fast == slow == capped


def test_bad_mode_rejected():
    with pytest.raises(ValueError):
        BoundsSolver(mode="guess")
