"""Shared instance factories for the test suite."""

from __future__ import annotations

import numpy as np

from rmfs_alloc.instance import GeneratorProfile, build_instance, generate_instance


def small_instance(seed: int, max_orders: int = 8, max_racks: int = 6, max_pickers: int = 2, max_products: int = 6):
    """Random instance within the enumeration-friendly envelope."""
    rng = np.random.default_rng(10_000 + seed)
    O = int(rng.integers(1, max_orders + 1))
    P = int(rng.integers(1, min(max_pickers, O) + 1))
    R = int(rng.integers(P, max_racks + 1))
    N = int(rng.integers(1, max_products + 1))
    balanced = bool(rng.random() < 0.7)
    profile = GeneratorProfile(
        scatter=min(2, R),
        units_per_slot=(1, 4),
        balanced=balanced,
        capacity_range=(1, max(1, O)),
        single_unit_share=float(rng.choice([0.3, 0.55, 0.8])),
    )
    return generate_instance(N, O, R, P, seed=seed, profile=profile, name=f"small-{seed}")


def tiny(demand, stock, capacity, name="tiny"):
    return build_instance(np.array(demand), np.array(stock), list(capacity), name=name)
