from rmfs_alloc.instance.data import Instance, build_instance, unsatisfiable_orders
from rmfs_alloc.instance.generator import GeneratorProfile, generate_instance
from rmfs_alloc.instance.io import dump_instance, instance_to_dict, load_instance, read_instance
from rmfs_alloc.instance.sets import DerivedSets, base_sets, derive_sets

__all__ = [
    "DerivedSets",
    "GeneratorProfile",
    "Instance",
    "base_sets",
    "build_instance",
    "derive_sets",
    "dump_instance",
    "generate_instance",
    "instance_to_dict",
    "load_instance",
    "read_instance",
    "unsatisfiable_orders",
]
