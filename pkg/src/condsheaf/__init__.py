"""Executable model of conditional sets and sheaves on a finite Boolean algebra."""

from .boolean_algebra import Algebra, Elem, Partition, Sieve, disjointify, make_algebra, partitions_of
from .category_f import FArrow, FObject, Subobject, compose, hom_set, is_monic
from .conditional_set import CondSet, from_sheaf, to_sheaf, validate_condset
from .sheaf import ExtensionalSheaf, NatTrans, StalkSheaf, sheaf_from_stalks, validate_sheaf
from .subobject_lattice import SubLattice, verify_boolean_algebra

__all__ = [
    "Algebra", "Elem", "Partition", "Sieve", "disjointify", "make_algebra", "partitions_of",
    "FArrow", "FObject", "Subobject", "compose", "hom_set", "is_monic",
    "CondSet", "from_sheaf", "to_sheaf", "validate_condset",
    "ExtensionalSheaf", "NatTrans", "StalkSheaf", "sheaf_from_stalks", "validate_sheaf",
    "SubLattice", "verify_boolean_algebra",
]
