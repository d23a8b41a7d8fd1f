"""Numerical verification of ubiquity and of the mass-distribution construction."""
from .masstree import (AxisTree, ConservationReport, HolderReport, MassTree, assign_mass, build_mass_tree,
                       holder_test, proportional_masses, tree_json)
from .ubiquity import SystemKind, UbiquityReport, UbiquitySystemSpec, ubiquity_coverage

__all__ = [
    "AxisTree", "ConservationReport", "HolderReport", "MassTree", "assign_mass", "build_mass_tree",
    "holder_test", "proportional_masses", "tree_json",
    "SystemKind", "UbiquityReport", "UbiquitySystemSpec", "ubiquity_coverage",
]
