"""Strictly hyperideal circle patterns on the sphere.

Build patterns from caps or points via convex hulls, check the angle
conditions on a weighted cellular graph, and realize admissible angle data
numerically, unique up to Möbius maps.
"""

from .admissibility import Verdict, Witness, check_admissible
from .cellular import CellularMap, WeightedIncidence, dual_map, is_polytopal, validate_cellular
from .errors import (
    HypattError,
    NotAdmissible,
    NumericalFailure,
    ValidationFailure,
)
from .lorentz import (
    DeSitterVector,
    MobiusMap,
    OrientedCircle,
    apply_mobius,
    circle_of_plane,
    dual_point,
    intersection_angle,
    inversive_product,
    normalize_small_caps,
    random_disjoint_caps,
    stereographic,
)
from .patterns import (
    CirclePattern,
    build_ideal_pattern,
    build_pattern_from_caps,
    extract_incidence,
    verify_hyperideal,
    verify_ideal,
)
from .polyhedron import HyperidealPolyhedron, polyhedron_dihedral_angles, truncate
from .realizer import SolveOptions, SolveReport, gram_matrix, mobius_equivalent, solve

__version__ = "0.1.0"

__all__ = [
    "CellularMap",
    "CirclePattern",
    "DeSitterVector",
    "HyperidealPolyhedron",
    "HypattError",
    "MobiusMap",
    "NotAdmissible",
    "NumericalFailure",
    "OrientedCircle",
    "SolveOptions",
    "SolveReport",
    "ValidationFailure",
    "Verdict",
    "WeightedIncidence",
    "Witness",
    "apply_mobius",
    "build_ideal_pattern",
    "build_pattern_from_caps",
    "check_admissible",
    "circle_of_plane",
    "dual_map",
    "dual_point",
    "extract_incidence",
    "gram_matrix",
    "intersection_angle",
    "inversive_product",
    "is_polytopal",
    "mobius_equivalent",
    "normalize_small_caps",
    "polyhedron_dihedral_angles",
    "random_disjoint_caps",
    "solve",
    "stereographic",
    "truncate",
    "validate_cellular",
    "verify_hyperideal",
    "verify_ideal",
]
