"""Quaternionic slice regular functions: stems, Jacobians, fibers, wings and singular sets."""
from ._backend import USE_NUMBA
from .domain import PLANE_MINUS_REALS, PUNCTURED_PLANE, WHOLE_PLANE, DomainError, SymmetricDomain
from .fibers import (
    FiberDescription,
    Wing,
    WingSetReport,
    find_wings,
    harvest_wing_values,
    normal_vanishes,
    schwarz_construct,
    solve_fiber,
    total_multiplicity,
    wing_phi,
    wing_selection,
)
from .jacobian import jacobian_det, jacobian_matrix, rank
from .quaternion import I, J, K, ONE, ImaginaryUnit, Quaternion
from .registry import get as get_function
from .registry import load_function
from .singular import (
    DimensionTriple,
    SphereSection,
    degenerate_set,
    dimension_triple,
    extra_singular_dimension,
    in_singular_set,
    sphere_section,
)
from .slicefn import FunctionClass, SliceFunction, identity, polynomial
from .stem import RatExp, Stem, StemError, eta, from_slice, schwarz_stem

__version__ = "0.1.0"

__all__ = [
    "USE_NUMBA", "PLANE_MINUS_REALS", "PUNCTURED_PLANE", "WHOLE_PLANE", "DomainError",
    "SymmetricDomain", "FiberDescription", "Wing", "WingSetReport", "find_wings",
    "harvest_wing_values", "normal_vanishes", "schwarz_construct", "solve_fiber",
    "total_multiplicity", "wing_phi", "wing_selection", "jacobian_det", "jacobian_matrix", "rank",
    "I", "J", "K", "ONE", "ImaginaryUnit", "Quaternion", "get_function", "load_function",
    "DimensionTriple", "SphereSection", "degenerate_set", "dimension_triple",
    "extra_singular_dimension", "in_singular_set", "sphere_section", "FunctionClass",
    "SliceFunction", "identity", "polynomial", "RatExp", "Stem", "StemError", "eta",
    "from_slice", "schwarz_stem",
]
