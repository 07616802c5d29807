"""Sparse and maximal dyadic operators with exact weighted-norm bookkeeping."""

from .dyadic import DyadicCube, DyadicGrid, children, covering_cube, cube, parent, shifted_grids
from .norms import NormEstimate, bound_check_cz, bound_check_frac, duality_check, estimate_norm
from .operators import OperatorSpec, bilinear_form, maximal_bound_check, weak_type_check
from .sparse import SparseFamily, exceptional_sets, is_sparse, sparse_from_function
from .stepfun import MeasureView, MeshSpec, StepFunction, average, integral, lp_norm, pointwise_map
from .weights import PowerWeight, StepWeight, ap_constant, apq_constant, dual_weight

__all__ = [
    "DyadicCube", "DyadicGrid", "children", "covering_cube", "cube", "parent", "shifted_grids",
    "NormEstimate", "bound_check_cz", "bound_check_frac", "duality_check", "estimate_norm",
    "OperatorSpec", "bilinear_form", "maximal_bound_check", "weak_type_check",
    "SparseFamily", "exceptional_sets", "is_sparse", "sparse_from_function",
    "MeasureView", "MeshSpec", "StepFunction", "average", "integral", "lp_norm", "pointwise_map",
    "PowerWeight", "StepWeight", "ap_constant", "apq_constant", "dual_weight",
]
__version__ = "0.1.0"
