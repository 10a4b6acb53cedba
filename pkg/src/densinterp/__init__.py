"""Piecewise principal-lattice interpolation of density estimators."""
from . import _backend
from .holder import HolderSpec, make_density, taylor_error_bound, taylor_eval, uniform_bound
from .interp import (GridGeometry, OracleError, PiecewiseInterpolant, build, cell_index,
                     choose_bandwidth, query, stability_constant)
from .kde import KdeModel, kde_eval, legendre_kernel
from .lattice import (PrincipalLattice, ResourceLimitError, barycentric, basis_eval,
                      interpolate_eval, min_singular_value, principal_lattice,
                      sv_lower_bound, vandermonde)
from .plif import FormatError, deserialize, serialize

BACKEND = _backend.NAME

__all__ = [
    "BACKEND", "FormatError", "GridGeometry", "HolderSpec", "KdeModel", "OracleError",
    "PiecewiseInterpolant", "PrincipalLattice", "ResourceLimitError", "barycentric",
    "basis_eval", "build", "cell_index", "choose_bandwidth", "deserialize",
    "interpolate_eval", "kde_eval", "legendre_kernel", "make_density",
    "min_singular_value", "principal_lattice", "query", "serialize",
    "stability_constant", "sv_lower_bound", "taylor_error_bound", "taylor_eval",
    "uniform_bound", "vandermonde",
]

__version__ = "0.1.0"
