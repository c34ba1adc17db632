"""Rational inner functions on the bidisk: canonical subspaces, Agler kernels and realizations."""

from .errors import AglerError
from .hilbert import agler_residual, canonical_kernels
from .inner import RationalInner, from_json, validate
from .poly import MatPoly, Poly, bipoly, lowest_terms, reflect, tripoly
from .realization import Realization, realize, synthesize
from .restriction import onevar_model_dim, slice_isometry
from .subspaces import basis, dims_check
from .trivar import decompose

__version__ = "0.1.0"

__all__ = ["AglerError", "MatPoly", "Poly", "RationalInner", "Realization", "agler_residual", "basis",
           "bipoly", "canonical_kernels", "decompose", "dims_check", "from_json", "lowest_terms",
           "onevar_model_dim", "realize", "reflect", "slice_isometry", "synthesize", "tripoly", "validate"]
