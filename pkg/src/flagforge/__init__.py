"""Exact tools for S2-type hypergraph Turan problems: constructions, partitions and flag algebra certificates."""
from .errors import DimensionMismatch, FlagforgeError, InputError, UnsupportedUniformity
from .hypergraph import (
    CanonicalForm,
    Hypergraph,
    blowup,
    canonical_form,
    codegree,
    count_s2,
    homomorphism_exists,
    induced_density,
    link,
    lp_norm,
    shadow,
)

__all__ = [
    "CanonicalForm",
    "DimensionMismatch",
    "FlagforgeError",
    "Hypergraph",
    "InputError",
    "UnsupportedUniformity",
    "blowup",
    "canonical_form",
    "codegree",
    "count_s2",
    "homomorphism_exists",
    "induced_density",
    "link",
    "lp_norm",
    "shadow",
]
__version__ = "0.1.0"
