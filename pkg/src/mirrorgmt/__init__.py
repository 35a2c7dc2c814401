"""Exact generalized mirror transformation for multi-point virtual structure constants
of degree-k hypersurfaces in CP^{N-1}."""
from .invariants import (
    GW,
    W,
    Context,
    GWKey,
    InvariantTable,
    MissingEntry,
    TableError,
    WKey,
    load_table,
    lookup,
    normalize_key,
    store_table,
)
from .gmt import enumerate_terms, evaluate_rhs, solve_gw_from_w, solve_w_from_gw, verify_identity
from .series import Truncation, TruncatedSeries, compose, invert_mirror_map, mirror_map, verify_conjecture

__version__ = "0.1.0"
