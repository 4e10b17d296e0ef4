"""Finite metric geometry around all-set-homogeneity.

Distance matrices and their constructions, embedding tests for the
classical model spaces and bounded-valence trees, a finite metric-tree
engine with partial-isometry extension, homogeneity and fingerprint
analysis, and Ramsey-style subset extraction.
"""
from .core_metric import (
    DEFAULT_TOL,
    DistanceMatrix,
    ToleranceConfig,
    ValidationReport,
    collapse,
    is_isometric,
    make_ultrametric,
    restrict,
    snowflake,
    validate_metric,
)
from .embed import (
    Circle,
    EmbedResult,
    Euclidean,
    Hyperbolic,
    Sphere,
    TreeValence,
    embed,
    embed_circle,
    embed_euclidean,
    embed_hyperbolic,
    embed_sphere,
    embed_tree,
)
from .errors import AllsetError, InputError, NotATreeMetric, ParameterError, ValenceExhausted
from .extend import PartialIsometry, TraceStep, convex_closure, extend_all, extend_point, replay, verify_isometry
from .fingerprint import FingerprintSet, FingerprintVector, canonicalize, comb_vector, fingerprint_finite, member, nonclosed_demo
from .homog import HomogeneityReport, PartialMap, extends_to_global, is_all_set_homogeneous, is_k_homogeneous, isometry_group
from .ramsey import EdgeColoring, bin_distances, equilateral_subset, maximal_equilateral_extend, monochromatic_clique
from .tree import FiniteTree, TreeLocation, build_realization, dist_to_geodesic_point, geodesic_point, tree_distance

__version__ = "0.1.0"
