"""Realizability of finite metrics in classical model spaces and universal trees.

Each ``embed_*`` function answers "is there an isometric copy of this
finite space in the model?" and returns a witness (coordinates or a tree)
or a certificate naming the violated criterion. Pseudometrics are first
collapsed to their metric quotient; coordinates are expanded back so the
witness has one row per original point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Union

import numpy as np

from .core_metric import DEFAULT_TOL, DistanceMatrix, ToleranceConfig, collapse, validate_metric
from .errors import InputError, NotATreeMetric, ParameterError
from . import tree as trees

CIRCLE_MAX_POINTS = 24

# eigenvalues counted as zero but larger than this fraction of the band are
# reported as marginal; below it they are treated as roundoff
_ROUNDOFF_FRACTION = 1e-3


@dataclass(frozen=True)
class Euclidean:
    dim: int

    def __post_init__(self):
        _check_dim(self.dim)


@dataclass(frozen=True)
class Sphere:
    dim: int
    radius: float = 1.0

    def __post_init__(self):
        _check_dim(self.dim)
        _check_positive("radius", self.radius)


@dataclass(frozen=True)
class Hyperbolic:
    dim: int
    scale: float = 1.0

    def __post_init__(self):
        _check_dim(self.dim)
        _check_positive("scale", self.scale)


@dataclass(frozen=True)
class Circle:
    length: float

    def __post_init__(self):
        _check_positive("length", self.length)


@dataclass(frozen=True)
class TreeValence:
    valence: int

    def __post_init__(self):
        if not isinstance(self.valence, (int, np.integer)) or self.valence < 2:
            raise ParameterError(f"tree valence must be an integer >= 2, got {self.valence!r}")


ModelSpace = Union[Euclidean, Sphere, Hyperbolic, Circle, TreeValence]


def _check_dim(dim):
    if not isinstance(dim, (int, np.integer)) or dim < 1:
        raise ParameterError(f"dim must be an integer >= 1, got {dim!r}")


def _check_positive(name, value):
    if not (isinstance(value, (int, float, np.floating)) and math.isfinite(value) and value > 0):
        raise ParameterError(f"{name} must be positive, got {value!r}")


@dataclass
class EmbedResult:
    """Outcome of a realizability test.

    A decisive result carries exactly one of ``witness`` / ``certificate``.
    A marginal result (an eigenvalue inside the tolerance band decided the
    outcome) is reported embeddable with both.
    """

    embeddable: bool
    witness: Any = None
    certificate: Optional[str] = None
    marginal: bool = False
    classes: Optional[list[int]] = field(default=None)


# -- helpers -----------------------------------------------------------------


def _prepare(m: DistanceMatrix, cfg: ToleranceConfig) -> tuple[DistanceMatrix, list[int]]:
    report = validate_metric(m, cfg)
    if not report.ok:
        raise InputError(f"invalid {m.kind}: {report.message}")
    if m.kind == "pseudometric":
        return collapse(m, cfg)
    return m, list(range(m.n))


def _spectrum(a: np.ndarray, cfg: ToleranceConfig):
    vals, vecs = np.linalg.eigh(a)
    radius = float(np.max(np.abs(vals))) if vals.size else 0.0
    band = cfg.eig_tol * radius
    return vals, vecs, band


def _marginal(vals, band):
    inside = np.abs(vals) <= band
    return bool(np.any(np.abs(vals[inside]) > _ROUNDOFF_FRACTION * band))


def _expand(rows: np.ndarray, classes: list[int]) -> list[list[float]]:
    return [rows[c].tolist() for c in classes]


def _result(ok_rows, classes, marginal, note):
    witness = _expand(ok_rows, classes)
    if marginal:
        return EmbedResult(True, witness, f"marginal: {note}", True, classes)
    return EmbedResult(True, witness, None, False, classes)


# -- classical spaces ---------------------------------------------------------


def embed_euclidean(m: DistanceMatrix, dim: int, cfg: ToleranceConfig = DEFAULT_TOL) -> EmbedResult:
    """Gram-matrix test: basepoint Gram matrix PSD with rank <= dim."""
    _check_dim(dim)
    q, classes = _prepare(m, cfg)
    n = q.n
    if n == 1:
        return EmbedResult(True, [[0.0] * dim for _ in classes], classes=classes)
    d2 = q.d**2
    gram = (d2[0, 1:][:, None] + d2[0, 1:][None, :] - d2[1:, 1:]) / 2
    vals, vecs, band = _spectrum(gram, cfg)
    if vals[0] < -band:
        return EmbedResult(False, certificate=f"Gram matrix has negative eigenvalue {vals[0]:.6g}", classes=classes)
    rank = int(np.sum(vals > band))
    if rank > dim:
        return EmbedResult(False, certificate=f"Gram matrix rank {rank} exceeds dim {dim}", classes=classes)
    top = np.argsort(vals)[::-1][:dim]
    rows = np.zeros((n, dim))
    rows[1:, : len(top)] = vecs[:, top] * np.sqrt(np.clip(vals[top], 0, None))
    return _result(rows, classes, _marginal(vals, band), "Gram eigenvalue inside tolerance band")


def embed_sphere(m: DistanceMatrix, dim: int, radius: float = 1.0, cfg: ToleranceConfig = DEFAULT_TOL) -> EmbedResult:
    """Cosine-matrix test on the round sphere of the given radius."""
    _check_dim(dim)
    _check_positive("radius", radius)
    q, classes = _prepare(m, cfg)
    limit = math.pi * radius
    if np.max(q.d) > limit * (1 + cfg.rel_tol):
        return EmbedResult(False, certificate=f"diameter exceeded: distance {np.max(q.d):.6g} > pi*radius", classes=classes)
    c = np.cos(np.minimum(q.d, limit) / radius)
    vals, vecs, band = _spectrum(c, cfg)
    if vals[0] < -band:
        return EmbedResult(False, certificate=f"cosine matrix has negative eigenvalue {vals[0]:.6g}", classes=classes)
    rank = int(np.sum(vals > band))
    if rank > dim + 1:
        return EmbedResult(False, certificate=f"cosine matrix rank {rank} exceeds dim+1 = {dim + 1}", classes=classes)
    top = np.argsort(vals)[::-1][: dim + 1]
    rows = np.zeros((q.n, dim + 1))
    rows[:, : len(top)] = vecs[:, top] * np.sqrt(np.clip(vals[top], 0, None))
    rows /= np.linalg.norm(rows, axis=1, keepdims=True)
    return _result(rows * radius, classes, _marginal(vals, band), "cosine eigenvalue inside tolerance band")


def embed_hyperbolic(m: DistanceMatrix, dim: int, scale: float = 1.0, cfg: ToleranceConfig = DEFAULT_TOL) -> EmbedResult:
    """Minkowski signature test on the hyperbolic space of curvature ``-1/scale**2``.

    ``cosh(d/scale)`` must have exactly one positive eigenvalue and at most
    ``dim`` negative ones. The witness lies on the hyperboloid
    ``x0**2 - |y|**2 = scale**2`` with the time coordinate first.
    """
    _check_dim(dim)
    _check_positive("scale", scale)
    q, classes = _prepare(m, cfg)
    with np.errstate(over="raise"):
        try:
            h = np.cosh(q.d / scale)
        except FloatingPointError:
            raise InputError("distances too large relative to scale for cosh") from None
    vals, vecs, band = _spectrum(h, cfg)
    pos = int(np.sum(vals > band))
    neg = int(np.sum(vals < -band))
    if pos != 1:
        return EmbedResult(False, certificate=f"cosh matrix has {pos} positive eigenvalues, need exactly 1", classes=classes)
    if neg > dim:
        return EmbedResult(False, certificate=f"cosh matrix has {neg} negative eigenvalues, exceeds dim {dim}", classes=classes)
    order = np.argsort(vals)
    space = np.zeros((q.n, dim))
    for k, idx in enumerate(order[:neg]):
        space[:, k] = vecs[:, idx] * math.sqrt(-vals[idx])
    # re-project onto the sheet; removes the dropped near-zero modes
    time = np.sqrt(1.0 + np.sum(space**2, axis=1))
    rows = np.hstack([time[:, None], space]) * scale
    return _result(rows, classes, _marginal(vals, band), "cosh eigenvalue inside tolerance band")


def embed_circle(m: DistanceMatrix, length: float, cfg: ToleranceConfig = DEFAULT_TOL) -> EmbedResult:
    """Exact test on the circle of circumference ``length``.

    Fix point 0 at position 0; every other point then sits at ``+d`` or
    ``-d``. Sign vectors are searched in lexicographic order (``+``
    before ``-``) with pruning, so the witness is the least consistent
    one. Positions are reported in ``[0, length)``.
    """
    _check_positive("length", length)
    q, classes = _prepare(m, cfg)
    n = q.n
    if n > CIRCLE_MAX_POINTS:
        raise ParameterError(f"circle test is capped at {CIRCLE_MAX_POINTS} points, got {n}")
    d = q.d
    tol = cfg.rel_tol * max(q.scale, length)
    if np.max(d) > length / 2 + tol:
        return EmbedResult(False, certificate="exceeds half circumference", classes=classes)

    def arc(a, b):
        r = abs(a - b) % length
        return min(r, length - r)

    pos = [0.0]

    def search(i):
        if i == n:
            return True
        for sign in (1.0, -1.0):
            p = (sign * d[0, i]) % length
            if all(abs(arc(p, pos[k]) - d[k, i]) <= tol for k in range(1, i)):
                pos.append(p)
                if search(i + 1):
                    return True
                pos.pop()
        return False

    if not search(1):
        return EmbedResult(False, certificate="no sign assignment realizes the arc distances", classes=classes)
    rows = np.array(pos)[:, None]
    return EmbedResult(True, [float(rows[c, 0]) for c in classes], classes=classes)


def embed_tree(m: DistanceMatrix, valence: int, cfg: ToleranceConfig = DEFAULT_TOL) -> EmbedResult:
    """Four-point condition plus a degree bound on the minimal realization.

    Labels of the witness tree are the smallest original index of each
    collapsed class.
    """
    TreeValence(valence)
    q, classes = _prepare(m, cfg)
    reps = [classes.index(c) for c in range(q.n)]
    try:
        t = trees.build_realization(q, cfg, labels=[str(r) for r in reps], valence_budget=None)
    except NotATreeMetric as exc:
        return EmbedResult(False, certificate=f"four-point condition fails at quadruple {exc.quadruple}", classes=classes)
    deg = trees.max_degree(t)
    if deg > valence:
        return EmbedResult(False, certificate=f"degree {deg} branch point required", classes=classes)
    return EmbedResult(True, trees.FiniteTree(t.vertices, t.edges, valence), classes=classes)


def embed(m: DistanceMatrix, space: ModelSpace, cfg: ToleranceConfig = DEFAULT_TOL) -> EmbedResult:
    if isinstance(space, Euclidean):
        return embed_euclidean(m, space.dim, cfg)
    if isinstance(space, Sphere):
        return embed_sphere(m, space.dim, space.radius, cfg)
    if isinstance(space, Hyperbolic):
        return embed_hyperbolic(m, space.dim, space.scale, cfg)
    if isinstance(space, Circle):
        return embed_circle(m, space.length, cfg)
    if isinstance(space, TreeValence):
        return embed_tree(m, space.valence, cfg)
    raise InputError(f"unknown model space {space!r}")


def witness_distances(space: ModelSpace, witness) -> np.ndarray:
    """Pairwise model-space distances recomputed from a witness."""
    if isinstance(space, Euclidean):
        x = np.asarray(witness, float)
        return np.linalg.norm(x[:, None, :] - x[None, :, :], axis=2)
    if isinstance(space, Sphere):
        # chord form stays accurate for nearby points, unlike arccos of the inner product
        x = np.asarray(witness, float) / space.radius
        chord = np.linalg.norm(x[:, None, :] - x[None, :, :], axis=2)
        return space.radius * 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))
    if isinstance(space, Hyperbolic):
        # Minkowski norm of the difference gives 4 sinh^2(d/2) without cancellation near d = 0
        x = np.asarray(witness, float) / space.scale
        diff = x[:, None, :] - x[None, :, :]
        sq = np.sum(diff[..., 1:] ** 2, axis=2) - diff[..., 0] ** 2
        return space.scale * 2.0 * np.arcsinh(np.sqrt(np.maximum(sq, 0.0)) / 2.0)
    if isinstance(space, Circle):
        p = np.asarray(witness, float)
        r = np.abs(p[:, None] - p[None, :]) % space.length
        return np.minimum(r, space.length - r)
    if isinstance(space, TreeValence):
        _, lm = trees.labeled_matrix(witness)
        return lm.d
    raise InputError(f"unknown model space {space!r}")
