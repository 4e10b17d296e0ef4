"""Extending distance-preserving maps between subsets of valence-m trees.

A :class:`PartialIsometry` sends locations of a finite ``source`` tree to
vertices of a ``target`` tree that is grown lazily: the target never holds
anything beyond the convex hull of the images. New points are added one
at a time. A point inside the current hull is mapped along a geodesic
between two images. A point outside it hangs off its gate ``c`` at
distance ``t``; its image is the tip of a fresh edge of length ``t``
sprouted at ``c'`` in an unused direction.

Every image is stored as a target vertex labeled with its domain index.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .core_metric import DEFAULT_TOL, ToleranceConfig
from .errors import InputError, ParameterError, ValenceExhausted
from .tree import (
    FiniteTree,
    TreeLocation,
    add_leaf,
    gate,
    geodesic_point,
    hull_subtree,
    location_degree,
    materialize,
    materialize_all,
    max_degree,
    normalize,
    single_vertex_tree,
    tree_distance,
)


@dataclass(frozen=True)
class PartialIsometry:
    source: FiniteTree
    target: FiniteTree
    domain: tuple[TreeLocation, ...] = ()
    images: tuple[TreeLocation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        object.__setattr__(self, "images", tuple(self.images))
        if len(self.domain) != len(self.images):
            raise InputError("domain and images must have equal length")

    @property
    def valence(self) -> Optional[int]:
        """The ambient valence m: the target's budget, else the source's."""
        if self.target.valence_budget is not None:
            return self.target.valence_budget
        return self.source.valence_budget

    def image_of(self, loc: TreeLocation, cfg: ToleranceConfig = DEFAULT_TOL) -> TreeLocation:
        for x, y in zip(self.domain, self.images):
            if tree_distance(self.source, x, loc) <= cfg.rel_tol * self.source.scale:
                return y
        raise InputError(f"{loc} is not in the domain")


@dataclass(frozen=True)
class TraceStep:
    """One extension step.

    ``kind`` is ``"root"`` (first point, image is a fresh vertex), ``"hull"``
    (point on the geodesic between domain points ``anchors``, image at
    ``offset`` from the first anchor's image) or ``"sprout"`` (point at
    distance ``t`` from ``gate``, which is domain point ``anchors[0]``;
    new target edge in ``direction``).
    """

    kind: str
    point: TreeLocation
    gate: Optional[TreeLocation] = None
    t: float = 0.0
    direction: Optional[int] = None
    offset: Optional[float] = None
    anchors: tuple[int, ...] = field(default=())


def identity_map(tree: FiniteTree, locations: Sequence[TreeLocation], cfg: ToleranceConfig = DEFAULT_TOL) -> PartialIsometry:
    """The identity on ``locations``, with target the hull of a copy of ``tree``."""
    return copy_map(tree, locations, locations, cfg)


def copy_map(
    tree: FiniteTree,
    domain: Sequence[TreeLocation],
    images: Sequence[TreeLocation],
    cfg: ToleranceConfig = DEFAULT_TOL,
) -> PartialIsometry:
    """Map ``domain[i] -> images[i]`` where both lists are locations of ``tree``.

    The target is the hull of ``images`` cut out of a copy of ``tree``.
    """
    target, ids = hull_subtree(tree, list(images), [str(i) for i in range(len(images))], cfg)
    return PartialIsometry(tree, target, tuple(normalize(tree, x, cfg) for x in domain), tuple(TreeLocation.at(v) for v in ids))


def _normalized(p: PartialIsometry, cfg: ToleranceConfig) -> PartialIsometry:
    """Snap domain locations and turn every image into a target vertex labeled by its index."""
    domain = tuple(normalize(p.source, x, cfg) for x in p.domain)
    target = FiniteTree(
        tuple(replace(v, label=None) for v in p.target.vertices), p.target.edges, p.target.valence_budget
    )
    target, ids = materialize_all(target, p.images, [str(i) for i in range(len(p.images))], cfg)
    if len(set(ids)) != len(ids):
        raise InputError("two domain points share an image")
    return PartialIsometry(p.source, target, domain, tuple(TreeLocation.at(v) for v in ids))


def check_invariants(p: PartialIsometry, cfg: ToleranceConfig = DEFAULT_TOL) -> None:
    """Raise :class:`InputError` unless ``p`` is a valid partial isometry.

    Checks distance preservation, the hull discipline (every target leaf
    is an image) and the valence budget on both trees.
    """
    ok, dev, pair = verify_isometry(p, cfg)
    if not ok:
        raise InputError(f"map is not distance-preserving: deviation {dev:.3g} at pair {pair}")
    if p.domain:
        image_vertices = {y.vertex for y in p.images if y.is_vertex}
        for v in p.target.vertices:
            if p.target.degree(v.id) <= 1 and v.id not in image_vertices:
                raise InputError(f"target vertex {v.id} lies outside the hull of the images")
    elif p.target.vertices:
        raise InputError("the empty map must have an empty target")
    m = p.valence
    if m is not None:
        for name, t in (("source", p.source), ("target", p.target)):
            if max_degree(t) > m:
                raise InputError(f"{name} has a vertex of degree {max_degree(t)} > valence {m}")


def verify_isometry(p: PartialIsometry, cfg: ToleranceConfig = DEFAULT_TOL) -> tuple[bool, float, Optional[tuple[int, int]]]:
    """Worst pairwise distortion of the map; ok iff it is at most ``10 * rel_tol * scale``."""
    k = len(p.domain)
    worst, arg = 0.0, None
    top = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            ds = tree_distance(p.source, p.domain[i], p.domain[j])
            dt = tree_distance(p.target, p.images[i], p.images[j])
            top = max(top, ds)
            dev = abs(ds - dt)
            if dev > worst or arg is None:
                worst, arg = dev, (i, j)
    return bool(worst <= 10 * cfg.rel_tol * max(1.0, top)), float(worst), arg


def _find(p: PartialIsometry, loc: TreeLocation, cfg) -> Optional[int]:
    tol = cfg.rel_tol * p.source.scale
    for k, x in enumerate(p.domain):
        if tree_distance(p.source, x, loc) <= tol:
            return k
    return None


def _add_hull_point(p: PartialIsometry, s: TreeLocation, anchor: int, cfg) -> tuple[PartialIsometry, TraceStep]:
    """Add ``s``, known to lie on ``[domain[0], domain[anchor]]``, mapping it along the image geodesic."""
    offset = float(tree_distance(p.source, p.domain[0], s))
    step = TraceStep("hull", s, offset=offset, anchors=(0, anchor))
    return _apply(p, step, cfg), step


def _apply(p: PartialIsometry, step: TraceStep, cfg: ToleranceConfig) -> PartialIsometry:
    """Execute a trace step; used both when extending and when replaying."""
    label = str(len(p.domain))
    if step.kind == "root":
        if p.domain:
            raise InputError("root step on a nonempty map")
        target = single_vertex_tree(label, p.valence)
        return PartialIsometry(p.source, target, (step.point,), (TreeLocation.at(0),))
    if step.kind == "hull":
        a, b = step.anchors
        s_img = geodesic_point(p.target, p.images[a], p.images[b], step.offset, cfg)
        if s_img.is_vertex and p.target.vertices[s_img.vertex].label is not None:
            raise InputError(f"hull point {step.point} collides with an existing image")
        target, vid = materialize(p.target, s_img, label, cfg)
        return PartialIsometry(p.source, target, p.domain + (step.point,), p.images + (TreeLocation.at(vid),))
    if step.kind == "sprout":
        at = p.images[step.anchors[0]].vertex
        used = p.target.degree(at)
        m = p.valence
        if m is not None and used + 1 > m:
            raise ValenceExhausted(f"target vertex {at} already has degree {used} = valence {m}")
        if step.direction is not None and step.direction != used:
            raise InputError(f"trace expects direction {step.direction}, next free direction is {used}")
        target, vid = add_leaf(p.target, at, step.t, label)
        return PartialIsometry(p.source, target, p.domain + (step.point,), p.images + (TreeLocation.at(vid),))
    raise InputError(f"unknown step kind {step.kind!r}")


def _closure(p: PartialIsometry, cfg) -> tuple[PartialIsometry, list[TraceStep]]:
    steps = []
    original = len(p.domain)
    tol = cfg.rel_tol * p.source.scale
    for k in range(2, original):
        c, g, anchor = gate(p.source, p.domain[:k], p.domain[k], cfg)
        if g <= tol or _find(p, c, cfg) is not None:
            continue
        p, step = _add_hull_point(p, c, anchor, cfg)
        steps.append(step)
    return p, steps


def convex_closure(p: PartialIsometry, cfg: ToleranceConfig = DEFAULT_TOL) -> PartialIsometry:
    """Add the branch points of the domain's hull, each mapped by its geodesic offset.

    The hull of finitely many points is the union of geodesics between
    them; its only points that can carry new branching are the gates of
    each domain point onto the hull of the earlier ones. Interior points of
    hull geodesics are not listed; they map by offset when needed.
    """
    p = _normalized(p, cfg)
    return _closure(p, cfg)[0]


def extend_point(
    p: PartialIsometry, b: TreeLocation, cfg: ToleranceConfig = DEFAULT_TOL
) -> tuple[PartialIsometry, list[TraceStep]]:
    """Add one point outside the domain's hull.

    Returns the new map and the steps taken (the gate is added first if it
    is not yet in the domain, then the point is sprouted).
    """
    b = normalize(p.source, b, cfg)
    m = p.valence
    if m is not None and location_degree(p.source, b) > m:
        raise InputError("source exceeds the valence budget")
    if not p.domain:
        step = TraceStep("root", b)
        return _apply(p, step, cfg), [step]
    c, t, anchor = gate(p.source, p.domain, b, cfg)
    if t <= cfg.rel_tol * p.source.scale:
        raise ParameterError(f"{b} already lies in the hull of the domain")
    steps = []
    ci = _find(p, c, cfg)
    if ci is None:
        p, step = _add_hull_point(p, c, anchor, cfg)
        steps.append(step)
        ci = len(p.domain) - 1
    step = TraceStep("sprout", b, gate=c, t=float(t), direction=p.target.degree(p.images[ci].vertex), anchors=(ci,))
    steps.append(step)
    return _apply(p, step, cfg), steps


def extend_all(
    p: PartialIsometry, points: Sequence[TreeLocation], cfg: ToleranceConfig = DEFAULT_TOL
) -> tuple[PartialIsometry, list[TraceStep]]:
    """Extend ``p`` over ``points`` in the given order.

    Points already in the domain are skipped, points inside the hull are
    mapped along geodesics, the rest are sprouted by :func:`extend_point`.
    """
    p = _normalized(p, cfg)
    check_invariants(p, cfg)
    p, trace = _closure(p, cfg)
    tol = cfg.rel_tol * p.source.scale
    for b in points:
        b = normalize(p.source, b, cfg)
        if p.domain:
            if _find(p, b, cfg) is not None:
                continue
            c, g, anchor = gate(p.source, p.domain, b, cfg)
            if g <= tol:
                p, step = _add_hull_point(p, b, anchor, cfg)
                trace.append(step)
                continue
        p, steps = extend_point(p, b, cfg)
        trace.extend(steps)
    return p, trace


def replay(p: PartialIsometry, trace: Sequence[TraceStep], cfg: ToleranceConfig = DEFAULT_TOL) -> PartialIsometry:
    """Re-run a trace from the same starting map; reproduces the extended map exactly."""
    p = _normalized(p, cfg)
    for step in trace:
        p = _apply(p, step, cfg)
    return p


def labeled_images(p: PartialIsometry, locations: Sequence[TreeLocation], cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Target distance matrix between the images of ``locations``."""
    imgs = [p.image_of(x, cfg) for x in locations]
    return np.array([[tree_distance(p.target, a, b) for b in imgs] for a in imgs])
