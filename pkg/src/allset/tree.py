"""Finite R-trees: edge-weighted trees, points on them, and tree metrics.

A :class:`FiniteTree` is immutable. Operations that grow a tree
(:func:`subdivide`, :func:`add_leaf`, ...) return a new tree; existing
vertex and edge ids are never renumbered by them, so locations held by
the caller stay valid, except that subdividing an edge shortens it.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from .core_metric import DEFAULT_TOL, DistanceMatrix, ToleranceConfig, validate_metric
from .errors import InputError, NotATreeMetric, ParameterError


@dataclass(frozen=True)
class Vertex:
    id: int
    label: Optional[str] = None


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    length: float


@dataclass(frozen=True)
class TreeLocation:
    """A point of a tree: a vertex, or an edge plus an offset measured from ``edge.u``."""

    vertex: Optional[int] = None
    edge: Optional[int] = None
    offset: float = 0.0

    def __post_init__(self):
        if (self.vertex is None) == (self.edge is None):
            raise InputError("a location is either a vertex or an (edge, offset) pair")

    @classmethod
    def at(cls, vertex: int) -> "TreeLocation":
        return cls(vertex=int(vertex))

    @classmethod
    def on(cls, edge: int, offset: float) -> "TreeLocation":
        return cls(edge=int(edge), offset=float(offset))

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None


@dataclass(frozen=True)
class FiniteTree:
    """A finite edge-weighted tree with optionally labeled vertices.

    Vertex ids are ``0..len(vertices)-1`` in order; the id of an edge is
    its index in ``edges``. The empty tree (no vertices) is allowed: it
    is the target of the empty partial isometry.
    """

    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...] = ()
    valence_budget: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        nv = len(self.vertices)
        for k, vx in enumerate(self.vertices):
            if vx.id != k:
                raise InputError(f"vertex ids must be 0..{nv - 1} in order; got id {vx.id} at position {k}")
        for e in self.edges:
            if not (0 <= e.u < nv and 0 <= e.v < nv) or e.u == e.v:
                raise InputError(f"edge {e} does not join two distinct vertices")
            if not (np.isfinite(e.length) and e.length > 0):
                raise InputError(f"edge {e} must have positive finite length")
        if nv and len(self.edges) != nv - 1:
            raise InputError("a tree on V vertices has exactly V-1 edges")
        if not nv and self.edges:
            raise InputError("the empty tree has no edges")
        if nv and len(self._bfs_order(0)) != nv:
            raise InputError("edges do not connect all vertices")
        if self.valence_budget is not None and self.valence_budget < 2:
            raise InputError("valence budget must be at least 2")

    @cached_property
    def adjacency(self) -> list[list[tuple[int, int]]]:
        """``adjacency[v]`` lists ``(neighbour, edge id)`` pairs in edge order."""
        adj: list[list[tuple[int, int]]] = [[] for _ in self.vertices]
        for eid, e in enumerate(self.edges):
            adj[e.u].append((e.v, eid))
            adj[e.v].append((e.u, eid))
        return adj

    def _bfs_order(self, root):
        adj = [[] for _ in self.vertices]
        for e in self.edges:
            adj[e.u].append(e.v)
            adj[e.v].append(e.u)
        seen = {root}
        queue = deque([root])
        order = []
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return order

    @cached_property
    def _routing(self) -> tuple[np.ndarray, np.ndarray]:
        """All-pairs vertex distances and next-hop table."""
        nv = len(self.vertices)
        dist = np.zeros((nv, nv))
        nxt = np.full((nv, nv), -1, dtype=np.int64)
        for s in range(nv):
            nxt[s, s] = s
            queue = deque([s])
            seen = {s}
            while queue:
                v = queue.popleft()
                for w, eid in self.adjacency[v]:
                    if w in seen:
                        continue
                    seen.add(w)
                    dist[s, w] = dist[s, v] + self.edges[eid].length
                    nxt[s, w] = w if v == s else nxt[s, v]
                    queue.append(w)
        dist.setflags(write=False)
        nxt.setflags(write=False)
        return dist, nxt

    @property
    def vertex_distances(self) -> np.ndarray:
        return self._routing[0]

    @cached_property
    def scale(self) -> float:
        """Total edge length (at least 1.0); the reference magnitude for snapping."""
        return max(1.0, float(sum(e.length for e in self.edges)))

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def edge_between(self, a: int, b: int) -> int:
        for w, eid in self.adjacency[a]:
            if w == b:
                return eid
        raise InputError(f"vertices {a} and {b} are not adjacent")

    def vertex_path(self, a: int, b: int) -> list[int]:
        nxt = self._routing[1]
        path = [a]
        while path[-1] != b:
            path.append(int(nxt[path[-1], b]))
        return path

    def labeled(self) -> list[tuple[str, int]]:
        """``(label, vertex id)`` for labeled vertices, in vertex order."""
        return [(vx.label, vx.id) for vx in self.vertices if vx.label is not None]

    def find_label(self, label: str) -> int:
        for vx in self.vertices:
            if vx.label == label:
                return vx.id
        raise InputError(f"no vertex labeled {label!r}")


def single_vertex_tree(label: Optional[str] = None, valence_budget: Optional[int] = None) -> FiniteTree:
    return FiniteTree((Vertex(0, label),), (), valence_budget)


def check_canonical(tree: FiniteTree) -> None:
    """Raise unless every unlabeled vertex has degree >= 3 and the budget is respected."""
    for vx in tree.vertices:
        if vx.label is None and tree.degree(vx.id) < 3:
            raise InputError(f"Steiner vertex {vx.id} has degree {tree.degree(vx.id)} < 3")
    if tree.valence_budget is not None and max_degree(tree) > tree.valence_budget:
        raise InputError(f"max degree {max_degree(tree)} exceeds valence budget {tree.valence_budget}")


def max_degree(tree: FiniteTree) -> int:
    """Largest vertex degree; 0 for a single vertex."""
    return max((tree.degree(v.id) for v in tree.vertices), default=0)


def location_degree(tree: FiniteTree, loc: TreeLocation) -> int:
    """Valence of a point: vertex degree, or 2 inside an edge."""
    return tree.degree(loc.vertex) if loc.is_vertex else 2


# -- locations ---------------------------------------------------------------


def normalize(tree: FiniteTree, loc: TreeLocation, cfg: ToleranceConfig = DEFAULT_TOL) -> TreeLocation:
    """Validate ``loc`` and snap edge offsets within tolerance of an endpoint to that vertex."""
    if loc.is_vertex:
        if not 0 <= loc.vertex < len(tree.vertices):
            raise InputError(f"unknown vertex id {loc.vertex}")
        return loc
    if not 0 <= loc.edge < len(tree.edges):
        raise InputError(f"unknown edge id {loc.edge}")
    e = tree.edges[loc.edge]
    tol = cfg.rel_tol * tree.scale
    if loc.offset < -tol or loc.offset > e.length + tol:
        raise InputError(f"offset {loc.offset} outside edge {loc.edge} of length {e.length}")
    if loc.offset <= tol:
        return TreeLocation.at(e.u)
    if loc.offset >= e.length - tol:
        return TreeLocation.at(e.v)
    return loc


def _anchors(tree: FiniteTree, loc: TreeLocation) -> list[tuple[int, float]]:
    if loc.is_vertex:
        return [(loc.vertex, 0.0)]
    e = tree.edges[loc.edge]
    return [(e.u, loc.offset), (e.v, e.length - loc.offset)]


def tree_distance(tree: FiniteTree, a: TreeLocation, b: TreeLocation) -> float:
    """Length of the unique path between two locations."""
    a = normalize(tree, a)
    b = normalize(tree, b)
    if not a.is_vertex and not b.is_vertex and a.edge == b.edge:
        return abs(a.offset - b.offset)
    vd = tree.vertex_distances
    return min(da + vd[p, q] + db for p, da in _anchors(tree, a) for q, db in _anchors(tree, b))


def _point_on_edge(tree, eid, start_vertex, t, cfg):
    e = tree.edges[eid]
    offset = t if start_vertex == e.u else e.length - t
    return normalize(tree, TreeLocation.on(eid, offset), cfg)


def geodesic_point(
    tree: FiniteTree, y: TreeLocation, z: TreeLocation, t0: float, cfg: ToleranceConfig = DEFAULT_TOL
) -> TreeLocation:
    """The point ``s`` of the geodesic from ``y`` to ``z`` with ``|y - s| = t0``."""
    y = normalize(tree, y, cfg)
    z = normalize(tree, z, cfg)
    total = tree_distance(tree, y, z)
    tol = cfg.rel_tol * tree.scale
    if t0 < -tol or t0 > total + tol:
        raise ParameterError(f"offset {t0} outside [0, {total}]")
    t0 = min(max(t0, 0.0), total)
    if t0 <= tol:
        return y
    if t0 >= total - tol:
        return z
    if not y.is_vertex and not z.is_vertex and y.edge == z.edge:
        step = t0 if z.offset > y.offset else -t0
        return normalize(tree, TreeLocation.on(y.edge, y.offset + step), cfg)

    vd = tree.vertex_distances
    (p, dp), (q, dq) = min(
        ((pa, qa) for pa in _anchors(tree, y) for qa in _anchors(tree, z)),
        key=lambda pq: pq[0][1] + vd[pq[0][0], pq[1][0]] + pq[1][1],
    )
    if t0 <= dp:
        # inside y's own edge, walking from y towards p
        e = tree.edges[y.edge]
        offset = y.offset - t0 if p == e.u else y.offset + t0
        return normalize(tree, TreeLocation.on(y.edge, offset), cfg)
    walked = dp
    path = tree.vertex_path(p, q)
    for a, b in zip(path, path[1:]):
        eid = tree.edge_between(a, b)
        length = tree.edges[eid].length
        if t0 <= walked + length:
            return _point_on_edge(tree, eid, a, t0 - walked, cfg)
        walked += length
    # remaining stretch lies on z's edge, from q towards z
    return _point_on_edge(tree, z.edge, q, t0 - walked, cfg)


def dist_to_geodesic_point(d_xy: float, d_xz: float, d_yz: float, t0: float) -> float:
    """Distance from ``x`` to the point at distance ``t0`` from ``y`` on ``[y z]``.

    In a tree this depends only on the three pairwise distances: it is
    ``(y|z)_x + |t0 - (x|z)_y|``.
    """
    if t0 < 0 or t0 > d_yz * (1 + 1e-12) + 1e-300:
        raise ParameterError(f"offset {t0} outside [0, {d_yz}]")
    x_to_branch = (d_xy + d_xz - d_yz) / 2
    y_to_branch = (d_xy + d_yz - d_xz) / 2
    return x_to_branch + abs(t0 - y_to_branch)


def project(tree: FiniteTree, subtree: Iterable[int], b: TreeLocation) -> TreeLocation:
    """Nearest point to ``b`` of the subtree spanned by the vertex set ``subtree``.

    The vertex set must induce a connected subgraph (i.e. be closed under
    paths). Every path from ``b`` into the subtree passes the result.
    """
    verts = sorted({int(v) for v in subtree})
    if not verts:
        raise InputError("subtree must be nonempty")
    if any(v < 0 or v >= len(tree.vertices) for v in verts):
        raise InputError("subtree contains unknown vertex ids")
    members = set(verts)
    for v in verts[1:]:
        if not members.issuperset(tree.vertex_path(verts[0], v)):
            raise InputError(f"subtree is not path-closed: path {verts[0]}..{v} leaves it")
    b = normalize(tree, b)
    if b.is_vertex and b.vertex in members:
        return b
    if not b.is_vertex:
        e = tree.edges[b.edge]
        if e.u in members and e.v in members:
            return b
    return TreeLocation.at(min(verts, key=lambda v: (tree_distance(tree, TreeLocation.at(v), b), v)))


def gate(
    tree: FiniteTree, hull: Sequence[TreeLocation], b: TreeLocation, cfg: ToleranceConfig = DEFAULT_TOL
) -> tuple[TreeLocation, float, int]:
    """Projection of ``b`` onto the convex hull of the locations ``hull``.

    Returns ``(c, g, k)``: the gate ``c``, its distance ``g`` to ``b`` and
    an index ``k`` such that ``c`` lies on the geodesic ``[hull[0], hull[k]]``.
    The hull is the union of the geodesics from ``hull[0]``, so
    ``g = min_k (hull[0] | hull[k])_b``; ties go to the lowest ``k``.
    """
    if not hull:
        raise InputError("gate onto an empty set")
    x0 = hull[0]
    d_bx0 = tree_distance(tree, b, x0)
    best_g, best_k = d_bx0, 0
    for k in range(1, len(hull)):
        g = (d_bx0 + tree_distance(tree, b, hull[k]) - tree_distance(tree, x0, hull[k])) / 2
        if g < best_g - cfg.rel_tol * tree.scale:
            best_g, best_k = g, k
    best_g = max(best_g, 0.0)
    c = geodesic_point(tree, x0, hull[best_k], d_bx0 - best_g, cfg)
    return c, best_g, best_k


# -- growing trees -----------------------------------------------------------


def relabel(tree: FiniteTree, v: int, label: Optional[str]) -> FiniteTree:
    verts = list(tree.vertices)
    verts[v] = Vertex(v, label)
    return replace(tree, vertices=tuple(verts))


def subdivide(tree: FiniteTree, eid: int, offset: float, label: Optional[str] = None) -> tuple[FiniteTree, int]:
    """Insert a vertex at ``offset`` along edge ``eid``.

    The edge keeps its id and becomes ``(u, w)``; the far part ``(w, v)``
    is appended as a new edge.
    """
    e = tree.edges[eid]
    if not 0 < offset < e.length:
        raise ParameterError(f"subdivision offset {offset} not inside edge of length {e.length}")
    w = len(tree.vertices)
    edges = list(tree.edges)
    edges[eid] = Edge(e.u, w, offset)
    edges.append(Edge(w, e.v, e.length - offset))
    return FiniteTree(tree.vertices + (Vertex(w, label),), tuple(edges), tree.valence_budget), w


def add_leaf(tree: FiniteTree, at: int, length: float, label: Optional[str] = None) -> tuple[FiniteTree, int]:
    w = len(tree.vertices)
    return (
        FiniteTree(tree.vertices + (Vertex(w, label),), tree.edges + (Edge(at, w, float(length)),), tree.valence_budget),
        w,
    )


def materialize(
    tree: FiniteTree, loc: TreeLocation, label: Optional[str] = None, cfg: ToleranceConfig = DEFAULT_TOL
) -> tuple[FiniteTree, int]:
    """Make ``loc`` a vertex (subdividing if needed); apply ``label`` if given."""
    loc = normalize(tree, loc, cfg)
    if loc.is_vertex:
        if label is not None:
            tree = relabel(tree, loc.vertex, label)
        return tree, loc.vertex
    return subdivide(tree, loc.edge, loc.offset, label)


def materialize_all(
    tree: FiniteTree,
    locations: Sequence[TreeLocation],
    labels: Sequence[Optional[str]],
    cfg: ToleranceConfig = DEFAULT_TOL,
) -> tuple[FiniteTree, list[int]]:
    """:func:`materialize` every location, keeping pending locations valid across subdivisions."""
    pending = [normalize(tree, loc, cfg) for loc in locations]
    ids = []
    for k, label in enumerate(labels):
        loc = pending[k]
        if not loc.is_vertex:
            eid, cut = loc.edge, loc.offset
            far = len(tree.edges)
            for r in range(k + 1, len(pending)):
                other = pending[r]
                if other.is_vertex or other.edge != eid:
                    continue
                if abs(other.offset - cut) <= cfg.rel_tol * tree.scale:
                    pending[r] = TreeLocation.at(len(tree.vertices))
                elif other.offset > cut:
                    pending[r] = TreeLocation.on(far, other.offset - cut)
        tree, vid = materialize(tree, loc, label, cfg)
        ids.append(vid)
    return tree, ids


def hull_subtree(
    tree: FiniteTree, locations: Sequence[TreeLocation], labels: Sequence[str], cfg: ToleranceConfig = DEFAULT_TOL
) -> tuple[FiniteTree, list[int]]:
    """The subtree spanned by ``locations``, as a tree of its own.

    Each location becomes a vertex carrying the matching label; all other
    labels are dropped and unlabeled vertices of degree 2 are smoothed
    away. Returns the new tree and the vertex id of every location.
    """
    if len(locations) != len(labels):
        raise InputError("need one label per location")
    if not locations:
        return FiniteTree((), (), tree.valence_budget), []
    work = FiniteTree(tuple(Vertex(v.id) for v in tree.vertices), tree.edges, tree.valence_budget)
    work, ids = materialize_all(work, locations, [str(lab) for lab in labels], cfg)
    keep = set()
    for v in ids:
        keep.update(work.vertex_path(ids[0], v))
    # adjacency restricted to the hull
    adj = {v: [(w, work.edges[eid].length) for w, eid in work.adjacency[v] if w in keep] for v in keep}
    label_of = {v: work.vertices[v].label for v in keep}
    for v in sorted(keep):
        if label_of[v] is None and len(adj[v]) == 2:
            (a, la), (b, lb) = adj[v]
            adj[a] = [(w, l) for w, l in adj[a] if w != v] + [(b, la + lb)]
            adj[b] = [(w, l) for w, l in adj[b] if w != v] + [(a, la + lb)]
            del adj[v]
    order = sorted(adj)
    new_id = {v: k for k, v in enumerate(order)}
    verts = tuple(Vertex(new_id[v], label_of[v]) for v in order)
    edges = []
    for v in order:
        for w, length in sorted(adj[v]):
            if new_id[v] < new_id[w]:
                edges.append(Edge(new_id[v], new_id[w], length))
    return FiniteTree(verts, tuple(edges), tree.valence_budget), [new_id[v] for v in ids]


def labeled_matrix(tree: FiniteTree) -> tuple[list[str], DistanceMatrix]:
    """Labels (in vertex order) and the metric they induce."""
    pairs = tree.labeled()
    idx = [v for _, v in pairs]
    return [lab for lab, _ in pairs], DistanceMatrix(tree.vertex_distances[np.ix_(idx, idx)])


# -- tree metrics ------------------------------------------------------------


def gromov_product(m: DistanceMatrix, x: int, y: int, z: int) -> float:
    """``(y|z)_x = (d(x,y) + d(x,z) - d(y,z)) / 2``."""
    if len({x, y, z}) != 3:
        raise InputError("Gromov product needs three distinct indices")
    for i in (x, y, z):
        if not 0 <= i < m.n:
            raise InputError(f"index {i} out of range")
    d = m.d
    return (d[x, y] + d[x, z] - d[y, z]) / 2


def four_point_check(
    m: DistanceMatrix, cfg: ToleranceConfig = DEFAULT_TOL
) -> tuple[bool, Optional[tuple[int, int, int, int]]]:
    """Whether, for every quadruple, the two largest of the three pair-sums agree.

    Returns ``(ok, witness)`` with the lexicographically first failing
    quadruple as witness.
    """
    if m.n < 4:
        return True, None
    quads = np.array(list(itertools.combinations(range(m.n), 4)))
    i, j, k, l = quads.T
    d = m.d
    sums = np.stack([d[i, j] + d[k, l], d[i, k] + d[j, l], d[i, l] + d[j, k]], axis=1)
    sums.sort(axis=1)
    bad = sums[:, 2] - sums[:, 1] > cfg.rel_tol * 2 * m.scale
    if bad.any():
        return False, tuple(int(v) for v in quads[int(np.argmax(bad))])
    return True, None


def build_realization(
    m: DistanceMatrix,
    cfg: ToleranceConfig = DEFAULT_TOL,
    labels: Optional[Sequence[str]] = None,
    valence_budget: Optional[int] = None,
) -> FiniteTree:
    """Minimal tree realizing a tree metric, built by inserting points in index order.

    Point ``k`` hangs off the current tree at its gate, found via Gromov
    products against point 0; ties favour lower indices. Vertex ids follow
    creation order, so the output is reproducible. The budget is recorded
    on the tree but not enforced here (see :func:`max_degree`).
    """
    report = validate_metric(m, cfg)
    if not report.ok:
        raise InputError(f"invalid metric: {report.message}")
    if m.kind != "metric":
        raise InputError("collapse pseudometrics before building a realization")
    ok, quad = four_point_check(m, cfg)
    if not ok:
        raise NotATreeMetric(quad)
    labels = [str(i) for i in range(m.n)] if labels is None else [str(x) for x in labels]
    if len(labels) != m.n:
        raise InputError("need one label per point")
    d = m.d
    tree = single_vertex_tree(labels[0], valence_budget)
    where = [0]
    if m.n == 1:
        return tree
    tree, w = add_leaf(tree, 0, d[0, 1], labels[1])
    where.append(w)
    tol = cfg.rel_tol * m.scale
    for k in range(2, m.n):
        hull = [TreeLocation.at(v) for v in where]
        # Gromov products straight from the metric
        best_g, best_y = d[k, 0], 0
        for y in range(1, k):
            g = (d[k, 0] + d[k, y] - d[0, y]) / 2
            if g < best_g - tol:
                best_g, best_y = g, y
        c = geodesic_point(tree, hull[0], hull[best_y], max(d[k, 0] - best_g, 0.0), cfg)
        if best_g <= tol:
            if c.is_vertex and tree.vertices[c.vertex].label is not None:
                raise InputError(f"points {tree.vertices[c.vertex].label} and {labels[k]} coincide")
            tree, w = materialize(tree, c, labels[k], cfg)
        else:
            tree, cv = materialize(tree, c, None, cfg)
            tree, w = add_leaf(tree, cv, best_g, labels[k])
        where.append(w)
    return tree
