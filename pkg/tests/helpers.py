"""Shared generators for the test-suite: metric grids and random trees."""
from __future__ import annotations

import itertools
import random
from functools import lru_cache

import numpy as np

from allset.core_metric import DistanceMatrix
from allset.tree import Edge, FiniteTree, Vertex


@lru_cache(maxsize=None)
def metric_classes(values: tuple[float, ...], n: int) -> tuple[DistanceMatrix, ...]:
    """One representative per relabeling class of the n-point metrics with entries in ``values``.

    Every valid matrix on the grid is isometric to exactly one
    representative (the one with the least base-|values| code).
    """
    if n == 1:
        return (DistanceMatrix([[0.0]]),)
    pairs = list(itertools.combinations(range(n), 2))
    npairs = len(pairs)
    base = len(values)
    index = {p: k for k, p in enumerate(pairs)}
    codes = np.arange(base**npairs, dtype=np.int64)
    digits = (codes[:, None] // base ** np.arange(npairs)[::-1]) % base
    vals = np.asarray(values, float)[digits]
    ok = np.ones(len(codes), bool)
    for i, j, k in itertools.permutations(range(n), 3):
        a = vals[:, index[tuple(sorted((i, k)))]]
        b = vals[:, index[tuple(sorted((i, j)))]]
        c = vals[:, index[tuple(sorted((j, k)))]]
        ok &= a <= b + c + 1e-12
    digits = digits[ok]
    weights = base ** np.arange(npairs)[::-1]
    best = None
    for perm in itertools.permutations(range(n)):
        cols = [index[tuple(sorted((perm[i], perm[j])))] for i, j in pairs]
        code = digits[:, cols] @ weights
        best = code if best is None else np.minimum(best, code)
    reps = np.unique(best)
    out = []
    for code in reps:
        dig = (code // base ** np.arange(npairs)[::-1]) % base
        out.append(DistanceMatrix.from_pairs(np.asarray(values, float)[dig]))
    return tuple(out)


def grid(values, max_n):
    return [m for n in range(1, max_n + 1) for m in metric_classes(tuple(values), n)]


def random_tree(rng: random.Random, n_vertices: int, max_degree: int, lengths=(1.0, 2.0, 3.0), labeled_fraction=1.0):
    """Random tree with bounded degree; labels ``"0", "1", ...`` on a random vertex subset.

    Leaves are always labeled so the result is in canonical form after
    dropping degree-2 Steiner vertices is not needed.
    """
    edges = []
    degree = [0]
    for v in range(1, n_vertices):
        choices = [u for u in range(v) if degree[u] < max_degree]
        u = rng.choice(choices)
        edges.append(Edge(u, v, float(rng.choice(lengths)) if lengths else rng.uniform(0.1, 2.0)))
        degree[u] += 1
        degree.append(1)
    labels = []
    count = 0
    for v in range(n_vertices):
        if degree[v] <= 1 or degree[v] == 2 or rng.random() < labeled_fraction:
            labels.append(str(count))
            count += 1
        else:
            labels.append(None)
    return FiniteTree(tuple(Vertex(v, labels[v]) for v in range(n_vertices)), tuple(edges), max_degree)


def random_tree_metric(rng: random.Random, n_points: int, max_degree: int, lengths=(1.0, 2.0, 3.0)):
    """Tree metric on the labeled vertices of a random bounded-degree tree."""
    t = random_tree(rng, n_points, max_degree, lengths)
    labs = t.labeled()
    idx = [v for _, v in labs]
    return DistanceMatrix(t.vertex_distances[np.ix_(idx, idx)]), t


def shuffled_copy(tree: FiniteTree, rng: random.Random):
    """Isometric copy of ``tree`` with vertex ids, edge order and edge orientation shuffled.

    Returns ``(copy, move)`` where ``move(loc)`` carries a location of
    ``tree`` to the corresponding location of the copy.
    """
    from allset.tree import TreeLocation

    nv = len(tree.vertices)
    perm = list(range(nv))
    rng.shuffle(perm)
    order = list(range(len(tree.edges)))
    rng.shuffle(order)
    flips = [rng.random() < 0.5 for _ in tree.edges]
    new_pos = {old: k for k, old in enumerate(order)}
    verts = [None] * nv
    for v in tree.vertices:
        verts[perm[v.id]] = Vertex(perm[v.id], v.label)
    edges = []
    for old in order:
        e = tree.edges[old]
        u, v = perm[e.u], perm[e.v]
        edges.append(Edge(v, u, e.length) if flips[old] else Edge(u, v, e.length))
    copy = FiniteTree(tuple(verts), tuple(edges), tree.valence_budget)

    def move(loc):
        if loc.is_vertex:
            return TreeLocation.at(perm[loc.vertex])
        length = tree.edges[loc.edge].length
        return TreeLocation.on(new_pos[loc.edge], length - loc.offset if flips[loc.edge] else loc.offset)

    return copy, move


def random_locations(rng: random.Random, tree: FiniteTree, count: int, edge_fraction=0.3):
    """Distinct random locations: vertices, or interior points of edges at a quarter or half."""
    from allset.tree import TreeLocation

    out = []
    seen = set()
    while len(out) < count:
        if tree.edges and rng.random() < edge_fraction:
            e = rng.randrange(len(tree.edges))
            frac = rng.choice((0.25, 0.5))
            key = ("e", e, frac)
            loc = TreeLocation.on(e, tree.edges[e].length * frac)
        else:
            v = rng.randrange(len(tree.vertices))
            key = ("v", v)
            loc = TreeLocation.at(v)
        if key not in seen:
            seen.add(key)
            out.append(loc)
    return out
