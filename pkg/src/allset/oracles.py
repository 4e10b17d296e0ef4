"""Independent reference deciders used to cross-check the criteria in :mod:`allset.embed`
and :mod:`allset.homog`.

The classical-space oracles fit coordinates numerically (batched
Levenberg-Marquardt from random starts) and accept only if the distances
recomputed from the fitted points match the input. They never look at
eigenvalues. The tree oracle reconstructs by neighbour joining, and the
homogeneity oracle enumerates every partial isometry against the
isometry group found by trying all permutations.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core_metric import DistanceMatrix

FIT_TOL = 1e-6
DEFAULT_RESTARTS = 8


@dataclass
class FitResult:
    embeddable: bool
    residual: float
    coords: np.ndarray


# -- batched Levenberg-Marquardt ------------------------------------------------


def _levenberg_marquardt(
    x: np.ndarray,
    model: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]],
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    iters: int = 200,
) -> np.ndarray:
    """Minimize ``sum(r**2)`` independently for every row of ``x``.

    ``model(x, rows)`` returns residuals ``(B, R)`` and Jacobian ``(B, R, P)``
    for the batch rows ``rows``.
    Rows leave the active set once their cost stops moving.
    """
    x = x.copy()
    if project is not None:
        x = project(x)
    r, jac = model(x, np.arange(len(x)))
    cost = np.sum(r**2, axis=1)
    lam = np.full(len(x), 1e-3)
    active = np.arange(len(x))
    eye = np.eye(x.shape[1])
    for _ in range(iters):
        if active.size == 0:
            break
        ja, ra = jac[active], r[active]
        jt = ja.transpose(0, 2, 1)
        jtj = jt @ ja
        grad = (jt @ ra[:, :, None])[:, :, 0]
        mu = np.trace(jtj, axis1=1, axis2=2)[:, None, None] / x.shape[1]
        # the floor keeps the system positive definite on gauge directions
        damp = (lam[active, None, None] + 1e-10) * mu + 1e-12
        step = np.linalg.solve(jtj + damp * eye, -grad[:, :, None])[:, :, 0]
        trial = x[active] + step
        if project is not None:
            trial = project(trial)
        tr, tj = model(trial, active)
        tcost = np.sum(tr**2, axis=1)
        old = cost[active]
        better = tcost < old
        stalled = better & (old - tcost <= 1e-10 * old)
        idx = active[better]
        x[idx], r[idx], jac[idx], cost[idx] = trial[better], tr[better], tj[better], tcost[better]
        lam[idx] /= 3.0
        lam[active[~better]] *= 4.0
        done = stalled | (cost[active] < 1e-26) | (lam[active] > 1e12)
        active = active[~done]
    return x


def _pair_index(n):
    pairs = np.array(list(itertools.combinations(range(n), 2)), dtype=np.int64).reshape(-1, 2)
    return pairs[:, 0], pairs[:, 1]


def _scatter_jacobian(b, n, dim, i, j, gi, gj):
    """Assemble ``(B, R, n*dim)`` from per-pair gradients w.r.t. both endpoints."""
    rcount = len(i)
    jac = np.zeros((b, rcount, n, dim))
    rows = np.arange(rcount)
    jac[:, rows, i, :] = gi
    jac[:, rows, j, :] += gj
    return jac.reshape(b, rcount, n * dim)


def _batched_fit(dmats, n, dim, restarts, seed, init, model_factory, distances, project=None):
    dmats = np.asarray(dmats, float).reshape(-1, n, n)
    count = len(dmats)
    if n == 1:
        return np.ones(count, bool), np.zeros(count), np.zeros((count, 1, dim))
    i, j = _pair_index(n)
    target = np.repeat(dmats[:, i, j], restarts, axis=0)
    rng = np.random.default_rng(seed)
    x0 = init(rng, count * restarts, target)
    x = _levenberg_marquardt(x0, model_factory(target, i, j), project)
    fitted = distances(x, i, j)
    err = np.max(np.abs(fitted - target), axis=1).reshape(count, restarts)
    best = np.argmin(err, axis=1)
    scale = np.maximum(1.0, np.max(dmats.reshape(count, -1), axis=1))
    resid = err[np.arange(count), best]
    coords = x.reshape(count, restarts, n, -1)[np.arange(count), best]
    return resid <= FIT_TOL * scale, resid, coords


# -- Euclidean ------------------------------------------------------------------


def fit_euclidean_batch(dmats, n: int, dim: int, restarts: Optional[int] = None, seed: int = 0):
    """Least-squares fit of ``sum (|x_i - x_j| - d_ij)**2`` for many matrices at once.

    On the line a random start lands in the global minimum only about one
    time in five (points get stuck on the wrong side), hence more restarts.
    """
    if restarts is None:
        restarts = 48 if dim == 1 else DEFAULT_RESTARTS

    def init(rng, b, target):
        spread = np.maximum(target.mean(axis=1, keepdims=True), 1e-3)
        return rng.normal(size=(b, n * dim)) * spread

    def factory(target, i, j):
        def model(x, rows):
            pts = x.reshape(len(x), n, dim)
            diff = pts[:, i, :] - pts[:, j, :]
            dist = np.sqrt(np.sum(diff**2, axis=2) + 1e-30)
            unit = diff / dist[:, :, None]
            return dist - target[rows], _scatter_jacobian(len(x), n, dim, i, j, unit, -unit)

        return model

    def distances(x, i, j):
        pts = x.reshape(len(x), n, dim)
        return np.linalg.norm(pts[:, i, :] - pts[:, j, :], axis=2)

    return _batched_fit(dmats, n, dim, restarts, seed, init, factory, distances)


def fit_euclidean(m: DistanceMatrix, dim: int, restarts: Optional[int] = None, seed: int = 0) -> FitResult:
    ok, resid, coords = fit_euclidean_batch([m.d], m.n, dim, restarts, seed)
    return FitResult(bool(ok[0]), float(resid[0]), coords[0])


# -- sphere / circle --------------------------------------------------------------


def fit_sphere_batch(dmats, n: int, dim: int, radius: float = 1.0, restarts: int = DEFAULT_RESTARTS, seed: int = 0):
    """Fit unit vectors in ``R^(dim+1)`` to ``<u_i, u_j> = cos(d_ij / radius)``.

    Acceptance uses the recomputed geodesic distances ``radius * arccos``,
    so distances beyond ``pi * radius`` can never be matched.
    """
    k = dim + 1

    def normalize(x):
        pts = x.reshape(len(x), n, k)
        return (pts / np.linalg.norm(pts, axis=2, keepdims=True)).reshape(len(x), n * k)

    def init(rng, b, target):
        return rng.normal(size=(b, n * k))

    def factory(target, i, j):
        cos_target = np.cos(target / radius)

        def model(x, rows):
            pts = x.reshape(len(x), n, k)
            dots = np.sum(pts[:, i, :] * pts[:, j, :], axis=2)
            # tangential gradients; rows are kept on the unit sphere by ``normalize``
            gi = pts[:, j, :] - dots[:, :, None] * pts[:, i, :]
            gj = pts[:, i, :] - dots[:, :, None] * pts[:, j, :]
            return dots - cos_target[rows], _scatter_jacobian(len(x), n, k, i, j, gi, gj)

        return model

    def distances(x, i, j):
        pts = x.reshape(len(x), n, k)
        dots = np.sum(pts[:, i, :] * pts[:, j, :], axis=2)
        return radius * np.arccos(np.clip(dots, -1.0, 1.0))

    return _batched_fit(dmats, n, k, restarts, seed, init, factory, distances, normalize)


def fit_sphere(m: DistanceMatrix, dim: int, radius: float = 1.0, restarts: int = DEFAULT_RESTARTS, seed: int = 0) -> FitResult:
    ok, resid, coords = fit_sphere_batch([m.d], m.n, dim, radius, restarts, seed)
    return FitResult(bool(ok[0]), float(resid[0]), coords[0] * radius)


def fit_circle_batch(dmats, n: int, length: float, restarts: int = DEFAULT_RESTARTS, seed: int = 0):
    """A circle of circumference ``L`` is the 1-sphere of radius ``L / 2pi``."""
    return fit_sphere_batch(dmats, n, 1, length / (2 * math.pi), restarts, seed)


def fit_circle(m: DistanceMatrix, length: float, restarts: int = DEFAULT_RESTARTS, seed: int = 0) -> FitResult:
    ok, resid, coords = fit_circle_batch([m.d], m.n, length, restarts, seed)
    return FitResult(bool(ok[0]), float(resid[0]), coords[0])


# -- hyperbolic -------------------------------------------------------------------


def fit_hyperbolic_batch(dmats, n: int, dim: int, scale: float = 1.0, restarts: int = DEFAULT_RESTARTS, seed: int = 0):
    """Fit points of the hyperboloid ``x0**2 - |y|**2 = 1`` to ``cosh(d / scale)``.

    The free parameters are the spatial coordinates ``y``; the time
    coordinate is always the projection ``x0 = sqrt(1 + |y|**2)``, which
    keeps every point on the upper sheet.
    """

    def init(rng, b, target):
        spread = np.maximum(target.mean(axis=1, keepdims=True) / scale, 1e-3) * 0.5
        return rng.normal(size=(b, n * dim)) * spread

    def lorentz(x, i, j):
        y = x.reshape(len(x), n, dim)
        t = np.sqrt(1.0 + np.sum(y**2, axis=2))
        inner = t[:, i] * t[:, j] - np.sum(y[:, i, :] * y[:, j, :], axis=2)
        return y, t, inner

    def factory(target, i, j):
        cosh_target = np.cosh(target / scale)

        def model(x, rows):
            y, t, inner = lorentz(x, i, j)
            gi = (t[:, j] / t[:, i])[:, :, None] * y[:, i, :] - y[:, j, :]
            gj = (t[:, i] / t[:, j])[:, :, None] * y[:, j, :] - y[:, i, :]
            return inner - cosh_target[rows], _scatter_jacobian(len(x), n, dim, i, j, gi, gj)

        return model

    def distances(x, i, j):
        _, _, inner = lorentz(x, i, j)
        return scale * np.arccosh(np.maximum(inner, 1.0))

    return _batched_fit(dmats, n, dim, restarts, seed, init, factory, distances)


def fit_hyperbolic(m: DistanceMatrix, dim: int, scale: float = 1.0, restarts: int = DEFAULT_RESTARTS, seed: int = 0) -> FitResult:
    ok, resid, coords = fit_hyperbolic_batch([m.d], m.n, dim, scale, restarts, seed)
    return FitResult(bool(ok[0]), float(resid[0]), coords[0])


# -- trees ---------------------------------------------------------------------------


def neighbor_joining(d: np.ndarray) -> tuple[int, list[tuple[int, int, float]]]:
    """Neighbour-joining tree: leaves ``0..n-1``, internal nodes numbered after them.

    Returns the node count and the edge list ``(a, b, length)``. Lengths
    can come out negative when ``d`` is not a tree metric.
    """
    d = np.array(d, float)
    n = len(d)
    if n == 1:
        return 1, []
    if n == 2:
        return 2, [(0, 1, float(d[0, 1]))]
    nodes = list(range(n))
    next_id = n
    edges = []
    while len(nodes) > 3:
        k = len(nodes)
        r = d.sum(axis=1)
        q = (k - 2) * d - r[:, None] - r[None, :]
        np.fill_diagonal(q, np.inf)
        a, b = divmod(int(np.argmin(q)), k)
        la = 0.5 * d[a, b] + (r[a] - r[b]) / (2 * (k - 2))
        lb = d[a, b] - la
        u = next_id
        next_id += 1
        edges += [(nodes[a], u, float(la)), (nodes[b], u, float(lb))]
        du = 0.5 * (d[a] + d[b] - d[a, b])
        keep = [x for x in range(k) if x not in (a, b)]
        new = np.zeros((k - 1, k - 1))
        new[:-1, :-1] = d[np.ix_(keep, keep)]
        new[-1, :-1] = new[:-1, -1] = du[keep]
        d = new
        nodes = [nodes[x] for x in keep] + [u]
    center = next_id
    next_id += 1
    for a, b, c in ((0, 1, 2), (1, 0, 2), (2, 0, 1)):
        edges.append((nodes[a], center, float((d[a, b] + d[a, c] - d[b, c]) / 2)))
    return next_id, edges


def tree_oracle(m: DistanceMatrix, valence: int, rel_tol: float = 1e-9) -> bool:
    """Tree realizability by neighbour joining.

    Accept iff the joined tree has no negative edge, reproduces every
    distance, and, after contracting zero-length edges, no node has more
    than ``valence`` incident edges.
    """
    tol = rel_tol * max(1.0, float(np.max(m.d))) * 8
    count, edges = neighbor_joining(m.d)
    if any(length < -tol for _, _, length in edges):
        return False
    adj = {v: [] for v in range(count)}
    for a, b, length in edges:
        adj[a].append((b, max(length, 0.0)))
        adj[b].append((a, max(length, 0.0)))
    for s in range(m.n):
        dist = {s: 0.0}
        stack = [s]
        while stack:
            v = stack.pop()
            for w, length in adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + length
                    stack.append(w)
        if any(abs(dist[t] - m.d[s, t]) > tol for t in range(m.n)):
            return False
    parent = list(range(count))

    def find(v):
        while parent[v] != v:
            v = parent[v]
        return v

    for a, b, length in edges:
        if length <= tol:
            parent[find(a)] = find(b)
    degree: dict[int, int] = {}
    for a, b, length in edges:
        if length > tol:
            degree[find(a)] = degree.get(find(a), 0) + 1
            degree[find(b)] = degree.get(find(b), 0) + 1
    return max(degree.values(), default=0) <= valence


# -- isometries and homogeneity ---------------------------------------------------------


def isometry_group_bruteforce(m: DistanceMatrix, rel_tol: float = 1e-9) -> list[tuple[int, ...]]:
    """All distance-preserving permutations, by trying every permutation."""
    tol = rel_tol * max(1.0, float(np.max(m.d)))
    return [
        p
        for p in itertools.permutations(range(m.n))
        if np.all(np.abs(m.d[np.ix_(p, p)] - m.d) <= tol)
    ]


def homogeneous_bruteforce(m: DistanceMatrix, rel_tol: float = 1e-9) -> bool:
    """Every partial isometry between subsets extends to a global isometry.

    Direct from the definition: for every domain, every injective image
    tuple with the same rounded distances must be reached by a group
    element.
    """
    scale = max(1.0, float(np.max(m.d)))
    digits = max(0, int(-np.log10(rel_tol)) - 1)
    d = np.round(m.d / scale, digits).tolist()
    group = isometry_group_bruteforce(m, rel_tol)
    n = m.n
    for size in range(1, n + 1):
        by_key: dict = {}
        for img in itertools.permutations(range(n), size):
            key = tuple(d[img[a]][img[b]] for a, b in itertools.combinations(range(size), 2))
            by_key.setdefault(key, []).append(img)
        for dom in itertools.combinations(range(n), size):
            key = tuple(d[dom[a]][dom[b]] for a, b in itertools.combinations(range(size), 2))
            reachable = {tuple(g[x] for x in dom) for g in group}
            if any(img not in reachable for img in by_key.get(key, ())):
                return False
    return True


def coloring_max_clique_bruteforce(n: int, color: Sequence[Sequence[int]]) -> int:
    """Largest monochromatic subset by checking every subset."""
    best = min(n, 1)
    for size in range(2, n + 1):
        found = False
        for sub in itertools.combinations(range(n), size):
            cols = {color[a][b] for a, b in itertools.combinations(sub, 2)}
            if len(cols) == 1:
                found = True
                break
        if not found:
            break
        best = size
    return best
