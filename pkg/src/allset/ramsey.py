"""Near-equilateral and equilateral subsets of finite metric spaces.

Distances are binned into colors and the largest single-color subset is
found by exact branch and bound over bitsets; a greedy coloring of the
candidate set bounds how much a branch can still gain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core_metric import DEFAULT_TOL, DistanceMatrix, ToleranceConfig
from .errors import InputError, ParameterError

MAX_POINTS = 40


@dataclass(frozen=True)
class EdgeColoring:
    """Pair colors as an n x n matrix (diagonal -1) plus one ``(lo, hi)`` interval per color."""

    n: int
    colors: tuple[tuple[int, ...], ...]
    bins: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        colors = tuple(tuple(int(c) for c in row) for row in self.colors)
        object.__setattr__(self, "colors", colors)
        object.__setattr__(self, "bins", tuple((float(lo), float(hi)) for lo, hi in self.bins))
        if len(colors) != self.n or any(len(row) != self.n for row in colors):
            raise InputError("color matrix must be n x n")
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if colors[i][j] != colors[j][i]:
                    raise InputError(f"colors of pair ({i}, {j}) disagree")
                if colors[i][j] < 0:
                    raise InputError(f"pair ({i}, {j}) is uncolored")
        for (lo1, hi1), (lo2, hi2) in zip(self.bins, self.bins[1:]):
            if not (lo1 < hi1 <= lo2 < hi2):
                raise InputError("bins must be increasing and disjoint")

    @classmethod
    def from_pairs(cls, n: int, color_of, bins=()) -> "EdgeColoring":
        """Build from a function ``color_of(i, j)`` on pairs ``i < j``."""
        rows = [[-1] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                rows[i][j] = rows[j][i] = int(color_of(i, j))
        return cls(n, tuple(map(tuple, rows)), bins)

    @property
    def palette(self) -> list[int]:
        return sorted({c for i, row in enumerate(self.colors) for c in row[i + 1 :]})


@dataclass(frozen=True)
class CliqueResult:
    color: Optional[int]
    subset: tuple[int, ...]


def bin_distances(m: DistanceMatrix, delta: float, cfg: ToleranceConfig = DEFAULT_TOL) -> EdgeColoring:
    """Color each pair by its bin ``[c*delta, (c+1)*delta)``.

    Values within rel_tol below a bin edge count as on the edge. Only the
    occupied bins are kept, renumbered 0, 1, ... from the shortest.
    """
    if not delta > 0 or not math.isfinite(delta):
        raise ParameterError("delta must be positive")
    q = m.d / delta
    raw = np.floor(q + cfg.rel_tol * np.maximum(1.0, q)).astype(np.int64)
    iu = np.triu_indices(m.n, 1)
    used = np.unique(raw[iu])
    ids = np.full(m.d.shape, -1, dtype=np.int64)
    ids[iu] = np.searchsorted(used, raw[iu])
    ids = np.maximum(ids, ids.T)
    np.fill_diagonal(ids, -1)
    bins = tuple((float(c * delta), float((c + 1) * delta)) for c in used)
    return EdgeColoring(m.n, tuple(map(tuple, ids.tolist())), bins)


def _max_clique(adj: Sequence[int], n: int, target: Optional[int]) -> tuple[int, ...]:
    """Largest clique (lexicographically least among ties) of the bitset graph ``adj``.

    With ``target`` set, returns the lexicographically least clique of that
    size, or ``()`` when none exists.
    """
    best: list[tuple[int, ...]] = [()]
    goal = target if target is not None else n + 1

    def bound(cand: int) -> int:
        # greedy coloring: each class is an independent set, so a clique uses at most one per class
        colors = 0
        while cand:
            colors += 1
            avail = cand
            while avail:
                v = (avail & -avail).bit_length() - 1
                avail &= ~adj[v] & ~(1 << v)
                cand &= ~(1 << v)
        return colors

    def search(clique: list[int], cand: int) -> bool:
        if len(clique) > len(best[0]):
            best[0] = tuple(clique)
            if len(clique) >= goal:
                return True
        if not cand or len(clique) + bound(cand) <= len(best[0]):
            return False
        while cand:
            if len(clique) + bin(cand).count("1") <= len(best[0]):
                return False
            v = (cand & -cand).bit_length() - 1
            cand &= ~(1 << v)
            clique.append(v)
            if search(clique, cand & adj[v]):
                return True
            clique.pop()
        return False

    search([], (1 << n) - 1)
    if target is not None and len(best[0]) < target:
        return ()
    return best[0]


def _check_size(n: int) -> None:
    if n > MAX_POINTS:
        raise ParameterError(f"exact clique search is capped at {MAX_POINTS} points, got {n}")


def monochromatic_clique(coloring: EdgeColoring, size_target: Optional[int] = None) -> Optional[CliqueResult]:
    """Largest subset whose pairs share one color.

    Ties go to the lowest color, then the lexicographically least subset.
    With ``size_target`` the first color (ascending) holding a subset of
    that size wins; None when no color does.
    """
    n = coloring.n
    _check_size(n)
    if size_target is not None and size_target < 1:
        raise ParameterError("size_target must be positive")
    if n == 0:
        return None
    if n == 1 or (size_target is not None and size_target == 1):
        return CliqueResult(None, (0,))
    best: Optional[CliqueResult] = None
    for c in coloring.palette:
        adj = [sum(1 << j for j in range(n) if j != i and coloring.colors[i][j] == c) for i in range(n)]
        if size_target is not None:
            found = _max_clique(adj, n, size_target)
            if found:
                return CliqueResult(c, found)
            continue
        found = _max_clique(adj, n, None)
        if best is None or len(found) > len(best.subset):
            best = CliqueResult(c, found)
    return best


def _within(m: DistanceMatrix, r: float, tol: float, cfg: ToleranceConfig) -> np.ndarray:
    slack = tol + cfg.rel_tol * max(1.0, r)
    ok = np.abs(m.d - r) <= slack
    np.fill_diagonal(ok, False)
    return ok


def _check_radius(r: float, tol: float) -> None:
    if not r > 0:
        raise ParameterError("r must be positive")
    if not tol >= 0:
        raise ParameterError("tol must be nonnegative")


def equilateral_subset(m: DistanceMatrix, r: float, tol: float = 0.0, cfg: ToleranceConfig = DEFAULT_TOL) -> tuple[int, ...]:
    """Largest subset with every pairwise distance in ``[r - tol, r + tol]``."""
    _check_radius(r, tol)
    _check_size(m.n)
    ok = _within(m, r, tol, cfg)
    adj = [int(sum(1 << int(j) for j in np.flatnonzero(ok[i]))) for i in range(m.n)]
    return _max_clique(adj, m.n, None)


def maximal_equilateral_extend(
    m: DistanceMatrix, r: float, seed: Sequence[int] = (), tol: float = 0.0, cfg: ToleranceConfig = DEFAULT_TOL
) -> tuple[int, ...]:
    """Grow ``seed`` by the lowest admissible index until no point can join."""
    _check_radius(r, tol)
    ok = _within(m, r, tol, cfg)
    chosen = [int(s) for s in seed]
    if len(set(chosen)) != len(chosen) or any(not 0 <= s < m.n for s in chosen):
        raise InputError("seed indices must be distinct and in range")
    for a in range(len(chosen)):
        for b in range(a + 1, len(chosen)):
            if not ok[chosen[a], chosen[b]]:
                raise InputError(f"seed points {chosen[a]} and {chosen[b]} are not at distance {r}")
    for x in range(m.n):
        if x not in chosen and all(ok[x, s] for s in chosen):
            chosen.append(x)
    return tuple(sorted(chosen))
