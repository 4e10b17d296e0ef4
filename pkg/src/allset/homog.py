"""Homogeneity of finite metric spaces.

A finite space is k-point homogeneous when every distance-preserving map
between subsets of at most k points is the restriction of a global
isometry. All comparisons run on integer distance classes (see
:func:`distance_classes`) so that "equal distance" is transitive.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .core_metric import DEFAULT_TOL, DistanceMatrix, ToleranceConfig
from .errors import InputError, ParameterError


@dataclass(frozen=True)
class PartialMap:
    """``domain[i] -> image[i]`` over the points of one space."""

    domain: tuple[int, ...]
    image: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(int(i) for i in self.domain))
        object.__setattr__(self, "image", tuple(int(i) for i in self.image))
        if len(self.domain) != len(self.image):
            raise InputError("domain and image must have equal length")
        if len(set(self.domain)) != len(self.domain) or len(set(self.image)) != len(self.image):
            raise InputError("domain and image must be duplicate-free")


@dataclass(frozen=True)
class HomogeneityReport:
    verdict: bool
    witness: Optional[PartialMap]
    checked_k: int
    isometry_group_size: int


def distance_classes(m: DistanceMatrix, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Integer class id per entry; values chained by gaps <= rel_tol * scale share a class.

    Class 0 always contains 0, so the diagonal is class 0.
    """
    tol = cfg.rel_tol * m.scale
    values = np.unique(np.concatenate([[0.0], m.d.ravel()]))
    ids = np.concatenate([[0], np.cumsum(np.diff(values) > tol)])
    return ids[np.searchsorted(values, m.d)]


def _check_map(m: DistanceMatrix, cls: np.ndarray, p: PartialMap) -> None:
    for i in p.domain + p.image:
        if not 0 <= i < m.n:
            raise InputError(f"index {i} out of range for {m.n} points")
    dom, img = list(p.domain), list(p.image)
    sub_d, sub_i = cls[np.ix_(dom, dom)], cls[np.ix_(img, img)]
    if not np.array_equal(sub_d, sub_i):
        a, b = np.argwhere(sub_d != sub_i)[0]
        raise InputError(f"map is not distance-preserving on pair ({dom[a]}, {dom[b]})")


def _permutations(cls: list[list[int]], fixed: dict[int, int]) -> Iterator[tuple[int, ...]]:
    """All class-preserving permutations extending ``fixed``, in lexicographic order."""
    n = len(cls)
    profile = [tuple(sorted(row)) for row in cls]
    perm = [-1] * n
    used = [False] * n

    def search(i):
        if i == n:
            yield tuple(perm)
            return
        choices = [fixed[i]] if i in fixed else range(n)
        for j in choices:
            if used[j] or profile[i] != profile[j]:
                continue
            row_i, row_j = cls[i], cls[j]
            if all(row_i[k] == row_j[perm[k]] for k in range(i)):
                perm[i] = j
                used[j] = True
                yield from search(i + 1)
                used[j] = False
        perm[i] = -1

    return search(0)


def isometry_group(m: DistanceMatrix, cfg: ToleranceConfig = DEFAULT_TOL) -> list[tuple[int, ...]]:
    """Every distance-preserving permutation, sorted lexicographically (identity first)."""
    cls = distance_classes(m, cfg).tolist()
    return list(_permutations(cls, {}))


def extends_to_global(
    m: DistanceMatrix, p: PartialMap, cfg: ToleranceConfig = DEFAULT_TOL
) -> Optional[tuple[int, ...]]:
    """The lexicographically least isometry restricting to ``p``, or None.

    Raises :class:`InputError` if ``p`` is not distance-preserving.
    """
    cls = distance_classes(m, cfg)
    _check_map(m, cls, p)
    return next(_permutations(cls.tolist(), dict(zip(p.domain, p.image))), None)


def _colex_subsets(n: int, size: int) -> list[tuple[int, ...]]:
    return sorted(itertools.combinations(range(n), size), key=lambda s: s[::-1])


def _domain_representatives(n: int, size: int, group: Sequence[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """First subset (colex) of every orbit of ``size``-subsets under ``group``."""
    seen = set()
    reps = []
    for dom in _colex_subsets(n, size):
        if dom in seen:
            continue
        reps.append(dom)
        for g in group:
            seen.add(tuple(sorted(g[x] for x in dom)))
    return reps


def _partial_isometries(cls: list[list[int]], dom: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Images of ``dom`` under all distance-preserving injections, lexicographic order."""
    n = len(cls)
    k = len(dom)
    img = []

    def search(i):
        if i == k:
            yield tuple(img)
            return
        a = dom[i]
        for j in range(n):
            if j in img:
                continue
            if all(cls[a][dom[t]] == cls[j][img[t]] for t in range(i)):
                img.append(j)
                yield from search(i + 1)
                img.pop()

    return search(0)


def is_k_homogeneous(m: DistanceMatrix, k: int, cfg: ToleranceConfig = DEFAULT_TOL) -> HomogeneityReport:
    """Check that every partial isometry on at most ``k`` points extends globally.

    Domain sizes are checked in increasing order, domains in colex order
    up to the action of the isometry group. ``checked_k`` is the largest
    size fully verified.
    """
    if not 1 <= k <= m.n:
        raise ParameterError(f"k must lie in [1, {m.n}], got {k}")
    cls = distance_classes(m, cfg).tolist()
    group = list(_permutations(cls, {}))
    for size in range(1, k + 1):
        for dom in _domain_representatives(m.n, size, group):
            reachable = {tuple(g[x] for x in dom) for g in group}
            for img in _partial_isometries(cls, dom):
                if img not in reachable:
                    return HomogeneityReport(False, PartialMap(dom, img), size - 1, len(group))
    return HomogeneityReport(True, None, k, len(group))


def is_all_set_homogeneous(m: DistanceMatrix, cfg: ToleranceConfig = DEFAULT_TOL) -> HomogeneityReport:
    """Decide all-set-homogeneity through the one-point extension property.

    A partial isometry that cannot absorb some further point cannot extend
    globally; conversely, if every partial isometry on fewer than n points
    absorbs every further point, any map grows one point at a time to a
    bijection. So the space is homogeneous iff no partial isometry gets
    stuck. The first stuck map found is returned as the witness.
    """
    n = m.n
    cls = distance_classes(m, cfg).tolist()
    group = list(_permutations(cls, {}))
    for size in range(1, n):
        for dom in _domain_representatives(n, size, group):
            rest = [x for x in range(n) if x not in dom]
            for img in _partial_isometries(cls, dom):
                free = [y for y in range(n) if y not in img]
                for x in rest:
                    row = [cls[x][a] for a in dom]
                    if not any(all(cls[y][b] == r for b, r in zip(img, row)) for y in free):
                        return HomogeneityReport(False, PartialMap(dom, img), size - 1, len(group))
    return HomogeneityReport(True, None, n, len(group))
