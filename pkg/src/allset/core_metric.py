"""Finite (pseudo)metric spaces stored as distance matrices.

Besides the container and its validation this module holds the basic
constructions on finite spaces: restriction to a subset, snowflaking,
regular ultrametrics and an exact isometry search.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InputError, ParameterError

METRIC = "metric"
PSEUDOMETRIC = "pseudometric"


@dataclass(frozen=True)
class ToleranceConfig:
    """Comparison tolerances.

    ``rel_tol`` scales with the largest distance in play; ``eig_tol`` is a
    fraction of the spectral radius below which eigenvalues count as zero.
    """

    rel_tol: float = 1e-9
    eig_tol: float = 1e-8

    def __post_init__(self):
        for name in ("rel_tol", "eig_tol"):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise ParameterError(f"{name} must lie in (0, 1), got {value!r}")


DEFAULT_TOL = ToleranceConfig()


def pair_list(n: int) -> list[tuple[int, int]]:
    """Pairs ``(i, j)`` with ``i < j`` in the fixed order (0,1),(0,2),...,(n-2,n-1)."""
    return list(itertools.combinations(range(n), 2))


def n_from_pair_count(count: int) -> int:
    """Invert ``N = n(n-1)/2``; raises if ``count`` is not triangular."""
    n = int(round((1 + np.sqrt(1 + 8 * count)) / 2))
    if n * (n - 1) // 2 != count:
        raise InputError(f"{count} is not of the form n(n-1)/2")
    return n


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """An n-point (pseudo)metric as a symmetric ``n x n`` float64 matrix.

    Construction only checks shape and finiteness; the metric axioms are
    checked by :func:`validate_metric` so that violations can be reported
    with witnesses instead of being rejected outright.
    """

    d: np.ndarray
    kind: str = METRIC
    n: int = field(init=False)

    def __post_init__(self):
        try:
            arr = np.array(self.d, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise InputError(f"distance matrix is not numeric: {exc}") from None
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InputError(f"distance matrix must be square, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise InputError("distance matrix must have at least one point")
        if not np.all(np.isfinite(arr)):
            raise InputError("distance matrix has non-finite entries")
        if self.kind not in (METRIC, PSEUDOMETRIC):
            raise InputError(f"kind must be 'metric' or 'pseudometric', got {self.kind!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "d", arr)
        object.__setattr__(self, "n", arr.shape[0])

    @classmethod
    def from_pairs(cls, entries: Sequence[float], kind: str = METRIC) -> "DistanceMatrix":
        """Build from the condensed vector in :func:`pair_list` order."""
        entries = list(entries)
        n = n_from_pair_count(len(entries))
        d = np.zeros((n, n))
        for (i, j), value in zip(pair_list(n), entries):
            d[i, j] = d[j, i] = value
        return cls(d, kind)

    def pairs(self) -> np.ndarray:
        """Condensed upper-triangle vector in :func:`pair_list` order."""
        iu = np.triu_indices(self.n, 1)
        return self.d[iu].copy()

    @property
    def scale(self) -> float:
        """Largest entry, or 1.0 for an all-zero matrix; used to scale tolerances."""
        top = float(np.max(np.abs(self.d))) if self.n > 1 else 0.0
        return top if top > 0 else 1.0

    def __eq__(self, other):
        if not isinstance(other, DistanceMatrix):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.d, other.d)

    __hash__ = None

    def __repr__(self):
        return f"DistanceMatrix(n={self.n}, kind={self.kind!r}, d={self.d.tolist()!r})"


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    axiom: Optional[str] = None
    witness: tuple[int, ...] = ()
    message: str = ""


def validate_metric(m: DistanceMatrix, cfg: ToleranceConfig = DEFAULT_TOL) -> ValidationReport:
    """Check the axioms for ``m.kind``; report the first violated one with indices."""
    d = m.d
    n = m.n
    tol = cfg.rel_tol * m.scale

    diag = np.abs(np.diag(d))
    bad = np.flatnonzero(diag > tol)
    if bad.size:
        i = int(bad[0])
        return ValidationReport(False, "zero-diagonal", (i,), f"d[{i}][{i}] = {d[i, i]!r} is not zero")

    asym = np.abs(d - d.T) > tol
    if asym.any():
        i, j = (int(v) for v in np.argwhere(asym)[0])
        return ValidationReport(False, "symmetry", (i, j), f"d[{i}][{j}] != d[{j}][{i}]")

    neg = d < -tol
    if neg.any():
        i, j = sorted(int(v) for v in np.argwhere(neg)[0])
        return ValidationReport(False, "nonnegativity", (i, j), f"d[{i}][{j}] is negative")

    if m.kind == METRIC and n > 1:
        off = d + np.eye(n) * (tol + 1.0)
        zero = off <= tol
        if zero.any():
            i, j = sorted(int(v) for v in np.argwhere(zero)[0])
            return ValidationReport(False, "positivity", (i, j), f"d[{i}][{j}] = 0 for distinct points")

    if n >= 3:
        # excess[i, j, k] = d[i,k] - d[i,j] - d[j,k]
        excess = d[:, None, :] - d[:, :, None] - d[None, :, :]
        hits = np.argwhere(excess > tol)
        if hits.size:
            i, j, k = (int(v) for v in hits[0])
            triple = tuple(sorted((i, j, k)))
            return ValidationReport(
                False,
                "triangle",
                triple,
                f"d[{i}][{k}] = {d[i, k]!r} exceeds d[{i}][{j}] + d[{j}][{k}] = {d[i, j] + d[j, k]!r}",
            )
    return ValidationReport(True)


def require_valid(m: DistanceMatrix, cfg: ToleranceConfig = DEFAULT_TOL) -> None:
    report = validate_metric(m, cfg)
    if not report.ok:
        raise InputError(f"invalid {m.kind}: {report.message}")


def snowflake(m: DistanceMatrix, theta: float) -> DistanceMatrix:
    """Return the metric ``d ** theta``; only ``0 < theta <= 1`` keeps the triangle inequality."""
    if not (0.0 < theta <= 1.0):
        raise ParameterError(f"snowflake exponent must lie in (0, 1], got {theta!r}")
    return DistanceMatrix(np.power(m.d, theta), m.kind)


def make_ultrametric(branching: int, depth: int, level_dists: Sequence[float]) -> DistanceMatrix:
    """Regular ultrametric on ``branching ** depth`` leaf addresses.

    Two points whose base-``branching`` addresses first differ at digit
    ``l`` (most significant first) are ``level_dists[l]`` apart.
    """
    if branching < 2 or depth < 1:
        raise ParameterError("need branching >= 2 and depth >= 1")
    levels = [float(x) for x in level_dists]
    if len(levels) != depth:
        raise ParameterError(f"need {depth} level distances, got {len(levels)}")
    if any(x <= 0 for x in levels) or any(a <= b for a, b in zip(levels, levels[1:])):
        raise ParameterError("level distances must be positive and strictly decreasing")
    count = branching**depth
    digits = np.array(
        [[(p // branching ** (depth - 1 - l)) % branching for l in range(depth)] for p in range(count)]
    )
    differ = digits[:, None, :] != digits[None, :, :]
    first = np.where(differ.any(axis=2), differ.argmax(axis=2), -1)
    d = np.where(first >= 0, np.asarray(levels)[np.maximum(first, 0)], 0.0)
    return DistanceMatrix(d)


def restrict(m: DistanceMatrix, subset: Iterable[int]) -> DistanceMatrix:
    """Induced sub-(pseudo)metric on ``subset`` (kept in the given order)."""
    idx = [int(i) for i in subset]
    if len(set(idx)) != len(idx):
        raise InputError(f"duplicate indices in subset {idx}")
    if any(i < 0 or i >= m.n for i in idx):
        raise InputError(f"subset {idx} has indices outside 0..{m.n - 1}")
    if not idx:
        raise InputError("subset must be nonempty")
    return DistanceMatrix(m.d[np.ix_(idx, idx)], m.kind)


def collapse(m: DistanceMatrix, cfg: ToleranceConfig = DEFAULT_TOL) -> tuple[DistanceMatrix, list[int]]:
    """Metric quotient of a pseudometric.

    Points closer than ``rel_tol * scale`` are merged (union-find over
    such pairs). Returns the quotient, whose point ``c`` is represented by
    the smallest original index of class ``c``, and the class id of every
    original point.
    """
    n = m.n
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tol = cfg.rel_tol * m.scale
    for i, j in zip(*np.nonzero(np.triu(m.d <= tol, 1))):
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = sorted({find(i) for i in range(n)})
    cls = {r: c for c, r in enumerate(roots)}
    classes = [cls[find(i)] for i in range(n)]
    return DistanceMatrix(m.d[np.ix_(roots, roots)], METRIC), classes


def is_isometric(
    a: DistanceMatrix, b: DistanceMatrix, cfg: ToleranceConfig = DEFAULT_TOL
) -> Optional[tuple[int, ...]]:
    """Lexicographically least bijection ``pi`` with ``a[i][j] == b[pi(i)][pi(j)]``, or None.

    Backtracking over images in increasing order; a candidate image must
    carry the same sorted row (distance profile) as the point it replaces.
    """
    if a.n != b.n:
        return None
    n = a.n
    tol = cfg.rel_tol * max(a.scale, b.scale)
    if not np.allclose(np.sort(a.pairs()), np.sort(b.pairs()), rtol=0, atol=tol):
        return None
    prof_a = np.sort(a.d, axis=1)
    prof_b = np.sort(b.d, axis=1)
    compatible = [
        [j for j in range(n) if np.all(np.abs(prof_a[i] - prof_b[j]) <= tol)] for i in range(n)
    ]
    perm: list[int] = []
    used = [False] * n

    def search(i):
        if i == n:
            return True
        for j in compatible[i]:
            if used[j]:
                continue
            if all(abs(a.d[i, k] - b.d[j, perm[k]]) <= tol for k in range(i)):
                perm.append(j)
                used[j] = True
                if search(i + 1):
                    return True
                perm.pop()
                used[j] = False
        return False

    return tuple(perm) if search(0) else None
