"""Fingerprints: the distance vectors realized by n-point configurations.

A configuration of n points is encoded by its N = n(n-1)/2 pairwise
distances in the order (0,1), (0,2), ..., (0,n-1), (1,2), ..., (n-2,n-1).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core_metric import DEFAULT_TOL, DistanceMatrix, ToleranceConfig, n_from_pair_count, pair_list, validate_metric
from .embed import EmbedResult, ModelSpace, TreeValence, embed
from .errors import InputError, ParameterError
from .homog import distance_classes

_MAX_TUPLES = 2_000_000


@dataclass(frozen=True)
class FingerprintVector:
    n: int
    entries: tuple[float, ...]

    def __post_init__(self):
        entries = tuple(float(x) for x in self.entries)
        object.__setattr__(self, "entries", entries)
        if self.n < 1 or len(entries) != self.n * (self.n - 1) // 2:
            raise InputError(f"{len(entries)} entries do not fit n = {self.n}")
        if not all(np.isfinite(x) and x >= 0 for x in entries):
            raise InputError("entries must be finite and nonnegative")

    @classmethod
    def from_entries(cls, entries: Sequence[float]) -> "FingerprintVector":
        return cls(n_from_pair_count(len(entries)), tuple(entries))

    def matrix(self, kind: str = "pseudometric") -> DistanceMatrix:
        return DistanceMatrix.from_pairs(self.entries, kind=kind) if self.n > 1 else DistanceMatrix([[0.0]], kind)


@dataclass(frozen=True)
class FingerprintSet:
    n: int
    vectors: tuple[FingerprintVector, ...]

    def as_array(self) -> np.ndarray:
        return np.array([v.entries for v in self.vectors], float).reshape(len(self.vectors), -1)

    def __len__(self):
        return len(self.vectors)

    def __contains__(self, v: FingerprintVector) -> bool:
        return v in self.vectors


def _snapped(m: DistanceMatrix, cfg: ToleranceConfig) -> np.ndarray:
    """Replace each entry by the smallest value of its tolerance class."""
    cls = distance_classes(m, cfg)
    flat_cls, flat_d = cls.ravel(), m.d.ravel()
    rep = np.full(int(flat_cls.max()) + 1, np.inf)
    np.minimum.at(rep, flat_cls, flat_d)
    rep[0] = 0.0
    return rep[cls]


def fingerprint_finite(
    m: DistanceMatrix, n: int, mode: str = "tuples", cfg: ToleranceConfig = DEFAULT_TOL
) -> FingerprintSet:
    """All distance vectors of n-point configurations drawn from ``m``.

    ``tuples`` allows repeated points (so vectors may contain zeros);
    ``injective`` uses distinct points in every order. Vectors whose
    entries agree up to the tolerance are merged; the result is sorted.
    """
    if mode not in ("tuples", "injective"):
        raise ParameterError(f"unknown mode {mode!r}")
    if n < 2:
        raise ParameterError("n must be at least 2")
    if mode == "injective" and n > m.n:
        raise ParameterError(f"n = {n} exceeds the {m.n} available points")
    count = m.n**n if mode == "tuples" else int(np.prod(range(m.n - n + 1, m.n + 1)))
    if count > _MAX_TUPLES:
        raise ParameterError(f"{count} configurations exceed the enumeration cap {_MAX_TUPLES}")
    if mode == "tuples":
        idx = np.array(list(itertools.product(range(m.n), repeat=n)), dtype=np.intp)
    else:
        idx = np.array(list(itertools.permutations(range(m.n), n)), dtype=np.intp)
    d = _snapped(m, cfg)
    ii, jj = np.array(pair_list(n)).T
    vecs = np.unique(d[idx[:, ii], idx[:, jj]], axis=0)
    return FingerprintSet(n, tuple(FingerprintVector(n, tuple(row)) for row in vecs))


def canonicalize(v: FingerprintVector) -> FingerprintVector:
    """Lexicographically least vector among all relabelings of the points."""
    if v.n <= 1:
        return v
    d = v.matrix().d
    ii, jj = np.array(pair_list(v.n)).T
    perms = np.array(list(itertools.permutations(range(v.n))), dtype=np.intp)
    cand = d[perms[:, ii], perms[:, jj]]
    best = cand[np.lexsort(cand.T[::-1])[0]]
    return FingerprintVector(v.n, tuple(best))


@dataclass(frozen=True)
class Membership:
    member: bool
    certificate: Optional[str]
    result: Optional[EmbedResult] = None


def member(v: FingerprintVector, space: ModelSpace, cfg: ToleranceConfig = DEFAULT_TOL) -> Membership:
    """Whether the configuration ``v`` occurs in ``space`` (collapsing coincident points first)."""
    m = v.matrix("pseudometric")
    report = validate_metric(m, cfg)
    if not report.ok:
        return Membership(False, "not a pseudometric")
    res = embed(m, space, cfg)
    return Membership(res.embeddable, res.certificate, res)


def comb_vector(m_valence: int, k: int, eps: float) -> FingerprintVector:
    """Distances ``1 - 2*eps*min(i, j)`` (points numbered from 1) of k comb teeth.

    The tips sit on teeth of height ``1/2 - eps*i`` hanging off a spine at
    positions ``eps*i``, a valence-3 tree, so the vector lies in the
    fingerprint of every valence >= 3 tree.
    """
    if m_valence < 3:
        raise ParameterError("the comb needs valence at least 3")
    if k < 2:
        raise ParameterError("k must be at least 2")
    if not 0 < eps < 1 / (2 * k):
        raise ParameterError(f"eps must lie in (0, 1/(2k)) = (0, {1 / (2 * k):g})")
    return FingerprintVector(k, tuple(1 - 2 * eps * min(i, j) for i, j in itertools.combinations(range(1, k + 1), 2)))


@dataclass(frozen=True)
class NonclosedReport:
    valence: int
    k: int
    eps: tuple[float, ...]
    vectors: tuple[FingerprintVector, ...]
    members: tuple[bool, ...]
    limit: FingerprintVector
    limit_member: bool
    limit_certificate: Optional[str]
    gaps: tuple[float, ...]
    gap_exhibited: bool
    message: str


def nonclosed_demo(
    m_valence: int = 3, k: int = 4, eps_list: Sequence[float] = (0.1, 0.01, 0.001), cfg: ToleranceConfig = DEFAULT_TOL
) -> NonclosedReport:
    """Comb vectors converging to the all-ones vector, with memberships and sup-norm gaps.

    When every comb vector is in the fingerprint of the valence tree and
    the limit is not, the fingerprint is not closed.
    """
    eps = tuple(float(e) for e in eps_list)
    if not eps:
        raise ParameterError("eps list is empty")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ParameterError("eps list must be strictly decreasing")
    space = TreeValence(m_valence)
    vectors = tuple(comb_vector(m_valence, k, e) for e in eps)
    members = tuple(member(v, space, cfg).member for v in vectors)
    limit = FingerprintVector(k, (1.0,) * (k * (k - 1) // 2))
    lim = member(limit, space, cfg)
    gaps = tuple(float(np.max(np.abs(np.subtract(limit.entries, v.entries)))) for v in vectors)
    exhibited = all(members) and not lim.member
    if exhibited:
        message = f"limit of member vectors is not a member: fingerprint {k} of the valence-{m_valence} tree is not closed"
    else:
        message = "no gap exhibited"
    return NonclosedReport(m_valence, k, eps, vectors, members, limit, lim.member, lim.certificate, gaps, exhibited, message)
