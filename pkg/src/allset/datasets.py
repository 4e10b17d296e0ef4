"""Bundled example data."""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .core_metric import DistanceMatrix


@dataclass(frozen=True)
class TwoTriples:
    """Six projective lines; ``triple_a`` and ``triple_b`` are isometric but not congruent."""

    matrix: DistanceMatrix
    vectors: np.ndarray
    triple_a: tuple[int, ...]
    triple_b: tuple[int, ...]


def rpn_triples() -> TwoTriples:
    raw = json.loads(resources.files("allset.data").joinpath("rpn_triples.json").read_text())
    mat = raw["matrix"]
    return TwoTriples(
        DistanceMatrix(mat["d"], mat["kind"]),
        np.asarray(raw["vectors"], float),
        tuple(raw["triple_a"]),
        tuple(raw["triple_b"]),
    )
