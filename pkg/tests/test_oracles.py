"""Sanity checks on the independent oracles used to cross-validate the criteria."""
import math
import random

import numpy as np

from helpers import random_tree_metric

from allset import oracles
from allset.core_metric import DistanceMatrix


def equilateral(k, r=1.0):
    return DistanceMatrix(r * (1 - np.eye(k)))


def test_euclidean_fit_examples():
    assert oracles.fit_euclidean(equilateral(3), 2).embeddable
    assert not oracles.fit_euclidean(equilateral(4), 2).embeddable
    assert oracles.fit_euclidean(equilateral(4), 3).embeddable
    r = oracles.fit_euclidean(DistanceMatrix.from_pairs([1, 2, 1]), 1)
    assert r.embeddable and r.residual < 1e-10
    assert not oracles.fit_euclidean(DistanceMatrix.from_pairs([1, 1, 1]), 1).embeddable


def test_sphere_fit_examples():
    third = 2 * math.pi / 3
    assert oracles.fit_sphere(equilateral(3, third), 1).embeddable
    assert not oracles.fit_sphere(equilateral(4, third), 2).embeddable
    r = oracles.fit_sphere(equilateral(4, third), 1)
    assert not r.embeddable and r.residual > 1e-3


def test_hyperbolic_fit_examples():
    assert oracles.fit_hyperbolic(DistanceMatrix.from_pairs([1, 1, 1]), 2).embeddable
    assert not oracles.fit_hyperbolic(equilateral(4), 2).embeddable
    assert not oracles.fit_hyperbolic(DistanceMatrix.from_pairs([1, 1, 1]), 1).embeddable


def test_circle_fit_examples():
    assert oracles.fit_circle(equilateral(3), 3.0).embeddable
    assert not oracles.fit_circle(equilateral(3), 4.0).embeddable


def test_fit_coordinates_reproduce_distances():
    m = DistanceMatrix.from_pairs([1, 2 ** 0.5, 1, 1, 2 ** 0.5, 1])
    r = oracles.fit_euclidean(m, 2)
    x = np.asarray(r.coords)
    d = np.linalg.norm(x[:, None] - x[None, :], axis=2)
    assert np.allclose(d, m.d, atol=1e-6)


def test_neighbor_joining_recovers_tree_metrics():
    rng = random.Random(3)
    for _ in range(50):
        m, _ = random_tree_metric(rng, rng.randint(2, 10), 3)
        count, edges = oracles.neighbor_joining(m.d)
        assert count >= m.n
        assert all(length > -1e-9 for _, _, length in edges)
        assert oracles.tree_oracle(m, 3)


def test_tree_oracle_rejects_square_and_counts_degree():
    square = DistanceMatrix.from_pairs([1, 2 ** 0.5, 1, 1, 2 ** 0.5, 1])
    assert not oracles.tree_oracle(square, 10)
    assert not oracles.tree_oracle(equilateral(4), 3)
    assert oracles.tree_oracle(equilateral(4), 4)
    assert oracles.tree_oracle(DistanceMatrix.from_pairs([1, 2, 1]), 2)


def test_isometry_group_bruteforce_examples():
    assert len(oracles.isometry_group_bruteforce(equilateral(3))) == 6
    assert oracles.isometry_group_bruteforce(DistanceMatrix.from_pairs([1, 2, 1])) == [(0, 1, 2), (2, 1, 0)]


def test_homogeneous_bruteforce_examples():
    assert oracles.homogeneous_bruteforce(equilateral(4))
    assert not oracles.homogeneous_bruteforce(DistanceMatrix.from_pairs([1, 2, 1]))


def test_coloring_clique_bruteforce():
    pentagon = [[-1 if i == j else (0 if (j - i) % 5 in (1, 4) else 1) for j in range(5)] for i in range(5)]
    assert oracles.coloring_max_clique_bruteforce(5, pentagon) == 2
    mono = [[-1 if i == j else 0 for j in range(4)] for i in range(4)]
    assert oracles.coloring_max_clique_bruteforce(4, mono) == 4
