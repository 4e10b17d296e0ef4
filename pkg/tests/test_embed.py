import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import metric_classes, random_tree_metric

from allset import oracles
from allset.core_metric import DistanceMatrix, restrict
from allset.embed import (
    CIRCLE_MAX_POINTS,
    Circle,
    Euclidean,
    Hyperbolic,
    Sphere,
    TreeValence,
    embed,
    embed_circle,
    embed_euclidean,
    embed_hyperbolic,
    embed_sphere,
    embed_tree,
    witness_distances,
)
from allset.errors import InputError, ParameterError
from allset.tree import labeled_matrix, max_degree

SQRT2 = math.sqrt(2)
SQUARE = DistanceMatrix.from_pairs([1, SQRT2, 1, 1, SQRT2, 1])


def equilateral(k, r=1.0):
    return DistanceMatrix(r * (1 - np.eye(k)))


def realized(space, m, res):
    """Pairwise distances recomputed from the witness, in the original point order."""
    if isinstance(space, TreeValence):
        labels, lm = labeled_matrix(res.witness)
        pos = {int(lab): k for k, lab in enumerate(labels)}
        reps = [res.classes.index(c) for c in res.classes]
        order = [pos[r] for r in reps]
        return lm.d[np.ix_(order, order)]
    return witness_distances(space, res.witness)


# -- spaces ------------------------------------------------------------------------


def test_model_space_parameters_are_checked():
    for bad in (lambda: Euclidean(0), lambda: Sphere(1, 0.0), lambda: Hyperbolic(2, -1.0), lambda: Circle(0.0), lambda: TreeValence(1)):
        with pytest.raises(ParameterError):
            bad()


def test_invalid_matrix_is_an_input_error():
    with pytest.raises(InputError):
        embed_euclidean(DistanceMatrix.from_pairs([1, 3, 1]), 2)


# -- Euclidean -------------------------------------------------------------------------


def test_euclidean_examples():
    assert embed_euclidean(equilateral(3), 2).embeddable
    assert not embed_euclidean(equilateral(4), 2).embeddable
    assert embed_euclidean(equilateral(4), 3).embeddable
    res = embed_euclidean(SQUARE, 2)
    assert res.embeddable
    pts = np.array(res.witness)
    assert np.allclose(witness_distances(Euclidean(2), pts), SQUARE.d, atol=1e-12)
    # corners of a unit square: all four points on a circle of radius 1/sqrt2 about the centroid
    assert np.allclose(np.linalg.norm(pts - pts.mean(axis=0), axis=1), 1 / SQRT2)


def test_euclidean_certificate_names_eigenvalue():
    res = embed_euclidean(equilateral(4), 2)
    assert res.certificate.startswith("Gram matrix rank 3")
    res = embed_euclidean(DistanceMatrix.from_pairs([1, 1, 1, 1, 1, 1.9]), 3)
    assert not res.embeddable and "negative eigenvalue" in res.certificate


def test_euclidean_pseudometric_shares_coordinates():
    m = DistanceMatrix.from_pairs([0, 1, 1], kind="pseudometric")
    res = embed_euclidean(m, 1)
    assert res.embeddable and res.classes == [0, 0, 1]
    assert res.witness[0] == res.witness[1]


def test_marginal_flag_on_near_degenerate_triangle():
    # slightly bent line: the Gram matrix has a tiny but nonzero second eigenvalue
    m = DistanceMatrix.from_pairs([1.0, 2.0 - 2e-8, 1.0])
    res = embed_euclidean(m, 1)
    assert res.embeddable and res.marginal
    assert res.certificate.startswith("marginal")
    assert embed_euclidean(DistanceMatrix.from_pairs([1.0, 2.0, 1.0]), 1).marginal is False


# -- sphere --------------------------------------------------------------------------------


def test_sphere_examples():
    third = 2 * math.pi / 3
    res = embed_sphere(equilateral(3, third), 1, 1.0)
    assert res.embeddable
    assert np.allclose(witness_distances(Sphere(1), res.witness), equilateral(3, third).d, atol=1e-9)
    assert np.allclose(np.linalg.eigvalsh(np.cos(equilateral(3, third).d)), [0, 1.5, 1.5], atol=1e-12)
    for dim in (1, 2, 3, 5):
        assert not embed_sphere(equilateral(4, third), dim, 1.0).embeddable
    assert np.linalg.eigvalsh(np.cos(equilateral(4, third).d))[0] == pytest.approx(-0.5)
    assert embed_sphere(DistanceMatrix([[0, math.pi], [math.pi, 0]]), 1, 1.0).embeddable


def test_sphere_diameter_certificate():
    res = embed_sphere(DistanceMatrix([[0, 3.5], [3.5, 0]]), 2, 1.0)
    assert not res.embeddable and res.certificate.startswith("diameter exceeded")
    assert embed_sphere(DistanceMatrix([[0, 3.5], [3.5, 0]]), 2, 2.0).embeddable


def test_sphere_radius_scales():
    m = equilateral(3, 2 * math.pi / 3 * 5)
    res = embed_sphere(m, 1, 5.0)
    assert res.embeddable
    assert np.allclose(witness_distances(Sphere(1, 5.0), res.witness), m.d, atol=1e-9)


# -- hyperbolic ------------------------------------------------------------------------------


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.1, 5.0), min_size=3, max_size=3))
def test_every_triangle_is_hyperbolic(sides):
    a, b, c = sorted(sides)
    assume_valid = c <= a + b
    if not assume_valid:
        c = a + b
    m = DistanceMatrix.from_pairs([a, b, c])
    res = embed_hyperbolic(m, 2)
    assert res.embeddable
    assert np.allclose(witness_distances(Hyperbolic(2), res.witness), m.d, atol=1e-6)


def test_hyperbolic_examples():
    assert not embed_hyperbolic(equilateral(4), 2).embeddable
    assert embed_hyperbolic(equilateral(4), 3).embeddable
    for dist in (0.01, 1.0, 7.5):
        assert embed_hyperbolic(DistanceMatrix([[0, dist], [dist, 0]]), 1).embeddable


def test_hyperbolic_witness_on_hyperboloid():
    res = embed_hyperbolic(equilateral(4), 3, 2.0)
    x = np.array(res.witness) / 2.0
    assert np.allclose(x[:, 0] ** 2 - np.sum(x[:, 1:] ** 2, axis=1), 1.0)
    assert np.all(x[:, 0] > 0)


def test_hyperbolic_overflow_is_input_error():
    with pytest.raises(InputError):
        embed_hyperbolic(DistanceMatrix([[0, 1e4], [1e4, 0]]), 1)


# -- circle -------------------------------------------------------------------------------------


def test_circle_examples():
    res = embed_circle(equilateral(3), 3.0)
    assert res.embeddable and res.witness == [0.0, 1.0, 2.0]
    res = embed_circle(equilateral(3), 4.0)
    assert not res.embeddable and res.certificate == "no sign assignment realizes the arc distances"
    res = embed_circle(DistanceMatrix.from_pairs([1, 1, 2]), 100.0)
    assert res.embeddable and res.witness == [0.0, 1.0, 99.0]


def test_circle_half_circumference():
    res = embed_circle(DistanceMatrix([[0, 2.5], [2.5, 0]]), 4.0)
    assert res.certificate == "exceeds half circumference"
    assert embed_circle(DistanceMatrix([[0, 2.0], [2.0, 0]]), 4.0).embeddable


def test_circle_point_cap():
    n = CIRCLE_MAX_POINTS + 1
    d = np.array([[min(abs(i - j), n - abs(i - j)) for j in range(n)] for i in range(n)], float)
    with pytest.raises(ParameterError):
        embed_circle(DistanceMatrix(d), float(n))
    n = CIRCLE_MAX_POINTS
    d = np.array([[min(abs(i - j), n - abs(i - j)) for j in range(n)] for i in range(n)], float)
    assert embed_circle(DistanceMatrix(d), float(n)).embeddable


# -- trees -------------------------------------------------------------------------------------


def test_tree_examples():
    res = embed_tree(equilateral(3), 3)
    assert res.embeddable
    assert sorted(e.length for e in res.witness.edges) == [0.5, 0.5, 0.5]
    res = embed_tree(equilateral(4), 3)
    assert not res.embeddable and res.certificate == "degree 4 branch point required"
    assert embed_tree(equilateral(4), 4).embeddable
    for valence in (2, 3, 4, 10):
        res = embed_tree(SQUARE, valence)
        assert not res.embeddable and res.certificate.startswith("four-point condition fails at quadruple")


def test_tree_witness_labels_are_class_representatives():
    m = DistanceMatrix.from_pairs([1, 0, 1], kind="pseudometric")
    res = embed_tree(m, 2)
    assert res.embeddable and res.classes == [0, 1, 0]
    assert sorted(lab for lab, _ in res.witness.labeled()) == ["0", "1"]
    assert res.witness.valence_budget == 2


# -- properties ----------------------------------------------------------------------------------

SPACES = [Euclidean(1), Euclidean(2), Euclidean(3), Sphere(1), Sphere(2), Hyperbolic(1), Hyperbolic(2), Circle(3.0), Circle(4.0), TreeValence(3), TreeValence(4)]
SAMPLE = [m for n in (2, 3, 4) for m in metric_classes((0.5, 1.0, 1.5, 2.0), n)]


@pytest.mark.parametrize("space", SPACES, ids=repr)
def test_witness_round_trip(space):
    for m in SAMPLE:
        res = embed(m, space)
        if res.embeddable:
            assert np.allclose(realized(space, m, res), m.d, atol=10 * 1e-9 * max(1, m.scale) + 1e-7 * res.marginal)


@pytest.mark.parametrize(
    "small,large",
    [(Euclidean(1), Euclidean(2)), (Euclidean(2), Euclidean(3)), (Sphere(1), Sphere(2)), (Hyperbolic(1), Hyperbolic(2)), (TreeValence(2), TreeValence(3)), (TreeValence(3), TreeValence(4))],
    ids=repr,
)
def test_monotone_in_parameters(small, large):
    for m in SAMPLE + list(metric_classes((0.5, 1.0, 1.5, 2.0), 5)[::7]):
        if embed(m, small).embeddable:
            assert embed(m, large).embeddable


@pytest.mark.parametrize("space", SPACES, ids=repr)
def test_restriction_closure(space):
    rng = random.Random(11)
    for m in metric_classes((0.5, 1.0, 1.5, 2.0), 5)[::5]:
        if embed(m, space).embeddable:
            subset = sorted(rng.sample(range(5), rng.randint(1, 4)))
            assert embed(restrict(m, subset), space).embeddable


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 9), st.integers(2, 4), st.integers(0, 10**6))
def test_random_tree_metrics_embed_at_their_valence(n, valence, seed):
    m, t = random_tree_metric(random.Random(seed), n, valence, lengths=None)
    res = embed_tree(m, valence)
    assert res.embeddable
    assert max_degree(res.witness) <= valence
    assert oracles.tree_oracle(m, valence)


@pytest.mark.parametrize(
    "space,oracle",
    [
        (Euclidean(2), lambda m: oracles.fit_euclidean(m, 2).embeddable),
        (Sphere(2), lambda m: oracles.fit_sphere(m, 2).embeddable),
        (Hyperbolic(2), lambda m: oracles.fit_hyperbolic(m, 2).embeddable),
        (Circle(3.0), lambda m: oracles.fit_circle(m, 3.0).embeddable),
        (TreeValence(3), lambda m: oracles.tree_oracle(m, 3)),
    ],
    ids=repr,
)
def test_criterion_matches_oracle_on_four_points(space, oracle):
    for m in metric_classes((0.5, 1.0, 1.5, 2.0), 4):
        assert embed(m, space).embeddable == oracle(m), m.d.tolist()
