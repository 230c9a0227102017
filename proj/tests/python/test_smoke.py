"""End-to-end smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import metricforge as mf


def triangle_points():
    return np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]])


def symmetric_deltas(values):
    m = 1 + max(max(i, j) for i, j in values)
    out = np.zeros((m, m))
    for (i, j), v in values.items():
        out[i, j] = out[j, i] = v
    return out


def test_version_and_capacity():
    assert mf.__version__ == "0.1.0"
    assert mf.capacity(45) == 10
    assert mf.capacity(1) == 2
    assert mf.pair_order(3) == [(0, 1), (0, 2), (1, 2)]
    with pytest.raises(ValueError):
        mf.capacity(0)


def test_forge_realizes_designated_distances():
    points = triangle_points()
    deltas = symmetric_deltas({(0, 1): 1.0, (0, 2): 2.0, (1, 2): 0.5})
    result = mf.forge(points, deltas)

    assert result["max_rel_error"] <= 1e-8
    sm = result["semimetric"]
    assert isinstance(sm, mf.Semimetric)
    assert sm.matrix.shape == (3, 3)
    assert not sm.scaled

    assert sm(points[0], points[1]) == pytest.approx(1.0, rel=1e-9)
    assert sm(points[0], points[2]) == pytest.approx(2.0, rel=1e-9)
    assert sm(points[1], points[2]) == pytest.approx(0.5, rel=1e-9)

    # Symmetric with zero self-distance, like any distance worth the name.
    assert sm(points[0], points[1]) == sm(points[1], points[0])
    assert sm(points[0], points[0]) == 0.0

    dm = sm.distance_matrix(points)
    assert dm.shape == (3, 3)
    assert dm[0, 1] == pytest.approx(1.0, rel=1e-9)
    assert np.all(np.diag(dm) == 0.0)


def test_forge_scaled_variant_is_euclidean_dominated():
    points = triangle_points()
    deltas = symmetric_deltas({(0, 1): 1.0, (0, 2): 2.0, (1, 2): 0.5})
    result = mf.forge(points, deltas, scaled=True)
    sm = result["semimetric"]
    assert sm.scaled
    root_alpha = math.sqrt(result["alpha"])
    assert sm(points[0], points[1]) == pytest.approx(root_alpha, rel=1e-8)

    rng = np.random.default_rng(7)
    h = sm.matrix.shape[0]
    for _ in range(100):
        x = rng.standard_normal(h)
        assert x @ sm.matrix @ x <= x @ x * (1 + 1e-10)


def test_forge_rejects_asymmetric_deltas():
    points = triangle_points()
    deltas = symmetric_deltas({(0, 1): 1.0, (0, 2): 2.0, (1, 2): 0.5})
    deltas[0, 1] = 3.0  # break the symmetry
    with pytest.raises(ValueError):
        mf.forge(points, deltas)


def test_check_axioms_euclidean_is_a_metric():
    rng = np.random.default_rng(11)
    points = rng.standard_normal((10, 2))
    report = mf.check_axioms(lambda x, y: float(np.linalg.norm(x - y)), points)
    assert report["classification"] == "metric"
    assert report["identity_defect"] == 0.0
    assert report["positivity_violations"] == 0
    assert report["exhaustive"]


def test_check_axioms_accepts_a_semimetric_object():
    points = triangle_points()
    deltas = symmetric_deltas({(0, 1): 1.0, (0, 2): 2.0, (1, 2): 0.5})
    sm = mf.forge(points, deltas, scaled=True)["semimetric"]
    rng = np.random.default_rng(13)
    sample = rng.standard_normal((15, 2))
    report = mf.check_axioms(sm, sample, eps=sm.eps)
    assert report["identity_defect"] == 0.0
    assert report["asymmetry_defect"] == 0.0
    assert report["triangle_defect"] <= sm.eps


def test_attack_kmeans_recovers_labels():
    rng = np.random.default_rng(17)
    points = rng.standard_normal((10, 2))
    labels = [1, 2, 3, 1, 2, 3, 1, 2, 3, 1]
    report = mf.attack("kmeans", points, labels)
    assert report["success"]
    assert report["recovered"] == labels
    assert report["realized_max_rel_error"] <= 1e-8
    assert report["separation"]["ratio"] == pytest.approx(
        report["delta_large"] / report["delta_small"], rel=1e-6
    )


def test_attack_dbscan_recovers_partition():
    rng = np.random.default_rng(19)
    points = rng.standard_normal((10, 2))
    labels = [1, 1, 1, 2, 2, 2, 3, 3, 3, 3]
    report = mf.attack("dbscan", points, labels)
    assert report["success"]
    assert report["bijection"] is not None
    assert report["min_pts"] == 2


def test_clustering_primitives_with_custom_distance():
    points = np.array([[0.0], [1.0], [10.0], [11.0]])
    centers = np.array([[0.5], [10.5]])
    labels, final_centers, empty_events = mf.kmeans(
        points, centers, lambda x, y: float(np.linalg.norm(x - y))
    )
    assert labels == [0, 0, 1, 1]
    assert empty_events == 0
    assert final_centers[0, 0] == pytest.approx(0.5)

    db_labels, n_clusters = mf.dbscan(
        points, 1.5, 2, lambda x, y: float(np.linalg.norm(x - y))
    )
    assert db_labels == [1, 1, 2, 2]
    assert n_clusters == 2


def test_capacity_errors_surface_as_python_exceptions():
    points = np.array([[0.0, 0.0], [1.0, 0.0]])
    deltas = symmetric_deltas({(0, 1): 1.0})
    with pytest.raises(ArithmeticError):
        mf.forge(points, deltas)  # C(2,2) = 1 below the point dimension 2
