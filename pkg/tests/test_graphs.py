import numpy as np
import pytest

from mpgfrft.errors import InvalidParameterError
from mpgfrft.graphs import (
    Graph,
    build_cycle_graph,
    build_knn_graph,
    build_random_sensor_graph,
    is_connected,
    load_graph_csv,
    save_graph_csv,
    shift_operator,
)


def test_graph_rejects_nonzero_diagonal():
    W = np.eye(3)
    with pytest.raises(InvalidParameterError):
        Graph(n=3, weights=W)


def test_graph_rejects_nonfinite():
    W = np.zeros((2, 2))
    W[0, 1] = np.inf
    with pytest.raises(InvalidParameterError):
        Graph(n=2, weights=W)


def test_knn_graph_basic_structure():
    # four corners of a unit square, k=1: each node links to a closest corner
    pts = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=float)
    g = build_knn_graph(pts, 1, weight_scheme="binary")
    assert g.is_symmetric
    assert np.all(g.weights.sum(axis=1) >= 1)


def test_knn_tie_break_prefers_lower_index():
    # node 0 is equidistant from nodes 1 and 2; the stable sort keeps node 1
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [5.0, 0.0]])
    g = build_knn_graph(pts, 1, symmetrize=False, weight_scheme="binary")
    assert g.weights[0, 1] == 1.0
    assert g.weights[0, 2] == 0.0


def test_knn_requires_k_below_n():
    pts = np.zeros((3, 2))
    with pytest.raises(InvalidParameterError):
        build_knn_graph(pts, 3)


def test_gaussian_weights_in_unit_interval():
    rng = np.random.default_rng(0)
    g = build_knn_graph(rng.uniform(size=(12, 2)), 3)
    w = g.weights[g.weights > 0]
    assert np.all(w > 0) and np.all(w <= 1)


def test_cycle_graph_degree_two():
    g = build_cycle_graph(7)
    assert np.all(g.weights.sum(axis=1) == 2)
    assert g.is_symmetric


def test_cycle_graph_minimum_size():
    with pytest.raises(InvalidParameterError):
        build_cycle_graph(2)


def test_sensor_graph_connected_and_deterministic():
    g1 = build_random_sensor_graph(15, seed=4)
    g2 = build_random_sensor_graph(15, seed=4)
    assert is_connected(g1)
    np.testing.assert_array_equal(g1.weights, g2.weights)


def test_laplacian_rows_sum_to_zero():
    g = build_random_sensor_graph(10, seed=1)
    L = shift_operator(g, "laplacian").matrix
    np.testing.assert_allclose(L.sum(axis=1), 0, atol=1e-12)
    np.testing.assert_allclose(L, L.T)


def test_normalized_laplacian_spectrum_bounds():
    g = build_random_sensor_graph(12, seed=2)
    L = shift_operator(g, "normalized-laplacian").matrix
    w = np.linalg.eigvalsh(L)
    assert w.min() > -1e-10
    assert w.max() < 2 + 1e-10


def test_shift_operator_unknown_kind():
    g = build_cycle_graph(4)
    with pytest.raises(InvalidParameterError):
        shift_operator(g, "resistance")


def test_graph_csv_round_trip(tmp_path):
    g = build_random_sensor_graph(8, seed=5)
    path = tmp_path / "g.csv"
    save_graph_csv(g, path)
    g2 = load_graph_csv(path)
    np.testing.assert_array_equal(g.weights, g2.weights)
