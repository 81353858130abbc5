"""Graph construction and graph shift operators.

Graphs are dense-matrix backed and immutable after construction. All
randomized builders take an explicit seed and use numpy's PCG64
generator, so outputs are reproducible across runs on one platform.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConstructionFailedError, InvalidParameterError
from .validation import check_positive_int

SHIFT_KINDS = ("adjacency", "weighted-adjacency", "laplacian", "normalized-laplacian")


@dataclass(frozen=True)
class Graph:
    """Weighted graph on n nodes. ``weights`` is the N x N adjacency W with zero diagonal."""

    n: int
    weights: np.ndarray
    coords: np.ndarray | None = None

    def __post_init__(self):
        W = np.asarray(self.weights, dtype=float)
        if W.shape != (self.n, self.n):
            raise InvalidParameterError(f"weights must be {self.n}x{self.n}")
        if not np.all(np.isfinite(W)):
            raise InvalidParameterError("weights contain non-finite entries")
        if np.any(np.diag(W) != 0.0):
            raise InvalidParameterError("diagonal of weights must be zero")
        object.__setattr__(self, "weights", W)

    @property
    def is_symmetric(self):
        return np.array_equal(self.weights, self.weights.T)


@dataclass(frozen=True)
class ShiftOperator:
    """A graph shift operator matrix tagged with its kind."""

    matrix: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in SHIFT_KINDS:
            raise InvalidParameterError(f"unknown shift kind {self.kind!r}")


def _pairwise_distances(points):
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


def build_knn_graph(points, k, symmetrize=True, weight_scheme="gaussian", theta=None):
    """k-nearest-neighbor graph over coordinate vectors.

    Ties in distance are broken toward the lower node index, so the
    construction is deterministic. Gaussian weights use
    w_ij = exp(-d_ij^2 / theta^2) with theta defaulting to the mean
    pairwise distance of the point set.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    if n == 0:
        raise InvalidParameterError("points must be non-empty")
    k = check_positive_int(k, "k")
    if k >= n:
        raise InvalidParameterError(f"k ({k}) must be smaller than the number of points ({n})")
    if weight_scheme not in ("binary", "gaussian"):
        raise InvalidParameterError(f"unknown weight scheme {weight_scheme!r}")

    d = _pairwise_distances(points)
    if weight_scheme == "gaussian":
        if theta is None:
            off = d[~np.eye(n, dtype=bool)]
            theta = off.mean()
        if theta <= 0:
            raise InvalidParameterError("theta must be positive")

    W = np.zeros((n, n))
    for i in range(n):
        # stable argsort keeps lower indices first among equal distances
        order = np.argsort(d[i], kind="stable")
        neighbors = [j for j in order if j != i][:k]
        for j in neighbors:
            W[i, j] = 1.0 if weight_scheme == "binary" else np.exp(-d[i, j] ** 2 / theta**2)
    if symmetrize:
        W = np.maximum(W, W.T)
    return Graph(n=n, weights=W, coords=points)


def build_cycle_graph(n):
    """Undirected cycle on n >= 3 nodes with unit weights."""
    n = check_positive_int(n, "n")
    if n < 3:
        raise InvalidParameterError("cycle graph needs n >= 3")
    W = np.zeros((n, n))
    idx = np.arange(n)
    W[idx, (idx + 1) % n] = 1.0
    W[(idx + 1) % n, idx] = 1.0
    return Graph(n=n, weights=W)


def is_connected(graph):
    """Breadth-first search connectivity over nonzero weights (treated as undirected)."""
    W = graph.weights
    n = graph.n
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        i = stack.pop()
        for j in np.nonzero((W[i] != 0) | (W[:, i] != 0))[0]:
            if not seen[j]:
                seen[j] = True
                stack.append(j)
    return bool(seen.all())


def build_random_sensor_graph(n, seed, k=4, max_retries=100):
    """Random connected sensor graph: uniform points in the unit square,
    gaussian-weighted k-NN, symmetrized. Retries with incremented seed
    until connected."""
    n = check_positive_int(n, "n", minimum=2)
    k_eff = min(k, n - 1)
    for attempt in range(max_retries):
        rng = np.random.default_rng(seed + attempt)
        points = rng.uniform(0.0, 1.0, size=(n, 2))
        g = build_knn_graph(points, k_eff, symmetrize=True, weight_scheme="gaussian")
        if is_connected(g):
            return g
    raise ConstructionFailedError(
        f"no connected sensor graph after {max_retries} retries (n={n}, seed={seed})"
    )


def shift_operator(graph, kind="laplacian"):
    """Build a shift operator matrix of the requested kind from a graph."""
    W = graph.weights
    if kind in ("adjacency", "weighted-adjacency"):
        return ShiftOperator(matrix=W.copy(), kind=kind)
    deg = W.sum(axis=1)
    if kind == "laplacian":
        return ShiftOperator(matrix=np.diag(deg) - W, kind=kind)
    if kind == "normalized-laplacian":
        with np.errstate(divide="ignore"):
            dinv = np.where(deg > 0, 1.0 / np.sqrt(deg), 0.0)
        L = np.eye(graph.n) - dinv[:, None] * W * dinv[None, :]
        # isolated nodes keep a zero row/column instead of the identity entry
        L[deg == 0, :] = 0.0
        L[:, deg == 0] = 0.0
        return ShiftOperator(matrix=L, kind=kind)
    raise InvalidParameterError(f"unknown shift kind {kind!r}")


def save_graph_csv(graph, path):
    np.savetxt(path, graph.weights, delimiter=",", fmt="%.17g")


def load_graph_csv(path):
    W = np.loadtxt(path, delimiter=",", ndmin=2)
    return Graph(n=W.shape[0], weights=W)


def graph_descriptor(n, kind, seed=None, k=None, weight_scheme=None):
    """JSON descriptor for a generated graph."""
    return json.dumps(
        {"n": n, "kind": kind, "seed": seed, "k": k, "weight_scheme": weight_scheme}
    )
