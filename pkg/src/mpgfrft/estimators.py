"""Scikit-learn style estimator wrappers around the functional core.

The transformers operate on arrays of shape (n_samples, n_nodes): each
row is one graph signal. Hyperparameters stay untouched in __init__ and
all fitted state carries the trailing-underscore convention, so the
wrappers compose with sklearn pipelines and clone().
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import spectral
from .errors import InvalidParameterError
from .learn import TrainConfig, train_compression_orders, train_order_and_filter


def _rows(X, n):
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n:
        raise InvalidParameterError(f"X must be (n_samples, {n}), got {X.shape}")
    return X


class FractionalGraphTransformer(BaseEstimator, TransformerMixin):
    """Fixed-order fractional graph transform as a transformer.

    Parameters
    ----------
    shift : array-like, the graph shift operator matrix.
    kind : "gfrft", "mpgfrft_i" or "mpgfrft_ii".
    orders : scalar or length-N order vector.
    """

    def __init__(self, shift=None, kind=spectral.KIND_I, orders=1.0):
        self.shift = shift
        self.kind = kind
        self.orders = orders

    def fit(self, X=None, y=None):
        if self.shift is None:
            raise InvalidParameterError("shift operator matrix is required")
        self.basis_ = spectral.gft_basis(np.asarray(self.shift))
        op = spectral.build_operator(self.basis_, self.kind, self.orders)
        self.operator_ = op.matrix
        self.inverse_operator_ = spectral.inverse_operator_matrix(op)
        self.n_features_in_ = self.basis_.n
        return self

    def transform(self, X):
        check_is_fitted(self, "operator_")
        X = _rows(X, self.n_features_in_)
        return (self.operator_ @ X.T.astype(complex)).T

    def inverse_transform(self, X):
        check_is_fitted(self, "inverse_operator_")
        X = _rows(X, self.n_features_in_)
        return (self.inverse_operator_ @ X.T.astype(complex)).T


class SpectralDenoiser(BaseEstimator):
    """Learnable spectral denoiser: fit() trains the order vector (and
    optionally a diagonal filter) against clean references, predict()
    filters new signals with the learned parameters."""

    def __init__(
        self,
        shift=None,
        kind=spectral.KIND_I,
        filter_mode="learnable",
        sparsity=None,
        a_init=0.5,
        learning_rate=0.005,
        epochs=300,
        seed=0,
    ):
        self.shift = shift
        self.kind = kind
        self.filter_mode = filter_mode
        self.sparsity = sparsity
        self.a_init = a_init
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, y):
        """X: noisy signals (n_samples, N); y: clean references."""
        if self.shift is None:
            raise InvalidParameterError("shift operator matrix is required")
        self.basis_ = spectral.gft_basis(np.asarray(self.shift))
        n = self.basis_.n
        X = _rows(X, n)
        y = _rows(y, n)
        if X.shape != y.shape:
            raise InvalidParameterError("X and y must have matching shapes")
        cfg = TrainConfig(learning_rate=self.learning_rate, epochs=self.epochs, seed=self.seed)
        # train on the concatenated sample mean signal pair by pair,
        # averaging gradients implicitly via sequential refinement
        a = np.full(n, float(self.a_init))
        h = None
        for noisy, clean in zip(X, y):
            res = train_order_and_filter(
                self.basis_,
                self.kind,
                noisy,
                clean,
                self.filter_mode,
                a,
                cfg,
                sparsity=self.sparsity,
                h_init=h,
            )
            a = np.asarray(res.final_orders, dtype=float)
            h = res.final_filter if self.filter_mode == "learnable" else None
        self.orders_ = a
        self.filter_ = res.final_filter
        self.loss_history_ = res.loss_history
        self.n_features_in_ = n
        return self

    def predict(self, X):
        check_is_fitted(self, "orders_")
        X = _rows(X, self.n_features_in_)
        op = spectral.build_operator(self.basis_, self.kind, self.orders_)
        tinv = spectral.inverse_operator_matrix(op)
        out = (tinv @ (self.filter_[:, None] * (op.matrix @ X.T.astype(complex)))).T
        return out


class LearnedCompressor(BaseEstimator, TransformerMixin):
    """Order-learning compressor: fit() maximizes the spectral energy in
    the top-[rN] coefficients of a training signal, transform()
    compresses signals with the learned operator."""

    def __init__(
        self,
        shift=None,
        kind=spectral.KIND_I,
        ratio=0.3,
        a_init=0.5,
        learning_rate=0.005,
        epochs=500,
        seed=0,
    ):
        self.shift = shift
        self.kind = kind
        self.ratio = ratio
        self.a_init = a_init
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, y=None):
        from .compression import compress

        if self.shift is None:
            raise InvalidParameterError("shift operator matrix is required")
        self.basis_ = spectral.gft_basis(np.asarray(self.shift))
        n = self.basis_.n
        X = _rows(X, n)
        cfg = TrainConfig(learning_rate=self.learning_rate, epochs=self.epochs, seed=self.seed)
        res = train_compression_orders(
            self.basis_, self.kind, X[0], self.ratio, np.full(n, float(self.a_init)), cfg
        )
        self.orders_ = np.asarray(res.final_orders, dtype=float)
        op = spectral.build_operator(self.basis_, self.kind, self.orders_)
        self.operator_ = op.matrix
        self.inverse_operator_ = spectral.inverse_operator_matrix(op)
        self.n_features_in_ = n
        self._compress = compress
        return self

    def transform(self, X):
        """Return the reconstructions after top-[rN] truncation."""
        check_is_fitted(self, "operator_")
        X = _rows(X, self.n_features_in_)
        out = np.empty(X.shape, dtype=complex)
        self.reports_ = []
        for i, x in enumerate(X):
            out[i], report = self._compress(self.operator_, self.inverse_operator_, x, self.ratio)
            self.reports_.append(report)
        return out
