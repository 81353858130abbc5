"""Gradient-descent machinery and the order-vector training loops.

Three loops live here: multi-layer transform learning (type I only,
thanks to index additivity), joint order/filter learning for spectral
denoising, and sparsity-driven order learning for compression. All
parameters are unconstrained reals; complex losses reduce through
squared moduli so gradients stay real.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .errors import DivergedError, InvalidParameterError, UnsupportedKindError
from .spectral import KIND_GFRFT, KIND_I, KIND_II
from .validation import as_order_vector, as_vector

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class TrainConfig:
    learning_rate: float = 0.005
    epochs: int = 1000
    seed: int = 0
    optimizer: str = "adam"
    activation: str = "identity"
    log_every: int = 1

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise InvalidParameterError("learning_rate must be positive")
        if self.epochs < 1:
            raise InvalidParameterError("epochs must be >= 1")
        if self.optimizer not in ("adam", "sgd"):
            raise InvalidParameterError(f"unknown optimizer {self.optimizer!r}")
        if self.activation not in ("identity", "tanh"):
            raise InvalidParameterError(f"unknown activation {self.activation!r}")


@dataclass
class AdamState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, n):
        return cls(first_moment=np.zeros(n), second_moment=np.zeros(n))


def adam_step(params, grads, state, learning_rate):
    """One Adam update with bias correction; returns (params, state)."""
    grads = np.asarray(grads, dtype=float)
    if not np.all(np.isfinite(grads)):
        raise DivergedError("non-finite gradient")
    if grads.shape != np.shape(params):
        raise InvalidParameterError("params and grads must have matching length")
    state.step += 1
    state.first_moment = ADAM_BETA1 * state.first_moment + (1 - ADAM_BETA1) * grads
    state.second_moment = ADAM_BETA2 * state.second_moment + (1 - ADAM_BETA2) * grads**2
    m_hat = state.first_moment / (1 - ADAM_BETA1**state.step)
    v_hat = state.second_moment / (1 - ADAM_BETA2**state.step)
    params = params - learning_rate * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
    return params, state


class _Optimizer:
    """Adam or plain gradient descent over a flat parameter vector."""

    def __init__(self, n, cfg):
        self.cfg = cfg
        self.state = AdamState.zeros(n) if cfg.optimizer == "adam" else None

    def update(self, params, grads, lr=None):
        lr = self.cfg.learning_rate if lr is None else lr
        if self.state is not None:
            params, self.state = adam_step(params, grads, self.state, lr)
            return params
        grads = np.asarray(grads, dtype=float)
        if not np.all(np.isfinite(grads)):
            raise DivergedError("non-finite gradient")
        return params - lr * grads


def mse_loss(y_hat, y):
    """Mean squared modulus of the difference."""
    y_hat = np.asarray(y_hat)
    y = np.asarray(y)
    if y_hat.shape != y.shape:
        raise InvalidParameterError("mse_loss inputs must have equal length")
    d = y_hat - y
    return float(np.mean(np.abs(d) ** 2))


def _activation(cfg_or_name):
    name = cfg_or_name.activation if isinstance(cfg_or_name, TrainConfig) else cfg_or_name
    if name == "identity":
        return lambda z: z, lambda z: np.ones_like(z)
    return np.tanh, lambda z: 1 - np.tanh(z) ** 2


def loss_grad_wrt_orders(basis, kind, a, upstream_grad, x, activation="identity"):
    """Real gradient of a scalar loss with respect to the order vector.

    ``upstream_grad`` is the (complex) gradient of the loss with respect
    to the layer output, i.e. g such that dL = Re(g^H dz). Entry k of
    the result is Re(g^H phi'(F^a x) * (dF^a/da_k) x).
    """
    a = as_order_vector(a, basis.n)
    upstream = as_vector(upstream_grad, basis.n, name="upstream_grad").astype(complex)
    x = as_vector(x, basis.n, name="x").astype(complex)
    cols = spectral.grad_apply(basis, kind, a, x)
    if activation != "identity":
        _, dphi = _activation(activation)
        pre = spectral.build_operator(basis, kind, a).matrix @ x
        cols = cols * dphi(pre)[:, None]
    return np.real(upstream.conj() @ cols)


@dataclass
class LearnResult:
    final_orders: object  # ndarray or list of ndarrays (per layer)
    final_filter: np.ndarray | None
    loss_history: list
    metrics: dict = field(default_factory=dict)
    order_history: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def to_json(self):
        orders = self.final_orders
        if isinstance(orders, np.ndarray):
            orders = orders.tolist()
        else:
            orders = [np.asarray(o).tolist() for o in orders]
        return json.dumps(
            {
                "orders": orders,
                "filter": None if self.final_filter is None else self.final_filter.tolist(),
                "loss_history": [float(v) for v in self.loss_history],
                "metrics": {k: float(v) for k, v in self.metrics.items()},
            }
        )


def train_transform_layers(basis, x, a_ori, layer_inits, cfg):
    """Learn per-layer order vectors so the stacked type-I transforms
    reproduce the target transform of x.

    The target is y = F^{a_ori} x; the loss is the MSE between the
    layered output and y. Only type I supports layering (additivity).
    """
    n = basis.n
    x = as_vector(x, n, name="x").astype(complex)
    a_ori = as_order_vector(a_ori, n)
    layers = [as_order_vector(a, n).copy() for a in layer_inits]
    if not layers:
        raise InvalidParameterError("need at least one layer")
    num_layers = len(layers)

    target = spectral.mpgfrft_i(basis, a_ori).matrix @ x
    phi, dphi = _activation(cfg)

    opt = _Optimizer(num_layers * n, cfg)
    loss_history = []
    order_history = []
    for epoch in range(cfg.epochs):
        # forward, keeping per-layer inputs and pre-activations
        inputs = [x]
        pres = []
        ops = []
        for a in layers:
            op = spectral.mpgfrft_i(basis, a)
            ops.append(op)
            pre = op.matrix @ inputs[-1]
            pres.append(pre)
            inputs.append(phi(pre))
        y_hat = inputs[-1]
        loss = mse_loss(y_hat, target)
        loss_history.append(loss)

        # backward: u carries dL = Re(u^H dz) through each layer
        u = (2.0 / n) * (y_hat - target)
        grads = np.empty((num_layers, n))
        for li in range(num_layers - 1, -1, -1):
            u_pre = u * dphi(pres[li]).conj()
            cols = spectral.grad_apply(basis, KIND_I, layers[li], inputs[li])
            grads[li] = np.real(u_pre.conj() @ cols)
            u = ops[li].matrix.conj().T @ u_pre

        flat = opt.update(np.concatenate(layers), grads.ravel())
        layers = [flat[i * n : (i + 1) * n] for i in range(num_layers)]
        if epoch % cfg.log_every == 0:
            order_history.append(
                {
                    "epoch": epoch,
                    "layers": [layer.copy() for layer in layers],
                    "sum": np.sum(layers, axis=0),
                    "loss": loss,
                }
            )

    total = np.sum(layers, axis=0)
    metrics = {
        "final_loss": loss_history[-1],
        "order_sum_max_dev": float(np.abs(total - a_ori).max()),
    }
    return LearnResult(
        final_orders=layers,
        final_filter=None,
        loss_history=loss_history,
        metrics=metrics,
        order_history=order_history,
    )


def _expand_tied(theta, tie_blocks, n):
    if tie_blocks is None:
        return np.asarray(theta, dtype=float)
    from .validation import expand_blocks

    return expand_blocks(theta, n)


def _reduce_tied(grad, tie_blocks, n):
    if tie_blocks is None:
        return grad
    b = tie_blocks
    size = n // b
    out = np.empty(b)
    for i in range(b):
        lo = i * size
        hi = (i + 1) * size if i < b - 1 else n
        out[i] = grad[lo:hi].sum()
    return out


def train_order_and_filter(
    basis,
    kind,
    y_noisy,
    x_clean,
    filter_mode,
    a_init,
    cfg,
    sparsity=None,
    tie_blocks=None,
    h_init=None,
):
    """Jointly learn the order vector (and optionally a diagonal filter)
    that minimizes the MSE of the spectrally filtered signal.

    filter_mode "ideal_K" keeps the fixed low-pass mask of length
    ``sparsity``; "learnable" trains a real diagonal filter initialized
    to ones. Type-II operators are checked for invertibility each epoch;
    a failing epoch is rolled back with a halved step, diverging after
    10 consecutive halvings.
    """
    n = basis.n
    y = as_vector(y_noisy, n, name="y_noisy").astype(complex)
    x = as_vector(x_clean, n, name="x_clean").astype(complex)
    if filter_mode not in ("ideal_K", "learnable"):
        raise InvalidParameterError(f"unknown filter_mode {filter_mode!r}")
    if filter_mode == "ideal_K":
        if sparsity is None:
            raise InvalidParameterError("ideal_K filter needs a sparsity level")
        h_fixed = np.zeros(n)
        h_fixed[: int(sparsity)] = 1.0

    if tie_blocks is None:
        theta = as_order_vector(a_init, n).copy()
    else:
        theta = np.asarray(a_init, dtype=float).ravel().copy()
        if theta.size != tie_blocks:
            raise InvalidParameterError("a_init must carry one value per tied block")

    learn_filter = filter_mode == "learnable"
    h = (np.ones(n) if h_init is None else np.asarray(h_init, dtype=float).copy()) if learn_filter else None

    n_params = theta.size + (n if learn_filter else 0)
    opt = _Optimizer(n_params, cfg)
    loss_history = []

    def forward(theta_v, h_v):
        a = _expand_tied(theta_v, tie_blocks, n)
        if kind == KIND_II:
            ok, _ = spectral.type_ii_invertibility(basis, a)
            if not ok:
                return None
        op = spectral.build_operator(basis, kind, a)
        tinv = spectral.inverse_operator_matrix(op)
        xhat = op.matrix @ y
        hv = h_fixed if not learn_filter else h_v
        x_tilde = tinv @ (hv * xhat)
        return a, op, tinv, xhat, hv, x_tilde

    def propose(params, grads, lr):
        """Try an update; roll back and halve the step while the proposed
        type-II operator is singular."""
        import copy

        for _ in range(11):
            snapshot = copy.deepcopy(opt.state)
            new = opt.update(params, grads, lr=lr)
            th = new[: theta.size]
            a_new = _expand_tied(th, tie_blocks, n)
            if kind != KIND_II or spectral.type_ii_invertibility(basis, a_new)[0]:
                return new
            opt.state = snapshot
            lr /= 2.0
        raise DivergedError("type-II operator stayed singular after 10 step halvings")

    for epoch in range(cfg.epochs):
        state = forward(theta, h)
        if state is None:
            raise DivergedError("initial type-II operator is singular")
        a, op, tinv, xhat, hv, x_tilde = state

        loss = mse_loss(x_tilde, x)
        loss_history.append(loss)

        u = (2.0 / n) * (x_tilde - x)
        # d x_tilde / d a_k = dTinv_k (h*xhat) + Tinv (h * dT_k y)
        m1 = spectral.grad_apply(basis, kind, a, y)  # column k: dT_k @ y
        if kind == KIND_II:
            m2 = spectral.grad_apply(basis, kind, a, x_tilde)  # dT_k @ Tinv(h*xhat)
            jac = np.linalg.solve(op.matrix, hv[:, None] * m1 - m2)
        else:
            minus = spectral.grad_apply(basis, kind, -a, hv * xhat)
            jac = tinv @ (hv[:, None] * m1) - minus
        g_a_full = np.real(u.conj() @ jac)
        g_a = _reduce_tied(g_a_full, tie_blocks, n) if tie_blocks is not None else g_a_full

        if learn_filter:
            g_h = np.real((u.conj() @ tinv) * xhat)
            params = propose(
                np.concatenate([theta, h]), np.concatenate([g_a, g_h]), cfg.learning_rate
            )
            theta, h = params[: theta.size], params[theta.size :]
        else:
            theta = propose(theta, g_a, cfg.learning_rate)

    # final evaluation with the last accepted parameters
    state = forward(theta, h)
    if state is None:
        raise DivergedError("final type-II operator is singular")
    a, _, _, _, hv, x_tilde = state
    err = np.linalg.norm(x - x_tilde)
    xnorm = np.linalg.norm(x)
    snr = float("inf") if err == 0 else 20.0 * np.log10(xnorm / err)
    metrics = {"mse": mse_loss(x_tilde, x), "snr_db": snr}
    return LearnResult(
        final_orders=a,
        final_filter=np.asarray(hv, dtype=float),
        loss_history=loss_history,
        metrics=metrics,
    )


def train_compression_orders(basis, kind, x, r, a_init, cfg, tie_blocks=None):
    """Learn orders maximizing the energy retained by top-[rN] truncation.

    The loss is the negative retained energy; the retained index set is
    recomputed every epoch and treated as locally constant, so gradient
    flows only through the currently retained coefficients. Type II is
    allowed but flagged: without unitarity the objective no longer
    tracks spectral sparsity.
    """
    from .compression import compress, truncate_top

    n = basis.n
    x = as_vector(x, n, name="x").astype(complex)
    m = int(np.floor(float(r) * n))
    if m < 1:
        raise InvalidParameterError(f"ratio {r} retains zero coefficients for N={n}")

    result_warnings = []
    if kind == KIND_II:
        result_warnings.append("type-II operators do not preserve energy; objective is heuristic")
    if kind not in (KIND_I, KIND_II, KIND_GFRFT):
        raise UnsupportedKindError(f"unknown transform kind {kind!r}")

    if tie_blocks is None:
        theta = as_order_vector(a_init, n).copy()
    else:
        theta = np.asarray(a_init, dtype=float).ravel().copy()

    opt = _Optimizer(theta.size, cfg)
    loss_history = []
    energy_history = []

    for _ in range(cfg.epochs):
        a = _expand_tied(theta, tie_blocks, n)
        op = spectral.build_operator(basis, kind, a)
        xhat = op.matrix @ x
        _, keep = truncate_top(xhat, r)
        mask = np.zeros(n, dtype=bool)
        mask[keep] = True
        retained = float(np.sum(np.abs(xhat[mask]) ** 2))
        loss_history.append(-retained)
        energy_history.append(retained)

        v = np.where(mask, -2.0 * xhat, 0.0)
        cols = spectral.grad_apply(basis, kind, a, x)
        g_full = np.real(v.conj() @ cols)
        g = _reduce_tied(g_full, tie_blocks, n) if tie_blocks is not None else g_full
        theta = opt.update(theta, g)

    a = _expand_tied(theta, tie_blocks, n)
    op = spectral.build_operator(basis, kind, a)
    x_com, report = compress(op.matrix, spectral.inverse_operator_matrix(op), x, r)
    metrics = {
        "re": report.re,
        "nrms": report.nrms,
        "cc": report.cc,
        "retained_energy": energy_history[-1],
        "initial_retained_energy": energy_history[0],
    }
    return LearnResult(
        final_orders=a,
        final_filter=None,
        loss_history=loss_history,
        metrics=metrics,
        warnings=result_warnings,
    )
