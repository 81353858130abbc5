import numpy as np
import pytest

from mpgfrft import spectral
from mpgfrft.errors import InvalidParameterError
from mpgfrft.learn import (
    AdamState,
    TrainConfig,
    adam_step,
    loss_grad_wrt_orders,
    mse_loss,
    train_compression_orders,
    train_order_and_filter,
    train_transform_layers,
)
from mpgfrft.spectral import KIND_GFRFT, KIND_I, KIND_II
from mpgfrft.validation import expand_blocks


def test_train_config_validation():
    with pytest.raises(InvalidParameterError):
        TrainConfig(learning_rate=0)
    with pytest.raises(InvalidParameterError):
        TrainConfig(epochs=0)
    with pytest.raises(InvalidParameterError):
        TrainConfig(optimizer="lbfgs")


def test_mse_loss_values():
    assert mse_loss([1 + 1j, 0], [0, 0]) == pytest.approx(1.0)
    assert mse_loss(np.zeros(5), np.zeros(5)) == 0.0
    with pytest.raises(InvalidParameterError):
        mse_loss([1, 2], [1, 2, 3])


def test_adam_first_step_is_signed_learning_rate():
    # with bias correction the very first Adam step is lr * sign(grad)
    params = np.zeros(3)
    state = AdamState.zeros(3)
    new, _ = adam_step(params, np.array([1.0, -2.0, 0.5]), state, 0.1)
    np.testing.assert_allclose(new, [-0.1, 0.1, -0.1], atol=1e-6)


@pytest.mark.parametrize("kind", [KIND_I, KIND_II])
def test_loss_gradient_matches_finite_differences(small_basis, rng, kind):
    n = small_basis.n
    a = rng.uniform(0.2, 1.2, n)
    x = rng.standard_normal(n)
    y = rng.standard_normal(n)

    def loss(av):
        return mse_loss(spectral.build_operator(small_basis, kind, av).matrix @ x, y)

    out = spectral.build_operator(small_basis, kind, a).matrix @ x
    u = (2.0 / n) * (out - y)
    g = loss_grad_wrt_orders(small_basis, kind, a, u, x)
    step = 1e-5
    fd = np.empty(n)
    for k in range(n):
        ap, am = a.copy(), a.copy()
        ap[k] += step
        am[k] -= step
        fd[k] = (loss(ap) - loss(am)) / (2 * step)
    assert np.abs(g - fd).max() / max(np.abs(fd).max(), 1e-12) < 1e-4


def test_single_layer_transform_learning_converges(small_basis, rng):
    n = small_basis.n
    a_ori = expand_blocks([0.7, 0.2, 0.5], n)
    x = rng.standard_normal(n)
    cfg = TrainConfig(learning_rate=0.01, epochs=1500, seed=0, log_every=500)
    res = train_transform_layers(small_basis, x, a_ori, [rng.uniform(0.2, 0.8, n)], cfg)
    assert res.loss_history[-1] < 1e-10
    assert res.loss_history[-1] < res.loss_history[0]
    assert len(res.order_history) == 3


def test_two_layer_orders_sum_to_target(small_basis, rng):
    n = small_basis.n
    a_ori = expand_blocks([0.7, 0.2, 0.5], n)
    x = rng.standard_normal(n)
    cfg = TrainConfig(learning_rate=0.01, epochs=4000, seed=0, log_every=4000)
    inits = [rng.uniform(0.2, 0.8, n) for _ in range(2)]
    res = train_transform_layers(small_basis, x, a_ori, inits, cfg)
    total = np.sum(res.final_orders, axis=0)
    assert res.metrics["order_sum_max_dev"] == pytest.approx(np.abs(total - a_ori).max())
    assert res.metrics["order_sum_max_dev"] < 1e-3


def test_learn_result_json_serializable(small_basis, rng):
    import json

    n = small_basis.n
    cfg = TrainConfig(learning_rate=0.01, epochs=5, seed=0)
    res = train_transform_layers(
        small_basis, rng.standard_normal(n), np.full(n, 0.5), [np.full(n, 0.4)], cfg
    )
    payload = json.loads(res.to_json())
    assert set(payload) >= {"orders", "filter", "loss_history", "metrics"}


@pytest.mark.parametrize("kind", [KIND_I, KIND_II])
def test_order_and_filter_training_reduces_loss(small_basis, rng, kind):
    n = small_basis.n
    x = rng.standard_normal(n)
    y = x + 0.3 * rng.standard_normal(n)
    cfg = TrainConfig(learning_rate=0.01, epochs=150, seed=0)
    res = train_order_and_filter(
        small_basis, kind, y, x, "learnable", np.full(n, 0.9), cfg
    )
    assert res.loss_history[-1] < res.loss_history[0]
    assert res.final_filter.shape == (n,)


def test_ideal_filter_requires_sparsity(small_basis, rng):
    n = small_basis.n
    with pytest.raises(InvalidParameterError):
        train_order_and_filter(
            small_basis,
            KIND_I,
            rng.standard_normal(n),
            rng.standard_normal(n),
            "ideal_K",
            np.full(n, 0.5),
            TrainConfig(epochs=1),
        )


def test_tied_blocks_keep_block_structure(small_basis, rng):
    n = small_basis.n
    x = rng.standard_normal(n)
    y = x + 0.2 * rng.standard_normal(n)
    cfg = TrainConfig(learning_rate=0.01, epochs=50, seed=0)
    res = train_order_and_filter(
        small_basis, KIND_I, y, x, "ideal_K", np.array([0.5, 0.5]), cfg,
        sparsity=4, tie_blocks=2,
    )
    a = np.asarray(res.final_orders)
    half = n // 2
    assert np.ptp(a[:half]) == 0
    assert np.ptp(a[half:]) == 0


def test_compression_order_learning_gains_energy(medium_basis, rng):
    n = medium_basis.n
    x = rng.standard_normal(n)
    cfg = TrainConfig(learning_rate=0.01, epochs=200, seed=0)
    res = train_compression_orders(medium_basis, KIND_I, x, 0.25, np.full(n, 0.5), cfg)
    assert res.metrics["retained_energy"] >= res.metrics["initial_retained_energy"]
    assert res.metrics["re"] >= 0


def test_compression_learning_scalar_gfrft_ties_to_one_parameter(medium_basis, rng):
    n = medium_basis.n
    x = rng.standard_normal(n)
    cfg = TrainConfig(learning_rate=0.01, epochs=100, seed=0)
    res = train_compression_orders(
        medium_basis, KIND_GFRFT, x, 0.25, np.array([0.5]), cfg, tie_blocks=1
    )
    assert np.ptp(np.asarray(res.final_orders)) == 0


def test_type_ii_compression_flagged(medium_basis, rng):
    n = medium_basis.n
    cfg = TrainConfig(learning_rate=0.01, epochs=5, seed=0)
    res = train_compression_orders(
        medium_basis, KIND_II, rng.standard_normal(n), 0.25, np.full(n, 0.5), cfg
    )
    assert res.warnings
