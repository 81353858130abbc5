import numpy as np
import pytest

from mpgfrft import spectral
from mpgfrft.denoise import (
    NoiseSpec,
    block_denoise_image,
    denoise_ideal,
    ideal_lowpass,
    make_bandlimited_signal,
    make_structured_noise,
    psnr_db,
    quality_report,
    snr_db,
    spectral_filter,
    ssim,
)
from mpgfrft.errors import InvalidParameterError, UndefinedMetricError
from mpgfrft.learn import TrainConfig


def test_bandlimited_signal_spectrum_support(small_basis):
    n = small_basis.n
    x, xhat = make_bandlimited_signal(small_basis, 4, seed=0)
    np.testing.assert_allclose(xhat[4:], 0)
    # pushing the signal back through the transform recovers the spectrum
    op = spectral.build_operator(small_basis, spectral.KIND_I, np.ones(n))
    np.testing.assert_allclose(op.matrix @ x, xhat, atol=1e-10)


def test_structured_noise_level_and_support(small_basis):
    n = small_basis.n
    noise = make_structured_noise(small_basis, NoiseSpec(support=3, level=2.5, seed=1))
    op = spectral.build_operator(small_basis, spectral.KIND_I, np.ones(n))
    nhat = op.matrix @ noise
    np.testing.assert_allclose(nhat[: n - 3], 0, atol=1e-10)
    assert np.linalg.norm(nhat) == pytest.approx(2.5)


def test_ideal_lowpass_shape():
    h = ideal_lowpass(6, 2)
    np.testing.assert_array_equal(h, [1, 1, 0, 0, 0, 0])
    with pytest.raises(InvalidParameterError):
        ideal_lowpass(4, 5)


def test_exact_separation_disjoint_supports(small_basis):
    # bandlimited signal + noise on the complementary support: the matched
    # ideal filter removes the noise down to numerical precision
    n = small_basis.n
    K = 4
    x, _ = make_bandlimited_signal(small_basis, K, seed=3)
    noise = make_structured_noise(
        small_basis, NoiseSpec(support=n - K, level=np.linalg.norm(x), seed=4)
    )
    x_tilde = denoise_ideal(small_basis, spectral.KIND_I, np.ones(n), x + noise, K)
    assert snr_db(x, x_tilde) > 100


def test_spectral_filter_identity_filter_is_noop(small_basis, rng):
    n = small_basis.n
    y = rng.standard_normal(n)
    a = rng.uniform(0.2, 1.2, n)
    out = spectral_filter(small_basis, spectral.KIND_I, a, y, np.ones(n))
    np.testing.assert_allclose(out, y, atol=1e-8)


def test_snr_db_hand_value():
    # error norm is exactly a tenth of the signal norm
    x = np.array([10.0, 0.0])
    y = np.array([9.0, 0.0])
    assert snr_db(x, y) == pytest.approx(20.0)
    assert snr_db(x, x) == np.inf
    with pytest.raises(UndefinedMetricError):
        snr_db(np.zeros(3), np.ones(3))


def test_psnr_db_hand_value():
    a = np.zeros((4, 4))
    b = np.full((4, 4), 255.0)
    assert psnr_db(a, b) == pytest.approx(0.0)
    assert psnr_db(a, a) == np.inf


def test_ssim_identity_and_bounds(rng):
    img = rng.uniform(0, 255, size=(16, 16))
    assert ssim(img, img) == pytest.approx(1.0)
    other = rng.uniform(0, 255, size=(16, 16))
    val = ssim(img, other)
    assert -1 <= val <= 1


def test_ssim_window_requirements():
    with pytest.raises(UndefinedMetricError):
        ssim(np.zeros((4, 4)), np.zeros((4, 4)))
    with pytest.raises(InvalidParameterError):
        ssim(np.zeros((16, 16)), np.zeros((8, 8)))


def test_quality_report_image_fields(rng):
    a = rng.uniform(0, 255, size=(16, 16))
    rep = quality_report(a, a + 1.0, image=True)
    assert rep.psnr_db is not None and rep.ssim is not None
    assert set(rep.to_dict()) == {"snr_db", "mse", "psnr_db", "ssim"}


def test_block_denoise_learned_beats_noisy(rng):
    xx, yy = np.meshgrid(np.arange(16), np.arange(16))
    clean = 128 + 60 * np.sin(xx / 3.0) * np.cos(yy / 4.0)
    noisy = clean + 30 * rng.standard_normal(clean.shape)
    cfg = TrainConfig(learning_rate=0.01, epochs=120, seed=0)
    out = block_denoise_image(
        noisy, 8, spectral.KIND_I, 8, mode="learned", a_init=1.0, train_cfg=cfg, clean=clean
    )
    assert np.mean((out - clean) ** 2) < np.mean((noisy - clean) ** 2)


def test_block_denoise_learned_requires_clean(rng):
    with pytest.raises(InvalidParameterError):
        block_denoise_image(rng.uniform(0, 255, (8, 8)), 8, spectral.KIND_I, 4, mode="learned")
