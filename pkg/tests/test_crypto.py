import numpy as np
import pytest

from mpgfrft import crypto, spectral
from mpgfrft.crypto import (
    ChaosKey,
    CipherKey,
    adjacent_correlation,
    bases_to_codes,
    chaotic_permutation,
    codes_to_bases,
    decrypt_image,
    dna_decode,
    dna_encode,
    dna_xor,
    encrypt_image,
    load_ciphertext,
    logistic_sequence,
    random_cipher_key,
    save_ciphertext,
    sensitivity_sweep,
)
from mpgfrft.errors import (
    InvalidKeyError,
    InvalidParameterError,
    MalformedCiphertextError,
)


def random_image(rng, h=16, w=16):
    return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)


def test_chaos_key_validation():
    with pytest.raises(InvalidKeyError):
        ChaosKey(0.5, 3.99)
    with pytest.raises(InvalidKeyError):
        ChaosKey(0.3, 3.2)
    with pytest.raises(InvalidKeyError):
        ChaosKey(1.2, 3.99)


def test_logistic_first_iterate_hand_value():
    # x1 = 3.99 * 0.3 * 0.7
    seq = logistic_sequence(ChaosKey(0.3, 3.99, burn_in=0), 1)
    assert seq[0] == pytest.approx(0.8379)


def test_logistic_deterministic_and_sensitive():
    k = ChaosKey(0.3, 3.99)
    np.testing.assert_array_equal(logistic_sequence(k, 50), logistic_sequence(k, 50))
    other = ChaosKey(0.3 + 1e-12, 3.99)
    diff = np.abs(logistic_sequence(k, 100) - logistic_sequence(other, 100))
    assert diff.max() > 0.1


def test_chaotic_permutation_hand_value():
    # iterates from x0=0.3: 0.8379, 0.5419.., 0.9907.., 0.0368..
    perm = chaotic_permutation(ChaosKey(0.3, 3.99, burn_in=0), 4)
    np.testing.assert_array_equal(perm, [3, 1, 0, 2])


def test_chaotic_permutation_is_bijection():
    perm = chaotic_permutation(ChaosKey(0.7, 3.9), 500)
    np.testing.assert_array_equal(np.sort(perm), np.arange(500))
    assert chaotic_permutation(ChaosKey(0.7, 3.9), 1)[0] == 0


def test_dna_encode_hand_values():
    # 0x1B = 00 01 10 11
    assert codes_to_bases(dna_encode([0x1B], 1), 1) == "ACGT"
    assert codes_to_bases(dna_encode([0x00], 1), 1) == "AAAA"


def test_dna_round_trip_all_bytes_all_rules():
    data = np.arange(256, dtype=np.uint8)
    for rule in range(1, 9):
        np.testing.assert_array_equal(dna_decode(dna_encode(data, rule), rule), data)


def test_dna_decode_rejects_invalid_codes():
    with pytest.raises(MalformedCiphertextError):
        dna_decode(np.array([0, 1, 2], dtype=np.uint8), 1)
    with pytest.raises(MalformedCiphertextError):
        dna_decode(np.array([0, 1, 2, 9], dtype=np.uint8), 1)
    with pytest.raises(MalformedCiphertextError):
        bases_to_codes("ACGX", 1)


def test_dna_xor_involution(rng):
    s = dna_encode(rng.integers(0, 256, 64, dtype=np.uint8), 1)
    m = dna_encode(rng.integers(0, 256, 64, dtype=np.uint8), 1)
    zeros = np.zeros_like(s)
    np.testing.assert_array_equal(dna_xor(s, zeros), s)
    np.testing.assert_array_equal(dna_xor(s, s), zeros)
    np.testing.assert_array_equal(dna_xor(dna_xor(s, m), m), s)


def test_cipher_key_validation():
    chaos = [ChaosKey(0.3, 3.99)] * 4
    with pytest.raises(InvalidKeyError):
        CipherKey(chaos=chaos, dna_rule=9, group_size=64, orders=np.ones(64))
    with pytest.raises(InvalidKeyError):
        CipherKey(chaos=chaos, dna_rule=1, group_size=64, orders=np.ones(32))
    with pytest.raises(InvalidKeyError):
        CipherKey(chaos=chaos[:2], dna_rule=1, group_size=64, orders=np.ones(64))


def test_cipher_key_json_round_trip():
    key = random_cipher_key(seed=5)
    key2 = CipherKey.from_json(key.to_json())
    assert key2.fingerprint() == key.fingerprint()
    np.testing.assert_array_equal(key2.orders, key.orders)


def test_cipher_key_json_rejects_garbage():
    with pytest.raises(InvalidKeyError):
        CipherKey.from_json("not json at all {")
    with pytest.raises(InvalidKeyError):
        CipherKey.from_json("{}")


@pytest.mark.parametrize("kind", [spectral.KIND_I, spectral.KIND_II])
def test_encrypt_decrypt_round_trip(rng, kind):
    img = random_image(rng)
    key = random_cipher_key(seed=2, kind=kind)
    rec = decrypt_image(encrypt_image(img, key), key)
    np.testing.assert_array_equal(rec, img)


def test_round_trip_with_padding(rng):
    # 5x5 image: 75 bytes, forces nonzero padding for group size 64
    img = random_image(rng, 5, 5)
    key = random_cipher_key(seed=8)
    ct = encrypt_image(img, key)
    assert ct.padding == 53
    np.testing.assert_array_equal(decrypt_image(ct, key), img)


def test_wrong_key_does_not_decrypt(rng):
    img = random_image(rng)
    key = random_cipher_key(seed=0)
    wrong = random_cipher_key(seed=1)
    rec = decrypt_image(encrypt_image(img, key), wrong)
    assert np.mean(np.abs(rec.astype(float) - img.astype(float))) > 30


def test_chaos_seed_avalanche(rng):
    img = random_image(rng)
    key = random_cipher_key(seed=0)
    ct = encrypt_image(img, key)
    perturbed = CipherKey(
        chaos=[ChaosKey(key.chaos[0].x0 + 1e-10, key.chaos[0].eta)] + list(key.chaos[1:]),
        dna_rule=key.dna_rule,
        group_size=key.group_size,
        orders=key.orders,
        kind=key.kind,
    )
    rec = decrypt_image(ct, perturbed)
    # only the perturbed channel's DNA stage is corrupted
    err = np.abs(rec.astype(float) - img.astype(float))
    assert np.mean(err[..., 0]) > 30
    np.testing.assert_array_equal(rec[..., 1:], img[..., 1:])

    # a perturbed grouping seed corrupts every channel
    scrambled = CipherKey(
        chaos=list(key.chaos[:3]) + [ChaosKey(key.chaos[3].x0 + 1e-10, key.chaos[3].eta)],
        dna_rule=key.dna_rule,
        group_size=key.group_size,
        orders=key.orders,
        kind=key.kind,
    )
    rec2 = decrypt_image(ct, scrambled)
    assert np.mean(np.abs(rec2.astype(float) - img.astype(float))) > 30


def test_type_i_groups_preserve_energy(rng):
    img = random_image(rng)
    key = random_cipher_key(seed=4, kind=spectral.KIND_I)
    ct = encrypt_image(img, key)
    from mpgfrft.crypto import _grouped_stream

    stream, _, _ = _grouped_stream(img, key)
    G = key.group_size
    for g in range(stream.size // G):
        plain = np.linalg.norm(stream[g * G : (g + 1) * G].astype(float))
        enc = np.linalg.norm(ct.data[g * G : (g + 1) * G])
        assert enc == pytest.approx(plain, abs=1e-8 * max(plain, 1))


def test_ciphertext_file_round_trip(rng, tmp_path):
    img = random_image(rng)
    key = random_cipher_key(seed=6)
    ct = encrypt_image(img, key)
    path = tmp_path / "ct.mpgc"
    save_ciphertext(ct, path)
    ct2 = load_ciphertext(path)
    assert (ct2.height, ct2.width, ct2.padding) == (ct.height, ct.width, ct.padding)
    np.testing.assert_array_equal(decrypt_image(ct2, key), img)


def test_load_ciphertext_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.mpgc"
    path.write_bytes(b"NOPE" + b"\x00" * 32)
    with pytest.raises(MalformedCiphertextError):
        load_ciphertext(path)


def test_adjacent_correlation_gradient_image():
    # a linear gradient shifts to itself horizontally: correlation 1
    img = np.tile(np.arange(64, dtype=float), (64, 1))
    rho = adjacent_correlation(img, "horizontal", pairs=2000, seed=0)
    assert rho == pytest.approx(1.0, abs=1e-6)


def test_adjacent_correlation_constant_image_sentinel():
    img = np.full((16, 16), 7.0)
    assert adjacent_correlation(img, "vertical", pairs=100, seed=0) == 0.0


def test_adjacent_correlation_unknown_direction():
    with pytest.raises(InvalidParameterError):
        adjacent_correlation(np.zeros((8, 8)), "antidiagonal")


def test_encrypted_image_decorrelated(rng):
    xx, yy = np.meshgrid(np.arange(32), np.arange(32))
    img = np.stack(
        [
            (128 + 90 * np.sin(xx / 5) * np.cos(yy / 7)).clip(0, 255),
            (128 + 90 * np.cos(xx / 6)).clip(0, 255),
            (128 + 90 * np.sin((xx + yy) / 9)).clip(0, 255),
        ],
        axis=-1,
    ).astype(np.uint8)
    key = random_cipher_key(seed=42)
    enc = encrypt_image(img, key).magnitude_image()
    for direction in ("horizontal", "vertical", "diagonal"):
        assert abs(adjacent_correlation(enc, direction, seed=0)) < 0.05


def test_sensitivity_sweep_zero_delta_is_exact(rng):
    img = random_image(rng, 8, 8)
    key = random_cipher_key(seed=3)
    points = sensitivity_sweep(img, key, [-0.2, 0.0, 0.2])
    mse = dict(points)
    assert mse[0.0] == 0.0
    assert mse[-0.2] > 0 and mse[0.2] > 0


def test_parse_delta_range():
    grid = crypto.parse_delta_range("-0.6:0.6:0.3")
    np.testing.assert_allclose(grid, [-0.6, -0.3, 0.0, 0.3, 0.6], atol=1e-12)
    with pytest.raises(InvalidParameterError):
        crypto.parse_delta_range("1:0:0.1")
    with pytest.raises(InvalidParameterError):
        crypto.parse_delta_range("nonsense")
