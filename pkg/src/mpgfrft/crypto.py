"""Chaos/DNA image encryption with a fractional spectral layer.

Pipeline per channel: chaotic pixel permutation, DNA encoding, XOR with
a chaotic DNA mask, decode. The masked channels are flattened, padded,
chaotically grouped, and each group is pushed through a fractional
graph transform built on a 4-NN graph over the group's flat-stream
coordinates. Decryption inverts every stage; with the right key the
round trip is byte-exact.
"""

import hashlib
import json
import struct
from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import (
    DegenerateOrbitError,
    InvalidKeyError,
    InvalidParameterError,
    MalformedCiphertextError,
    UndefinedMetricError,
)
from .graphs import build_knn_graph, shift_operator
from .validation import check_positive_int

KEY_FORMAT_VERSION = 1
CIPHERTEXT_MAGIC = b"MPGC"
DEFAULT_GROUP_SIZE = 64

# The eight base assignments where complementary bases carry
# complementary 2-bit codes. Rule 1 is A=00, C=01, G=10, T=11.
DNA_RULES = {
    1: "ACGT",
    2: "AGCT",
    3: "CATG",
    4: "CTAG",
    5: "GATC",
    6: "GTAC",
    7: "TCGA",
    8: "TGCA",
}


@dataclass(frozen=True)
class ChaosKey:
    """Logistic-map seed: x_{k+1} = eta * x_k * (1 - x_k)."""

    x0: float
    eta: float
    burn_in: int = 1000

    def __post_init__(self):
        if not 0 < self.x0 < 1 or self.x0 == 0.5:
            raise InvalidKeyError(f"x0 must lie in (0,1) excluding 0.5, got {self.x0}")
        if not 3.57 < self.eta <= 4.0:
            raise InvalidKeyError(f"eta must lie in (3.57, 4.0], got {self.eta}")
        if self.burn_in < 0:
            raise InvalidKeyError("burn_in must be non-negative")


@dataclass
class CipherKey:
    """Everything needed to encrypt: three per-channel chaos keys, one
    grouping chaos key, a DNA rule, the group size, and the fractional
    order vector."""

    chaos: list  # [R, G, B, grouping]
    dna_rule: int
    group_size: int
    orders: np.ndarray
    kind: str = spectral.KIND_I

    def __post_init__(self):
        if len(self.chaos) != 4:
            raise InvalidKeyError("need 4 chaos keys (three channels + grouping)")
        if self.dna_rule not in DNA_RULES:
            raise InvalidKeyError(f"dna_rule must be 1-8, got {self.dna_rule}")
        self.group_size = check_positive_int(self.group_size, "group_size")
        self.orders = np.asarray(self.orders, dtype=float)
        if self.orders.shape != (self.group_size,):
            raise InvalidKeyError(
                f"orders must have length group_size ({self.group_size}), got {self.orders.shape}"
            )
        if self.kind not in (spectral.KIND_I, spectral.KIND_II, spectral.KIND_GFRFT):
            raise InvalidKeyError(f"unknown transform kind {self.kind!r}")

    def to_json(self):
        return json.dumps(
            {
                "version": KEY_FORMAT_VERSION,
                "kind": self.kind,
                "dna_rule": self.dna_rule,
                "group_size": self.group_size,
                "chaos": [
                    {"x0": float(f"{c.x0:.17g}"), "eta": float(f"{c.eta:.17g}"), "burn_in": c.burn_in}
                    for c in self.chaos
                ],
                "orders": [float(f"{v:.17g}") for v in self.orders],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidKeyError(f"key file is not valid JSON: {exc}") from exc
        missing = {"version", "kind", "dna_rule", "group_size", "chaos", "orders"} - d.keys()
        if missing:
            raise InvalidKeyError(f"key file missing fields: {sorted(missing)}")
        if d["version"] != KEY_FORMAT_VERSION:
            raise InvalidKeyError(f"unsupported key version {d['version']}")
        chaos = [ChaosKey(c["x0"], c["eta"], c.get("burn_in", 1000)) for c in d["chaos"]]
        return cls(
            chaos=chaos,
            dna_rule=int(d["dna_rule"]),
            group_size=int(d["group_size"]),
            orders=np.asarray(d["orders"], dtype=float),
            kind=d["kind"],
        )

    def fingerprint(self):
        """SHA-256 of the canonical serialization."""
        return hashlib.sha256(self.to_json().encode()).hexdigest()


@dataclass
class Ciphertext:
    """Encrypted image: concatenated complex spectral groups plus the
    bookkeeping needed to invert the pipeline."""

    data: np.ndarray  # complex, length = padded byte count
    height: int
    width: int
    padding: int
    key_fingerprint: str = ""
    channels: int = 3

    def magnitude_image(self):
        """Lossy magnitude rendering of the ciphertext as an 8-bit image."""
        mags = np.abs(self.data[: self.data.size - self.padding])
        top = mags.max()
        scaled = np.zeros_like(mags) if top == 0 else mags / top * 255.0
        return (
            np.clip(np.round(scaled), 0, 255)
            .astype(np.uint8)
            .reshape(self.height, self.width, self.channels)
        )


def random_cipher_key(seed=0, group_size=DEFAULT_GROUP_SIZE, kind=spectral.KIND_I, dna_rule=None):
    """Draw a valid random key (chaos seeds, rule, uniform[0.1, 1.5] orders)."""
    rng = np.random.default_rng(seed)
    chaos = [ChaosKey(float(rng.uniform(0.05, 0.95)), float(rng.uniform(3.8, 4.0))) for _ in range(4)]
    rule = int(rng.integers(1, 9)) if dna_rule is None else dna_rule
    orders = rng.uniform(0.1, 1.5, size=group_size)
    return CipherKey(chaos=chaos, dna_rule=rule, group_size=group_size, orders=orders, kind=kind)


def logistic_sequence(key, n):
    """n chaotic reals in (0,1) after discarding burn_in iterates."""
    n = check_positive_int(n, "n", minimum=0) if n else 0
    x = key.x0
    for _ in range(key.burn_in):
        x = key.eta * x * (1.0 - x)
        if x == 0.0 or x == 1.0:
            raise DegenerateOrbitError("logistic orbit collapsed to a fixed point")
    out = np.empty(n)
    for i in range(n):
        x = key.eta * x * (1.0 - x)
        if x == 0.0 or x == 1.0:
            raise DegenerateOrbitError("logistic orbit collapsed to a fixed point")
        out[i] = x
    return out


def chaotic_permutation(key, n):
    """Permutation of {0..n-1}: index order sorting the chaotic sequence
    ascending, ties broken by index."""
    seq = logistic_sequence(key, n)
    return np.argsort(seq, kind="stable")


def dna_encode(data, rule):
    """Bytes to bases, 4 bases per byte, most-significant bit-pair first.

    Returns a uint8 array of 2-bit codes; use codes_to_bases for the
    letter form.
    """
    if rule not in DNA_RULES:
        raise InvalidParameterError(f"dna rule must be 1-8, got {rule}")
    data = np.asarray(data, dtype=np.uint8)
    codes = np.empty(data.size * 4, dtype=np.uint8)
    codes[0::4] = data >> 6
    codes[1::4] = (data >> 4) & 0b11
    codes[2::4] = (data >> 2) & 0b11
    codes[3::4] = data & 0b11
    return codes


def dna_decode(codes, rule):
    """Inverse of dna_encode: 2-bit codes back to bytes."""
    if rule not in DNA_RULES:
        raise InvalidParameterError(f"dna rule must be 1-8, got {rule}")
    codes = np.asarray(codes, dtype=np.uint8)
    if codes.size % 4:
        raise MalformedCiphertextError("base sequence length must be a multiple of 4")
    if np.any(codes > 3):
        raise MalformedCiphertextError("invalid base code (must be 0-3)")
    return (
        (codes[0::4].astype(np.uint8) << 6)
        | (codes[1::4] << 4)
        | (codes[2::4] << 2)
        | codes[3::4]
    ).astype(np.uint8)


def codes_to_bases(codes, rule):
    table = DNA_RULES[rule]
    return "".join(table[c] for c in np.asarray(codes, dtype=np.uint8))


def bases_to_codes(bases, rule):
    table = DNA_RULES[rule]
    lookup = {b: i for i, b in enumerate(table)}
    try:
        return np.array([lookup[b] for b in bases], dtype=np.uint8)
    except KeyError as exc:
        raise MalformedCiphertextError(f"invalid base {exc} for rule {rule}") from exc


def dna_xor(codes_a, codes_b, rule=1):
    """Per-base XOR of the 2-bit codes; an involution."""
    a = np.asarray(codes_a, dtype=np.uint8)
    b = np.asarray(codes_b, dtype=np.uint8)
    if a.shape != b.shape:
        raise InvalidParameterError("dna_xor inputs must have equal length")
    if rule not in DNA_RULES:
        raise InvalidParameterError(f"dna rule must be 1-8, got {rule}")
    return a ^ b


def _chaos_mask_bytes(key, n):
    """Mask bytes: chaotic reals quantized by floor(x * 256), clamped to 255."""
    seq = logistic_sequence(key, n)
    return np.minimum(np.floor(seq * 256.0), 255.0).astype(np.uint8)


def _dna_stage(channel_bytes, chaos_key, rule, inverse=False):
    """Permute + DNA-mask one flattened channel (or invert it)."""
    n = channel_bytes.size
    perm = chaotic_permutation(chaos_key, n)
    mask = dna_encode(_chaos_mask_bytes(chaos_key, n), rule)
    if not inverse:
        shuffled = channel_bytes[perm]
        return dna_decode(dna_xor(dna_encode(shuffled, rule), mask, rule), rule)
    shuffled = dna_decode(dna_xor(dna_encode(channel_bytes, rule), mask, rule), rule)
    out = np.empty(n, dtype=np.uint8)
    out[perm] = shuffled
    return out


class _GroupBases:
    """Per-group spectral bases on 4-NN graphs over flat-stream coordinates.

    Slot f of the padded stream sits at (f // row, f % row) with row =
    3 * image width, so the layout is key-independent; bases repeat with
    the group's offset pattern and are cached accordingly.
    """

    def __init__(self, group_size, row_width):
        self.group_size = group_size
        self.row = max(int(row_width), 1)
        self._cache = {}

    def basis_for(self, group_index):
        start = group_index * self.group_size
        pattern = start % self.row
        if pattern not in self._cache:
            f = np.arange(start, start + self.group_size)
            coords = np.stack([f // self.row, f % self.row], axis=1).astype(float)
            g = build_knn_graph(coords, min(4, self.group_size - 1), weight_scheme="gaussian")
            self._cache[pattern] = spectral.gft_basis(shift_operator(g, "adjacency"))
        return self._cache[pattern]


def _validate_image(img):
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise InvalidParameterError(f"expected an HxWx3 image, got shape {img.shape}")
    if img.dtype != np.uint8:
        if np.any(img < 0) or np.any(img > 255):
            raise InvalidParameterError("pixel values must lie in [0, 255]")
        img = img.astype(np.uint8)
    return img


def _grouped_stream(img, key):
    """DNA stage per channel, flatten, pad, apply the grouping permutation.

    Returns (permuted padded byte stream, padding, grouping permutation).
    """
    img = _validate_image(img)
    h, w, _ = img.shape
    channels = [
        _dna_stage(img[..., c].reshape(-1), key.chaos[c], key.dna_rule) for c in range(3)
    ]
    flat = np.stack(channels, axis=-1).reshape(-1)  # (H, W, 3) order
    padding = (-flat.size) % key.group_size
    padded = np.concatenate([flat, np.zeros(padding, dtype=np.uint8)])
    perm = chaotic_permutation(key.chaos[3], padded.size)
    return padded[perm], padding, perm


def encrypt_image(img, key):
    """Encrypt an RGB byte image (confusion/diffusion + spectral layer)."""
    img = _validate_image(img)
    h, w, _ = img.shape
    stream, padding, _ = _grouped_stream(img, key)
    G = key.group_size
    bases = _GroupBases(G, 3 * w)
    out = np.empty(stream.size, dtype=complex)
    op_cache = {}
    for g in range(stream.size // G):
        basis = bases.basis_for(g)
        bid = id(basis)
        if bid not in op_cache:
            if key.kind == spectral.KIND_II:
                ok, min_abs = spectral.type_ii_invertibility(basis, key.orders)
                if not ok:
                    raise InvalidKeyError(
                        f"type-II key is not invertible on group graph (min |d_j| = {min_abs:.3e})"
                    )
            op_cache[bid] = spectral.build_operator(basis, key.kind, key.orders).matrix
        out[g * G : (g + 1) * G] = op_cache[bid] @ stream[g * G : (g + 1) * G].astype(complex)
    return Ciphertext(
        data=out,
        height=h,
        width=w,
        padding=padding,
        key_fingerprint=key.fingerprint(),
    )


def decrypt_image(ct, key, orders=None):
    """Decrypt a ciphertext; ``orders`` overrides the key's order vector
    (used for sensitivity studies)."""
    b = key.orders if orders is None else np.asarray(orders, dtype=float)
    if b.shape != (key.group_size,):
        raise InvalidKeyError("decryption orders must have length group_size")
    G = key.group_size
    if ct.data.size % G:
        raise MalformedCiphertextError("ciphertext length is not a multiple of the group size")
    bases = _GroupBases(G, 3 * ct.width)
    stream = np.empty(ct.data.size, dtype=complex)
    inv_cache = {}
    for g in range(ct.data.size // G):
        basis = bases.basis_for(g)
        bid = id(basis)
        if bid not in inv_cache:
            op = spectral.build_operator(basis, key.kind, b)
            try:
                inv_cache[bid] = spectral.inverse_operator_matrix(op)
            except spectral.NotInvertibleError as exc:
                raise InvalidKeyError(f"decryption operator is singular: {exc}") from exc
        stream[g * G : (g + 1) * G] = inv_cache[bid] @ ct.data[g * G : (g + 1) * G]

    perm = chaotic_permutation(key.chaos[3], stream.size)
    unpermuted = np.empty(stream.size, dtype=complex)
    unpermuted[perm] = stream
    pixels = np.clip(np.round(np.real(unpermuted)), 0, 255).astype(np.uint8)
    flat = pixels[: pixels.size - ct.padding]
    hwc = flat.reshape(ct.height, ct.width, 3)
    out = np.empty_like(hwc)
    for c in range(3):
        out[..., c] = _dna_stage(
            hwc[..., c].reshape(-1), key.chaos[c], key.dna_rule, inverse=True
        ).reshape(ct.height, ct.width)
    return out


def save_ciphertext(ct, path):
    """Binary layout: magic, u32 width/height/padding, complex64 payload."""
    with open(path, "wb") as fh:
        fh.write(CIPHERTEXT_MAGIC)
        fh.write(struct.pack("<III", ct.width, ct.height, ct.padding))
        fh.write(ct.data.astype(np.complex64).tobytes())


def load_ciphertext(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != CIPHERTEXT_MAGIC:
        raise MalformedCiphertextError("bad magic: not a ciphertext file")
    if len(blob) < 16:
        raise MalformedCiphertextError("truncated ciphertext header")
    width, height, padding = struct.unpack("<III", blob[4:16])
    payload = np.frombuffer(blob[16:], dtype="<c8").astype(complex)
    if payload.size != height * width * 3 + padding:
        raise MalformedCiphertextError("payload length inconsistent with header")
    return Ciphertext(data=payload, height=height, width=width, padding=padding)


def adjacent_correlation(img, direction="horizontal", pairs=5000, seed=0):
    """Pearson correlation of randomly sampled adjacent pixel pairs,
    averaged over RGB channels. Zero-variance channels contribute the
    sentinel 0."""
    img = np.asarray(img, dtype=float)
    if img.ndim == 2:
        img = img[:, :, None]
    h, w, c = img.shape
    offsets = {"horizontal": (0, 1), "vertical": (1, 0), "diagonal": (1, 1)}
    if direction not in offsets:
        raise InvalidParameterError(f"unknown direction {direction!r}")
    di, dj = offsets[direction]
    if h - di < 1 or w - dj < 1:
        raise UndefinedMetricError("image too small for adjacent pairs")
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, h - di, size=pairs)
    cols = rng.integers(0, w - dj, size=pairs)
    vals = []
    for ch in range(c):
        a = img[rows, cols, ch]
        b = img[rows + di, cols + dj, ch]
        sa, sb = a.std(), b.std()
        if sa == 0 or sb == 0:
            vals.append(0.0)
            continue
        vals.append(float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb)))
    return float(np.mean(vals))


def sensitivity_sweep(img, key, deltas):
    """Encrypt once; decrypt with b = a + delta for each delta; report
    the 8-bit-scale pixel MSE per delta."""
    ct = encrypt_image(img, key)
    img = _validate_image(img).astype(float)
    out = []
    for delta in deltas:
        try:
            rec = decrypt_image(ct, key, orders=key.orders + float(delta))
            mse = float(np.mean((img - rec.astype(float)) ** 2))
        except InvalidKeyError:
            mse = float("nan")
        out.append((float(delta), mse))
    return out


def parse_delta_range(spec):
    """Parse "start:stop:step" into an inclusive delta grid."""
    try:
        start, stop, step = (float(v) for v in spec.split(":"))
    except ValueError as exc:
        raise InvalidParameterError(f"bad delta range {spec!r}, expected start:stop:step") from exc
    if step <= 0 or stop < start:
        raise InvalidParameterError("delta range needs step > 0 and stop >= start")
    return np.arange(start, stop + step / 2, step)
