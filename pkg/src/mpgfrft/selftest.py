"""Built-in invariant suite behind the `selftest` CLI command.

Each check is a small, fast property test over random graphs; the
runner prints one pass/fail line per property and returns the number
of failures.
"""

import numpy as np

from . import crypto, spectral
from .compression import compress_adapted
from .graphs import build_cycle_graph, build_random_sensor_graph, shift_operator
from .learn import loss_grad_wrt_orders, mse_loss


def _random_basis(rng, n):
    g = build_random_sensor_graph(n, seed=int(rng.integers(1 << 30)))
    return spectral.gft_basis(shift_operator(g, "adjacency"))


def check_reduction_identities(seed=0, trials=10):
    """a=0 gives the identity, a=1 the GFT, constant a the scalar transform."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(6, 17))
        basis = _random_basis(rng, n)
        for kind in (spectral.KIND_I, spectral.KIND_II):
            eye_err = np.abs(
                spectral.build_operator(basis, kind, np.zeros(n)).matrix - np.eye(n)
            ).max()
            gft_err = np.abs(
                spectral.build_operator(basis, kind, np.ones(n)).matrix - basis.gft
            ).max()
            c = float(rng.uniform(0.1, 1.5))
            frft_err = np.abs(
                spectral.build_operator(basis, kind, np.full(n, c)).matrix
                - spectral.gfrft(basis, c).matrix
            ).max()
            worst = max(worst, eye_err, gft_err, frft_err)
    return worst < 1e-8, f"max deviation {worst:.3e}"


def check_unitarity_additivity(seed=1, trials=15):
    """Type I is unitary on symmetric graphs and index-additive; type II
    demonstrably is not additive."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    best_counter = 0.0
    for _ in range(trials):
        n = int(rng.integers(6, 17))
        basis = _random_basis(rng, n)
        a = rng.uniform(0.1, 1.5, n)
        b = rng.uniform(0.1, 1.5, n)
        op_a = spectral.mpgfrft_i(basis, a).matrix
        unit_err = np.abs(op_a @ op_a.conj().T - np.eye(n)).max()
        add_err = np.abs(
            spectral.mpgfrft_i(basis, b).matrix @ op_a - spectral.mpgfrft_i(basis, a + b).matrix
        ).max()
        worst = max(worst, unit_err, add_err)
        t2 = np.abs(
            spectral.mpgfrft_ii(basis, b).matrix @ spectral.mpgfrft_ii(basis, a).matrix
            - spectral.mpgfrft_ii(basis, a + b).matrix
        ).max()
        best_counter = max(best_counter, t2)
    ok = worst < 1e-8 and best_counter > 1e-3
    return ok, f"type-I deviation {worst:.3e}, type-II additivity gap {best_counter:.3e}"


def check_form_equivalence(seed=2, trials=8):
    """Eigendecomposition and polynomial constructions agree; the cycle
    basis type-II coefficients match inverse-DFT values."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(6, 13))
        basis = _random_basis(rng, n)
        a = rng.uniform(0.1, 1.5, n)
        diff = np.abs(
            spectral.mpgfrft_i(basis, a).matrix - spectral.mpgfrft_i_poly(basis, a).matrix
        ).max()
        worst = max(worst, diff)
    cyc = spectral.cycle_shift_basis(16)
    a = np.random.default_rng(seed + 1).uniform(0.1, 1.5, 16)
    coeffs = spectral.type_ii_poly_coeffs(cyc, a)
    oracle = np.array([np.fft.ifft(cyc.eigvals ** a[n])[n] for n in range(16)])
    cyc_err = np.abs(coeffs - oracle).max()
    worst_ok = worst < 1e-6 and cyc_err < 1e-8
    return worst_ok, f"form gap {worst:.3e}, cycle coefficient gap {cyc_err:.3e}"


def check_gradients(seed=3, trials=5, step=1e-5):
    """Analytic loss gradients match central finite differences."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(5, 10))
        basis = _random_basis(rng, n)
        a = rng.uniform(0.2, 1.2, n)
        x = rng.standard_normal(n)
        y = rng.standard_normal(n)
        for kind in (spectral.KIND_I, spectral.KIND_II):

            def loss(av, _kind=kind):
                out = spectral.build_operator(basis, _kind, av).matrix @ x
                return mse_loss(out, y)

            out = spectral.build_operator(basis, kind, a).matrix @ x
            u = (2.0 / n) * (out - y)
            g = loss_grad_wrt_orders(basis, kind, a, u, x)
            fd = np.empty(n)
            for k in range(n):
                ap, am = a.copy(), a.copy()
                ap[k] += step
                am[k] -= step
                fd[k] = (loss(ap) - loss(am)) / (2 * step)
            rel = np.abs(g - fd).max() / max(np.abs(fd).max(), 1e-12)
            worst = max(worst, rel)
    return worst < 1e-4, f"max relative gradient error {worst:.3e}"


def check_single_coefficient_compression(seed=4, trials=25):
    """Signal-adapted compression retaining one coefficient is lossless."""
    rng = np.random.default_rng(seed)
    worst_re = 0.0
    for _ in range(trials):
        n = int(rng.integers(8, 65))
        x = rng.standard_normal(n)
        _, report = compress_adapted(x, 1.0 / n, seed=int(rng.integers(1 << 30)))
        worst_re = max(worst_re, report.re)
    return worst_re < 1e-10, f"max relative error {worst_re:.3e}"


def check_dna_chaos_involutions(seed=5):
    """DNA encode/decode and XOR round trips, chaotic permutation bijectivity."""
    rng = np.random.default_rng(seed)
    data = rng.integers(0, 256, size=512, dtype=np.uint8)
    for rule in range(1, 9):
        if not np.array_equal(crypto.dna_decode(crypto.dna_encode(data, rule), rule), data):
            return False, f"DNA round trip failed for rule {rule}"
    mask = crypto.dna_encode(rng.integers(0, 256, size=512, dtype=np.uint8), 1)
    codes = crypto.dna_encode(data, 1)
    if not np.array_equal(crypto.dna_xor(crypto.dna_xor(codes, mask), mask), codes):
        return False, "DNA XOR is not an involution"
    key = crypto.ChaosKey(0.3, 3.99)
    for n in (1, 17, 1000):
        perm = crypto.chaotic_permutation(key, n)
        if not np.array_equal(np.sort(perm), np.arange(n)):
            return False, f"chaotic permutation is not a bijection for n={n}"
    cyc = build_cycle_graph(8)  # exercised for side effects: valid small graph
    assert cyc.is_symmetric
    return True, "all involution and bijection checks passed"


CHECKS = [
    ("reduction-identities", check_reduction_identities),
    ("unitarity-additivity", check_unitarity_additivity),
    ("form-equivalence", check_form_equivalence),
    ("gradient-correctness", check_gradients),
    ("single-coefficient-compression", check_single_coefficient_compression),
    ("dna-chaos-involutions", check_dna_chaos_involutions),
]


def run_selftest(stream=None):
    """Run every suite, print one line per property, return failure count."""
    import sys

    stream = stream or sys.stdout
    failures = 0
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        status = "PASS" if ok else "FAIL"
        if not ok:
            failures += 1
        print(f"[{status}] {name}: {detail}", file=stream)
    return failures
