"""Graph Fourier and multiple-parameter fractional operators.

The graph Fourier matrix F is the inverse eigenvector matrix of the
chosen shift operator. The type-I multiple-parameter fractional
transform raises each eigenvalue of F to its own order, the type-II
variant applies the orders inside the coefficients of a polynomial in
F. Both require F to have pairwise distinct eigenvalues.

All fractional powers use the principal logarithm, Arg in (-pi, pi].
Eigenvalues of both the shift operator and F are sorted ascending by
real part, then imaginary part, so operators are reproducible.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateSpectrumError,
    InvalidParameterError,
    NotInvertibleError,
    ZeroEigenvalueError,
)
from .graphs import ShiftOperator
from .validation import as_order_vector, as_vector

KIND_GFRFT = "gfrft"
KIND_I = "mpgfrft_i"
KIND_II = "mpgfrft_ii"
KINDS = (KIND_GFRFT, KIND_I, KIND_II)

DEFAULT_DISTINCTNESS_TOL = 1e-8
VANDERMONDE_COND_LIMIT = 1e12
TYPE_II_SINGULAR_TOL = 1e-10

# powers of F are precomputed eagerly up to this size, lazily above
_EAGER_POWERS_LIMIT = 128


def frac_power(lam, a):
    """Principal-branch fractional power lam**a.

    lam = 0 is only defined for a >= 0 (0 for a > 0, 1 for a = 0).
    """
    lam = complex(lam)
    a = float(a)
    if lam == 0:
        if a > 0:
            return 0j
        if a == 0:
            return 1 + 0j
        raise ZeroEigenvalueError("fractional power of 0 undefined for negative order")
    return np.exp(a * np.log(lam))


def _frac_powers(lams, a):
    """Vectorized lam_k ** a_k with the principal branch.

    Basis eigenvalues are never zero (F is an inverse matrix), so the
    zero case only guards against hand-built inputs.
    """
    lams = np.asarray(lams, dtype=complex)
    a = np.asarray(a, dtype=float)
    if np.any(lams == 0):
        raise ZeroEigenvalueError("fractional powers need nonzero eigenvalues")
    return np.exp(a * np.log(lams))


def _sort_eig(vals, vecs):
    order = np.lexsort((vals.imag, vals.real))
    return vals[order], vecs[:, order]


@dataclass
class SpectralBasis:
    """Eigendecomposition of a GFT matrix plus cached polynomial data.

    gft:                 F (= U^{-1} of the shift operator)
    eigvecs / eigvals:   V, lambda with F V = V diag(lambda)
    eigvecs_inv:         V^{-1}
    vandermonde_coeffs:  P = Vandermonde(lambda)^{-1}
    """

    gft: np.ndarray
    eigvecs: np.ndarray
    eigvals: np.ndarray
    eigvecs_inv: np.ndarray
    vandermonde_coeffs: np.ndarray
    vandermonde_cond: float
    conditioning_warning: str | None = None
    _powers: list = field(default_factory=list, repr=False)

    @property
    def n(self):
        return self.gft.shape[0]

    @property
    def gft_powers(self):
        """[F^0, ..., F^{N-1}], cached."""
        if not self._powers:
            n = self.n
            powers = [np.eye(n, dtype=complex)]
            F = self.gft.astype(complex)
            for _ in range(n - 1):
                powers.append(powers[-1] @ F)
            self._powers = powers
        return self._powers

    @classmethod
    def from_transform(cls, F, distinctness_tol=DEFAULT_DISTINCTNESS_TOL):
        """Build a basis by eigendecomposing a given GFT matrix."""
        F = np.asarray(F)
        n = F.shape[0]
        lam, V = np.linalg.eig(F)
        lam, V = _sort_eig(lam, V)
        scale = max(np.abs(lam).max(), 1e-300)
        gaps = np.abs(lam[:, None] - lam[None, :]) + np.eye(n) * (2 * scale)
        min_gap = gaps.min()
        if min_gap <= distinctness_tol * scale:
            i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
            raise DegenerateSpectrumError(
                f"GFT eigenvalues {i} and {j} are numerically equal "
                f"(gap {min_gap:.3e}, tolerance {distinctness_tol * scale:.3e})",
                gap=min_gap,
            )
        Vinv = np.linalg.inv(V)
        vand = lam[:, None] ** np.arange(n)[None, :]
        P = np.linalg.solve(vand, np.eye(n, dtype=complex))
        cond = float(np.linalg.cond(vand))
        warning = None
        if cond > VANDERMONDE_COND_LIMIT:
            warning = f"Vandermonde condition estimate {cond:.3e} exceeds {VANDERMONDE_COND_LIMIT:.0e}"
            warnings.warn(warning, RuntimeWarning, stacklevel=2)
        basis = cls(
            gft=F.astype(complex),
            eigvecs=V,
            eigvals=lam,
            eigvecs_inv=Vinv,
            vandermonde_coeffs=P,
            vandermonde_cond=cond,
            conditioning_warning=warning,
        )
        if n <= _EAGER_POWERS_LIMIT:
            basis.gft_powers  # noqa: B018 - populate cache
        return basis


def gft_basis(z, distinctness_tol=DEFAULT_DISTINCTNESS_TOL):
    """Spectral basis from a shift operator: F = U^{-1}, then F eigendecomposed.

    Symmetric shift operators use the symmetric eigensolver, so F is
    real orthogonal. Eigenvalues of Z are sorted ascending by real then
    imaginary part, fixing the column order of U.
    """
    Z = z.matrix if isinstance(z, ShiftOperator) else np.asarray(z)
    if np.allclose(Z, Z.T, rtol=0, atol=1e-13) and np.isrealobj(Z):
        _, U = np.linalg.eigh(Z)  # eigh sorts ascending already
        F = U.T
    else:
        w, U = np.linalg.eig(Z)
        w, U = _sort_eig(w, U)
        try:
            F = np.linalg.inv(U)
        except np.linalg.LinAlgError as exc:
            raise DegenerateSpectrumError(f"shift operator not diagonalizable: {exc}") from exc
    return SpectralBasis.from_transform(F, distinctness_tol=distinctness_tol)


def cycle_shift_basis(n):
    """Analytic basis of the N-periodic cyclic shift transform.

    F is the circulant shift matrix; its eigenvalues are the N distinct
    roots of unity exp(-2*pi*i*k/N) with the discrete Fourier columns as
    eigenvectors. On this basis the type-II coefficients coincide with
    inverse-DFT entries, matching the classical multiple-parameter
    discrete fractional Fourier transform.
    """
    k = np.arange(n)
    F = np.roll(np.eye(n, dtype=complex), 1, axis=0)
    V = np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
    lam = np.exp(-2j * np.pi * k / n)
    vand = lam[:, None] ** np.arange(n)[None, :]
    P = np.linalg.solve(vand, np.eye(n, dtype=complex))
    basis = SpectralBasis(
        gft=F,
        eigvecs=V,
        eigvals=lam,
        eigvecs_inv=V.conj().T,
        vandermonde_coeffs=P,
        vandermonde_cond=float(np.linalg.cond(vand)),
    )
    basis.gft_powers
    return basis


@dataclass
class FractionalOperator:
    """A concrete fractional transform matrix with its kind and order vector."""

    matrix: np.ndarray
    kind: str
    order: np.ndarray
    basis: SpectralBasis
    conditioning_warning: str | None = None

    @property
    def n(self):
        return self.matrix.shape[0]


def _check_order(basis, a):
    return as_order_vector(a, basis.n)


def mpgfrft_i(basis, a):
    """Type-I operator via the eigendecomposition form V diag(lam_k^{a_k}) V^{-1}."""
    a = _check_order(basis, a)
    diag = _frac_powers(basis.eigvals, a)
    matrix = (basis.eigvecs * diag[None, :]) @ basis.eigvecs_inv
    return FractionalOperator(matrix=matrix, kind=KIND_I, order=a, basis=basis)


def gfrft(basis, a):
    """Scalar-order fractional transform: the type-I operator with a constant order vector."""
    a_vec = np.full(basis.n, float(a))
    op = mpgfrft_i(basis, a_vec)
    return FractionalOperator(matrix=op.matrix, kind=KIND_GFRFT, order=a_vec, basis=basis)


def type_i_poly_coeffs(basis, a):
    """Polynomial coefficients C_n = sum_j P[n, j] * lam_j^{a_j}."""
    a = _check_order(basis, a)
    return basis.vandermonde_coeffs @ _frac_powers(basis.eigvals, a)


def mpgfrft_i_poly(basis, a):
    """Type-I operator through its polynomial representation in powers of F."""
    a = _check_order(basis, a)
    coeffs = type_i_poly_coeffs(basis, a)
    matrix = np.einsum("n,nij->ij", coeffs, np.stack(basis.gft_powers))
    return FractionalOperator(
        matrix=matrix,
        kind=KIND_I,
        order=a,
        basis=basis,
        conditioning_warning=basis.conditioning_warning,
    )


def type_ii_poly_coeffs(basis, a):
    """Type-II coefficients C_n = sum_j P[n, j] * lam_j^{a_n}."""
    a = _check_order(basis, a)
    lam = basis.eigvals
    powers = np.exp(a[:, None] * np.log(lam[None, :]))  # row n: lam_j^{a_n}
    return (basis.vandermonde_coeffs * powers).sum(axis=1)


def mpgfrft_ii(basis, a):
    """Type-II operator: sum_n C_n F^n with orders applied inside the coefficients."""
    a = _check_order(basis, a)
    if np.any(basis.eigvals == 0):
        raise ZeroEigenvalueError("type-II coefficients need nonzero eigenvalues")
    coeffs = type_ii_poly_coeffs(basis, a)
    matrix = np.einsum("n,nij->ij", coeffs, np.stack(basis.gft_powers))
    return FractionalOperator(
        matrix=matrix,
        kind=KIND_II,
        order=a,
        basis=basis,
        conditioning_warning=basis.conditioning_warning,
    )


def build_operator(basis, kind, a):
    """Construct an operator of the requested kind."""
    if kind == KIND_GFRFT:
        a = np.asarray(a, dtype=float)
        scalar = float(a) if a.ndim == 0 else float(a.ravel()[0])
        return gfrft(basis, scalar)
    if kind == KIND_I:
        return mpgfrft_i(basis, a)
    if kind == KIND_II:
        return mpgfrft_ii(basis, a)
    raise InvalidParameterError(f"unknown transform kind {kind!r}")


def type_ii_invertibility(basis, a, tol=TYPE_II_SINGULAR_TOL):
    """Invertibility check for type II: all eigenvalues of the operator
    (d_j = sum_n C_n lam_j^n) must be bounded away from zero.

    Returns (flag, min |d_j|).
    """
    coeffs = type_ii_poly_coeffs(basis, a)
    vand = basis.eigvals[:, None] ** np.arange(basis.n)[None, :]
    d = vand @ coeffs
    min_abs = float(np.abs(d).min())
    return min_abs > tol, min_abs


def apply(op, x):
    """Forward transform: matrix-vector product."""
    x = as_vector(x, op.n, name="signal")
    return op.matrix @ x.astype(complex)


def inverse_apply(op, xhat):
    """Inverse transform.

    Type I (and scalar orders) invert exactly through index additivity
    by applying the operator built with the negated order vector; type
    II solves the linear system with the operator matrix.
    """
    xhat = as_vector(xhat, op.n, name="spectrum")
    if op.kind in (KIND_I, KIND_GFRFT):
        inv_op = mpgfrft_i(op.basis, -op.order)
        return inv_op.matrix @ xhat.astype(complex)
    ok, min_abs = type_ii_invertibility(op.basis, op.order)
    if not ok:
        raise NotInvertibleError(
            f"type-II operator is numerically singular (min |d_j| = {min_abs:.3e})"
        )
    return np.linalg.solve(op.matrix, xhat.astype(complex))


def inverse_operator_matrix(op):
    """Dense inverse of an operator (type I via -a, type II via solve)."""
    if op.kind in (KIND_I, KIND_GFRFT):
        return mpgfrft_i(op.basis, -op.order).matrix
    ok, min_abs = type_ii_invertibility(op.basis, op.order)
    if not ok:
        raise NotInvertibleError(
            f"type-II operator is numerically singular (min |d_j| = {min_abs:.3e})"
        )
    return np.linalg.solve(op.matrix, np.eye(op.n, dtype=complex))


@dataclass
class GradientTensor:
    """Stack of N matrices; slice k is the derivative of the operator w.r.t. a_k."""

    slices: np.ndarray  # shape (N, N, N)

    def __len__(self):
        return self.slices.shape[0]

    def __getitem__(self, k):
        return self.slices[k]


def _log_eigvals(basis):
    lam = basis.eigvals
    if np.any(lam == 0):
        raise ZeroEigenvalueError("gradient undefined: basis has a zero eigenvalue")
    return np.log(lam)


def grad_mpgfrft_i(basis, a):
    """Derivative tensor of the type-I operator.

    Slice k = (sum_n P[n, k] F^n) * lam_k^{a_k} * ln(lam_k).
    """
    a = _check_order(basis, a)
    loglam = _log_eigvals(basis)
    scale = _frac_powers(basis.eigvals, a) * loglam
    powers = np.stack(basis.gft_powers)
    base = np.einsum("nk,nij->kij", basis.vandermonde_coeffs, powers)
    return GradientTensor(slices=base * scale[:, None, None])


def grad_mpgfrft_ii(basis, a):
    """Derivative tensor of the type-II operator.

    Slice k = (sum_j P[k, j] lam_j^{a_k} ln lam_j) * F^k.
    """
    a = _check_order(basis, a)
    lam = basis.eigvals
    loglam = _log_eigvals(basis)
    powmat = np.exp(a[:, None] * loglam[None, :])  # lam_j^{a_k}
    scal = (basis.vandermonde_coeffs * powmat * loglam[None, :]).sum(axis=1)
    powers = np.stack(basis.gft_powers)
    return GradientTensor(slices=scal[:, None, None] * powers)


def grad_apply(basis, kind, a, x):
    """Matrix whose column k is (d operator / d a_k) @ x.

    Memory-light path for training loops: avoids materializing the full
    third-order tensor.
    """
    a = _check_order(basis, a)
    x = as_vector(x, basis.n, name="signal").astype(complex)
    lam = basis.eigvals
    loglam = _log_eigvals(basis)
    if kind in (KIND_I, KIND_GFRFT):
        # sum_n P[n,k] F^n = v_k w_k^T (rank one), so D_k x = scale_k * v_k * (w_k @ x)
        scale = _frac_powers(lam, a) * loglam
        wx = basis.eigvecs_inv @ x
        return basis.eigvecs * (scale * wx)[None, :]
    if kind == KIND_II:
        powmat = np.exp(a[:, None] * loglam[None, :])
        scal = (basis.vandermonde_coeffs * powmat * loglam[None, :]).sum(axis=1)
        cols = np.empty((basis.n, basis.n), dtype=complex)
        Fx = x
        F = basis.gft
        for k in range(basis.n):
            cols[:, k] = scal[k] * Fx
            Fx = F @ Fx
        return cols
    raise InvalidParameterError(f"unknown transform kind {kind!r}")


def orders_to_json(a):
    """Serialize an order vector as a JSON array with 17 significant digits."""
    import json

    return json.dumps([float(f"{v:.17g}") for v in np.asarray(a, dtype=float)])


def orders_from_json(text):
    import json

    return np.asarray(json.loads(text), dtype=float)


def operator_to_csv(op, path):
    """Export an operator matrix as CSV of interleaved real/imag parts."""
    m = op.matrix
    inter = np.empty((m.shape[0], 2 * m.shape[1]))
    inter[:, 0::2] = m.real
    inter[:, 1::2] = m.imag
    np.savetxt(path, inter, delimiter=",", fmt="%.17g")


def operator_matrix_from_csv(path):
    inter = np.loadtxt(path, delimiter=",", ndmin=2)
    return inter[:, 0::2] + 1j * inter[:, 1::2]
