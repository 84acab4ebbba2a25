"""Dense complex matrix kernels: spectral calculus, exp/log/sqrt, polar factors,
null spaces and Hilbert-Schmidt projections.

Matrices are plain ``numpy.ndarray`` objects of complex dtype.  Subspaces of
matrix space are stored as stacked arrays of shape ``(d, n, n)`` whose slices
are orthonormal for the pairing ``<X, Y> = trace(Y^* X)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    BasisNotOrthonormal,
    NoConvergence,
    NotHermitian,
    NotPositiveDefinite,
    NotPSD,
    ShapeMismatch,
    Singular,
)

RTOL = 1e-10


def as_matrix(m, square: bool = True) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or (square and a.shape[0] != a.shape[1]):
        raise ShapeMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def dag(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def opnorm(m: np.ndarray) -> float:
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    if m.ndim == 1:
        return float(np.linalg.norm(m))
    return float(np.linalg.norm(m, 2))


def hs_inner(x: np.ndarray, y: np.ndarray) -> complex:
    """``<x, y> = trace(y^* x)``, linear in the first slot."""
    return complex(np.vdot(y, x))


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return (m + dag(m)) / 2


def is_hermitian(m: np.ndarray, tol: float = RTOL) -> bool:
    m = np.asarray(m)
    return opnorm(m - dag(m)) <= tol * max(1.0, opnorm(m))


def _check_hermitian(m, tol):
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        raise NotHermitian(f"||M - M*|| = {opnorm(m - dag(m)):.3e} exceeds tolerance")
    return hermitian_part(m)


@dataclass(frozen=True)
class HermEig:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ dag(u)

    def apply(self, func) -> np.ndarray:
        """Spectral calculus: ``U diag(func(lambda)) U^*``."""
        u = self.eigenvectors
        return (u * func(self.eigenvalues)) @ dag(u)


def _fix_phases(vecs: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    vecs = vecs.copy()
    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        idx = np.flatnonzero(np.abs(col) > tol)
        if idx.size:
            c = col[idx[0]]
            vecs[:, k] = col * (abs(c) / c)
    return vecs


def herm_eig(m, tol: float = RTOL) -> HermEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Each eigenvector is rotated so that its first nonzero entry is real and
    positive, which makes outputs deterministic for nondegenerate spectra.
    """
    h = _check_hermitian(m, tol)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NoConvergence(str(exc)) from exc
    return HermEig(w, _fix_phases(v))


def mat_exp(m) -> np.ndarray:
    """Matrix exponential.

    Hermitian and anti-Hermitian arguments go through the spectral route, so
    ``exp`` of an anti-Hermitian matrix is unitary to working precision.  All
    other inputs use Pade scaling-and-squaring.
    """
    a = as_matrix(m)
    if not a.size:
        return a.copy()
    if is_hermitian(a, 1e-14):
        return herm_eig(a).apply(np.exp)
    if is_hermitian(1j * a, 1e-14):
        return herm_eig(-1j * a).apply(lambda w: np.exp(1j * w))
    return scipy.linalg.expm(a)


def mat_log_pd(m, tol: float = RTOL) -> np.ndarray:
    eig = herm_eig(m)
    scale = max(1.0, float(np.max(np.abs(eig.eigenvalues))))
    if eig.eigenvalues[0] <= tol * scale:
        raise NotPositiveDefinite(f"smallest eigenvalue {eig.eigenvalues[0]:.3e}")
    return hermitian_part(eig.apply(np.log))


def mat_sqrt_psd(m, tol: float = RTOL) -> np.ndarray:
    eig = herm_eig(m)
    scale = max(1.0, float(np.max(np.abs(eig.eigenvalues))))
    if eig.eigenvalues[0] < -tol * scale:
        raise NotPSD(f"eigenvalue {eig.eigenvalues[0]:.3e} below -tolerance")
    return hermitian_part(eig.apply(lambda w: np.sqrt(np.clip(w, 0.0, None))))


def mat_inv_sqrt_pd(m, tol: float = RTOL) -> np.ndarray:
    eig = herm_eig(m)
    if eig.eigenvalues[0] <= tol * max(1.0, eig.eigenvalues[-1]):
        raise NotPositiveDefinite(f"smallest eigenvalue {eig.eigenvalues[0]:.3e}")
    return hermitian_part(eig.apply(lambda w: 1.0 / np.sqrt(w)))


def polar_factor(m, tol: float = 1e-14) -> tuple[np.ndarray, np.ndarray]:
    """Polar decomposition ``M = U P`` with ``U`` unitary and ``P > 0``."""
    a = as_matrix(m)
    w, s, vh = np.linalg.svd(a)
    if s.size and s[-1] <= tol * max(s[0], 1.0):
        raise Singular(f"smallest singular value {s[-1]:.3e}")
    u = w @ vh
    p = hermitian_part((dag(vh) * s) @ vh)
    return u, p


def inv(m) -> np.ndarray:
    a = as_matrix(m)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size and s[-1] <= 1e-14 * max(s[0], 1.0):
        raise Singular(f"smallest singular value {s[-1]:.3e}")
    return np.linalg.inv(a)


def inv_dag(m) -> np.ndarray:
    """``(m^{-1})^*``."""
    return dag(inv(m))


def null_space(lmat, rtol: float = RTOL) -> np.ndarray:
    """Orthonormal columns spanning the kernel of ``lmat``.

    The cutoff is ``rtol`` times the largest singular value; a zero map has the
    whole domain as kernel.
    """
    a = np.asarray(lmat, dtype=complex)
    ncols = a.shape[1]
    if a.shape[0] == 0 or ncols == 0:
        return np.eye(ncols, dtype=complex)
    _, s, vh = np.linalg.svd(a)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.eye(ncols, dtype=complex)
    rank = int(np.sum(s > rtol * smax))
    return dag(vh[rank:])


def range_basis(vecs, rtol: float = RTOL) -> np.ndarray:
    """Orthonormal columns spanning the column space of ``vecs``."""
    a = np.asarray(vecs, dtype=complex)
    if a.size == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if not s.size or s[0] == 0.0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    return u[:, : int(np.sum(s > rtol * s[0]))]


def numerical_rank(vecs, rtol: float = RTOL) -> int:
    return range_basis(vecs, rtol).shape[1]


def orthonormal_matrix_basis(mats, rtol: float = RTOL) -> np.ndarray:
    """Hilbert-Schmidt orthonormal basis ``(d, n, n)`` for the span of ``mats``."""
    mats = np.asarray(mats, dtype=complex)
    if mats.ndim != 3:
        raise ShapeMismatch("expected a stack of square matrices")
    k, n, _ = mats.shape
    cols = range_basis(mats.reshape(k, n * n).T, rtol)
    return cols.T.reshape(-1, n, n)


def check_orthonormal(basis: np.ndarray, tol: float = 1e-10) -> None:
    basis = np.asarray(basis, dtype=complex)
    flat = basis.reshape(basis.shape[0], -1)
    gram = flat.conj() @ flat.T
    if gram.size and opnorm(gram - np.eye(len(gram))) > tol:
        raise BasisNotOrthonormal(f"Gram deviation {opnorm(gram - np.eye(len(gram))):.3e}")


def hs_coords(m, basis: np.ndarray) -> np.ndarray:
    """Coefficients ``c_k = <m, S_k>`` of ``m`` against an orthonormal basis."""
    basis = np.asarray(basis)
    return basis.reshape(basis.shape[0], -1).conj() @ np.asarray(m, dtype=complex).reshape(-1)


def hs_combine(coeffs, basis: np.ndarray) -> np.ndarray:
    return np.tensordot(np.asarray(coeffs, dtype=complex), basis, axes=(0, 0))


def hs_project(m, basis, check: bool = True) -> np.ndarray:
    """Hilbert-Schmidt orthogonal projection of ``m`` onto ``span(basis)``."""
    basis = np.asarray(basis, dtype=complex)
    m = as_matrix(m, square=False)
    if basis.shape[0] == 0:
        return np.zeros_like(m)
    if basis.shape[1:] != m.shape:
        raise ShapeMismatch(f"basis elements {basis.shape[1:]} vs matrix {m.shape}")
    if check:
        check_orthonormal(basis)
    return hs_combine(hs_coords(m, basis), basis)
