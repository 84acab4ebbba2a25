"""Completely positive maps between matrix algebras and their Lie-theoretic symmetries.

A map ``Phi: M_n -> M_m`` is stored by its Choi matrix

    C = sum_{ij} e_ij (x) Phi(e_ij)          (shape (n*m, n*m), unnormalized)

so that ``Phi`` is completely positive iff ``C >= 0``.  Kraus families
``Phi(x) = sum_j K_j x K_j^*`` are derived from ``C`` on demand.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import numkernel as nk
from .errors import NotCP, NotPSD, NotState, NotUnital, ShapeMismatch
from .sampling import as_rng, random_kraus, random_unitary, random_vector
from .staralg import StarAlgebra

KRAUS_CUTOFF = 1e-10


def _matrix_units(n: int) -> np.ndarray:
    return np.eye(n * n, dtype=complex).reshape(n * n, n, n)


def choi_of(kraus: Sequence[np.ndarray]) -> np.ndarray:
    ks = [np.asarray(k, dtype=complex) for k in kraus]
    if not ks:
        raise ShapeMismatch("empty Kraus family")
    m, n = ks[0].shape
    if any(k.shape != (m, n) for k in ks):
        raise ShapeMismatch("Kraus operators must share a shape")
    # vec_j[i*m + a] = K_j[a, i]
    vecs = np.stack([k.T.reshape(-1) for k in ks], axis=1)
    return vecs @ vecs.conj().T


def kraus_of(choi, in_dim: int, cutoff: float = KRAUS_CUTOFF) -> list[np.ndarray]:
    """Canonical (orthogonal) Kraus family from a PSD Choi matrix."""
    eig = nk.herm_eig(choi)
    lam, vecs = eig.eigenvalues, eig.eigenvectors
    scale = max(1.0, float(np.max(np.abs(lam))))
    if lam[0] < -cutoff * scale:
        raise NotPSD(f"Choi matrix has eigenvalue {lam[0]:.3e}")
    out_dim = len(lam) // in_dim
    keep = lam > cutoff * scale
    return [np.sqrt(l) * v.reshape(in_dim, out_dim).T for l, v in zip(lam[keep], vecs[:, keep].T)]


@dataclass(frozen=True, eq=False)
class CPMap:
    """Linear map ``M_in_dim -> M_out_dim`` held in Choi form (CP is a property, not a precondition)."""

    in_dim: int
    out_dim: int
    choi: np.ndarray

    def __post_init__(self):
        c = nk.as_matrix(self.choi)
        if c.shape != (self.in_dim * self.out_dim,) * 2:
            raise ShapeMismatch(f"Choi shape {c.shape} does not match {self.in_dim}x{self.out_dim}")
        c.setflags(write=False)
        object.__setattr__(self, "choi", c)

    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray]) -> "CPMap":
        m, n = np.shape(kraus[0])
        return cls(n, m, choi_of(kraus))

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], in_dim: int, out_dim: int | None = None) -> "CPMap":
        units = _matrix_units(in_dim)
        images = np.array([np.asarray(func(e), dtype=complex) for e in units])
        out_dim = images.shape[-1] if out_dim is None else out_dim
        blocks = images.reshape(in_dim, in_dim, out_dim, out_dim)
        return cls(in_dim, out_dim, blocks.transpose(0, 2, 1, 3).reshape(in_dim * out_dim, -1))

    @classmethod
    def identity(cls, n: int) -> "CPMap":
        return cls.from_kraus([np.eye(n)])

    @classmethod
    def state(cls, density) -> "CPMap":
        """The functional ``x -> trace(rho x)`` as a map into ``M_1``."""
        rho = nk.as_matrix(density)
        return cls(len(rho), 1, rho.T.copy())

    @classmethod
    def vector_state(cls, x) -> "CPMap":
        x = np.asarray(x, dtype=complex)
        x = x / np.linalg.norm(x)
        return cls.state(np.outer(x, x.conj()))

    @property
    def blocks(self) -> np.ndarray:
        """``blocks[a, x, b, y] = Phi(e_ab)[x, y]``."""
        n, m = self.in_dim, self.out_dim
        return self.choi.reshape(n, m, n, m)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        return np.einsum("ab,axby->xy", x, self.blocks)

    @cached_property
    def kraus(self) -> list[np.ndarray]:
        return kraus_of(self.choi, self.in_dim)

    def is_unital(self, tol: float = 1e-10) -> bool:
        return nk.opnorm(self(np.eye(self.in_dim)) - np.eye(self.out_dim)) <= tol

    def is_trace_preserving(self, tol: float = 1e-10) -> bool:
        # trace(Phi(x)) = trace(x) iff the partial trace over the output is I
        part = np.einsum("axbx->ab", self.blocks)
        return nk.opnorm(part - np.eye(self.in_dim)) <= tol

    def min_choi_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(nk.hermitian_part(self.choi))[0])

    def compose(self, other: "CPMap") -> "CPMap":
        """``self o other``."""
        if other.out_dim != self.in_dim:
            raise ShapeMismatch("composition dimensions disagree")
        return CPMap.from_function(lambda x: self(other(x)), other.in_dim, self.out_dim)

    def restrict_residual(self, other: "CPMap", algebra: StarAlgebra) -> float:
        """``max_i ||self(a_i) - other(a_i)||`` over an algebra basis."""
        return max(nk.opnorm(self(a) - other(a)) for a in algebra.basis)


@dataclass(frozen=True)
class CPVerdict:
    is_cp: bool
    min_eigenvalue: float
    witness: np.ndarray | None

    def __bool__(self) -> bool:
        return self.is_cp


def is_completely_positive(phi: CPMap, tol: float = 1e-10) -> CPVerdict:
    """Choi test.  On failure the witness is the eigenvector of the most negative Choi eigenvalue."""
    eig = nk.herm_eig(nk.hermitian_part(phi.choi))
    lam0 = float(eig.eigenvalues[0])
    scale = max(1.0, float(np.max(np.abs(eig.eigenvalues))))
    if lam0 >= -tol * scale:
        return CPVerdict(True, lam0, None)
    return CPVerdict(False, lam0, eig.eigenvectors[:, 0])


def amplify(phi: CPMap, k: int) -> CPMap:
    """``Phi_k = Phi (x) id_{M_k}`` acting blockwise on ``M_k(M_n)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n, m = phi.in_dim, phi.out_dim
    eye = np.eye(k)
    big = np.einsum("axby,ip,jq->iapxjbqy", phi.blocks, eye, eye)
    return CPMap(k * n, k * m, big.reshape(k * n * k * m, -1))


def amplified_min_eigenvalue(phi: CPMap, k: int, samples: int, rng) -> float:
    """Smallest eigenvalue of ``Phi_k(v v^*)`` over random unit vectors ``v`` in ``C^k (x) C^n``."""
    rng = as_rng(rng)
    big = amplify(phi, k)
    worst = np.inf
    for _ in range(samples):
        v = random_vector(rng, k * phi.in_dim)
        out = nk.hermitian_part(big(np.outer(v, v.conj())))
        worst = min(worst, float(np.linalg.eigvalsh(out)[0]))
    return worst


def positivity_by_amplification(phi: CPMap, samples: int = 40, rng=0, tol: float = 1e-10) -> bool:
    """Complete positivity decided by positivity of ``Phi_k`` on random rank-one inputs, ``k <= in_dim``."""
    rng = as_rng(rng)
    scale = max(1.0, nk.opnorm(phi.choi))
    return all(amplified_min_eigenvalue(phi, k, samples, rng) >= -tol * scale for k in range(1, phi.in_dim + 1))


def schwarz_gap(phi: CPMap, a, tol: float = 1e-10) -> np.ndarray:
    """``Phi(a^* a) - Phi(a)^* Phi(a)``; positive semidefinite for unital CP maps."""
    if not phi.is_unital(tol):
        raise NotUnital("Schwarz inequality needs a unital map")
    if not is_completely_positive(phi, tol):
        raise NotCP("Schwarz inequality needs a completely positive map")
    a = nk.as_matrix(a)
    pa = phi(a)
    return nk.hermitian_part(phi(a.conj().T @ a) - pa.conj().T @ pa)


def conjugate(phi: CPMap, g) -> CPMap:
    """``Phi_g(a) = g Phi(g^{-1} a g) g^{-1}``."""
    if phi.in_dim != phi.out_dim:
        raise ShapeMismatch("conjugation needs an endomorphism-shaped map")
    g = nk.as_matrix(g)
    gi = nk.inv(g)
    return CPMap.from_function(lambda a: g @ phi(gi @ a @ g) @ gi, phi.in_dim)


def find_non_cp_conjugate(phi: CPMap, seed: int = 0, tries: int = 200, tol: float = 1e-8):
    """Seeded search for an invertible ``g`` with ``Phi_g`` not completely positive.

    Returns ``(g, min_choi_eigenvalue)`` or ``None``.
    """
    rng = as_rng(seed)
    n = phi.in_dim
    for _ in range(tries):
        g = np.eye(n) + 2.0 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        if np.linalg.cond(g) > 1e6:
            continue
        lam = conjugate(phi, g).min_choi_eigenvalue()
        if lam < -tol:
            return g, lam
    return None


def isotropy_lie_algebra(phi: CPMap, algebra: StarAlgebra, rtol: float = 1e-9) -> np.ndarray:
    """Basis of ``{X in A : Phi([a, X]) = [Phi(a), X] for all a in A}``."""
    if phi.in_dim != algebra.n or phi.out_dim != algebra.n:
        raise ShapeMismatch("isotropy algebra needs Phi: M_n -> M_n with A inside M_n")
    images = [phi(a) for a in algebra.basis]
    cols = []
    for x in algebra.basis:
        cols.append(np.concatenate([(phi(a @ x - x @ a) - (fa @ x - x @ fa)).reshape(-1) for a, fa in zip(algebra.basis, images)]))
    kern = nk.null_space(np.stack(cols, axis=1), rtol)
    return np.tensordot(kern.T, algebra.basis, axes=(1, 0))


def lie_closure_residual(basis: np.ndarray) -> tuple[float, float]:
    """Worst projection residuals of ``X^*`` and ``[X, Y]`` onto ``span(basis)``."""
    if not len(basis):
        return 0.0, 0.0
    ortho = nk.orthonormal_matrix_basis(basis)
    star = max(np.linalg.norm(x.conj().T - nk.hs_project(x.conj().T, ortho, check=False)) for x in basis)
    brk = 0.0
    for x in basis:
        for y in basis:
            c = x @ y - y @ x
            brk = max(brk, float(np.linalg.norm(c - nk.hs_project(c, ortho, check=False))))
    return float(star), brk


def exp_membership_check(x, phi: CPMap, algebra: StarAlgebra, ts=None) -> float:
    """``max ||Phi(e^{tX} a e^{-tX}) - e^{tX} Phi(a) e^{-tX}||`` over ``t`` in the grid and basis ``a``."""
    ts = np.linspace(-1.0, 1.0, 9) if ts is None else ts
    worst = 0.0
    for t in ts:
        g = nk.mat_exp(t * np.asarray(x, dtype=complex))
        gi = nk.mat_exp(-t * np.asarray(x, dtype=complex))
        for a in algebra.basis:
            worst = max(worst, nk.opnorm(phi(g @ a @ gi) - g @ phi(a) @ gi))
    return worst


@dataclass(frozen=True, eq=False)
class State:
    """A state on a *-subalgebra of M_n, given by a density matrix."""

    algebra: StarAlgebra
    density: np.ndarray

    def __post_init__(self):
        rho = nk.as_matrix(self.density)
        if rho.shape != (self.algebra.n,) * 2:
            raise ShapeMismatch("density dimension differs from the algebra")
        if not nk.is_hermitian(rho) or abs(np.trace(rho) - 1) > 1e-10 or np.linalg.eigvalsh(nk.hermitian_part(rho))[0] < -1e-10:
            raise NotState("density must be Hermitian PSD with unit trace")
        object.__setattr__(self, "density", rho)

    @classmethod
    def vector(cls, algebra: StarAlgebra, x) -> "State":
        x = np.asarray(x, dtype=complex)
        x = x / np.linalg.norm(x)
        return cls(algebra, np.outer(x, x.conj()))

    @classmethod
    def trace(cls, algebra: StarAlgebra) -> "State":
        return cls(algebra, np.eye(algebra.n) / algebra.n)

    def __call__(self, a) -> complex:
        return complex(np.trace(self.density @ np.asarray(a)))

    def as_map(self) -> CPMap:
        return CPMap.state(self.density)


def random_unital_cp(rng, n: int, m: int, count: int | None = None) -> CPMap:
    rng = as_rng(rng)
    count = count if count is not None else max(1, -(-m // n)) + 1
    return CPMap.from_kraus(random_kraus(rng, n, m, count, unital=True))


def random_unitary_conjugation(rng, n: int) -> CPMap:
    return CPMap.from_kraus([random_unitary(as_rng(rng), n)])
