"""Unital *-subalgebras of M_n, commutants, idempotents and conditional expectations."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import numkernel as nk
from .errors import DimensionOverflow, NotIdempotent, NotProjection, NotSubalgebra, ShapeMismatch
from .sampling import as_rng, ginibre

MEMBER_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class StarAlgebra:
    """Linear subspace of M_n given by a Hilbert-Schmidt orthonormal basis ``(d, n, n)``."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 3 or b.shape[1] != b.shape[2]:
            raise ShapeMismatch(f"basis must have shape (d, n, n), got {b.shape}")
        nk.check_orthonormal(b)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @classmethod
    def span(cls, mats, rtol: float = nk.RTOL) -> "StarAlgebra":
        return cls(nk.orthonormal_matrix_basis(mats, rtol))

    @classmethod
    def full(cls, n: int) -> "StarAlgebra":
        return cls(np.eye(n * n, dtype=complex).reshape(n * n, n, n))

    @classmethod
    def scalars(cls, n: int) -> "StarAlgebra":
        return cls((np.eye(n, dtype=complex) / np.sqrt(n))[None])

    @classmethod
    def diagonal(cls, n: int) -> "StarAlgebra":
        b = np.zeros((n, n, n), dtype=complex)
        b[np.arange(n), np.arange(n), np.arange(n)] = 1.0
        return cls(b)

    @property
    def n(self) -> int:
        return self.basis.shape[1]

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def __len__(self) -> int:
        return self.dim

    def coords(self, x) -> np.ndarray:
        return nk.hs_coords(x, self.basis)

    def element(self, coeffs) -> np.ndarray:
        return nk.hs_combine(coeffs, self.basis)

    def project(self, x) -> np.ndarray:
        return nk.hs_project(x, self.basis, check=False)

    def residual(self, x) -> float:
        x = np.asarray(x, dtype=complex)
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x, tol: float = MEMBER_TOL) -> bool:
        """Membership by projection residual ``<= tol * max(1, ||x||)``."""
        return self.residual(x) <= tol * max(1.0, float(np.linalg.norm(x)))

    @property
    def contains_unit(self) -> bool:
        return self.contains(np.eye(self.n))

    @cached_property
    def unit_coords(self) -> np.ndarray:
        return self.coords(np.eye(self.n))

    @cached_property
    def structure(self) -> np.ndarray:
        """``c[i, j, k] = <a_i a_j, a_k>`` so that ``a_i a_j = sum_k c[i, j, k] a_k`` on closed spans."""
        prods = np.einsum("iab,jbc->ijac", self.basis, self.basis)
        return np.einsum("ijac,kac->ijk", prods, self.basis.conj())

    def left_mult(self, x) -> np.ndarray:
        """Matrix of ``y -> x y`` acting on coordinate vectors."""
        c = self.coords(x)
        return np.einsum("i,ijk->kj", c, self.structure)

    def adjoint_matrix(self) -> np.ndarray:
        """Antilinear adjoint in coordinates: ``coords(y^*) = M @ conj(coords(y))``."""
        return np.stack([self.coords(a.conj().T) for a in self.basis], axis=1)

    def closure_residual(self) -> float:
        worst = 0.0
        for a in self.basis:
            worst = max(worst, self.residual(a.conj().T))
            for b in self.basis:
                worst = max(worst, self.residual(a @ b))
        return worst

    def is_star_closed(self, tol: float = 1e-10) -> bool:
        return all(self.residual(a.conj().T) <= tol for a in self.basis)

    def is_subalgebra_of(self, other: "StarAlgebra", tol: float = MEMBER_TOL) -> bool:
        return all(other.contains(b, tol) for b in self.basis)

    # random elements -------------------------------------------------------
    def random_element(self, rng) -> np.ndarray:
        rng = as_rng(rng)
        return self.project(ginibre(rng, self.n))

    def random_hermitian(self, rng) -> np.ndarray:
        return nk.hermitian_part(self.random_element(rng))

    def random_unitary(self, rng, scale: float = np.pi) -> np.ndarray:
        return nk.mat_exp(1j * scale * self.random_hermitian(rng))

    def random_positive(self, rng, spread: float = 1.0) -> np.ndarray:
        """Positive invertible element ``exp(H)`` with ``H`` Hermitian in the algebra."""
        return nk.mat_exp(spread * self.random_hermitian(rng))

    def random_invertible(self, rng, cond_max: float = 100.0) -> np.ndarray:
        """Random invertible element ``u exp(H)`` with condition number at most ``cond_max``."""
        rng = as_rng(rng)
        h = self.random_hermitian(rng)
        w = np.linalg.eigvalsh(h)
        spread = w[-1] - w[0]
        if self.contains_unit:
            # centre the spectrum so that a nearly scalar h is not blown up with the scale
            h = h - 0.5 * (w[-1] + w[0]) * np.eye(self.n)
        target = np.log(cond_max) * rng.uniform(0.3, 1.0)
        scale = target / spread if spread > 1e-12 else 0.0
        return self.random_unitary(rng) @ nk.mat_exp(scale * h)


def algebra_from_generators(n: int, gens=(), rtol: float = nk.RTOL) -> StarAlgebra:
    """Smallest unital *-subalgebra of M_n containing ``gens``."""
    mats = [np.eye(n, dtype=complex)]
    for g in gens:
        g = nk.as_matrix(g)
        if g.shape != (n, n):
            raise ShapeMismatch(f"generator of shape {g.shape} in M_{n}")
        mats += [g, g.conj().T]
    basis = nk.orthonormal_matrix_basis(np.array(mats), rtol)
    for _ in range(n * n + 1):
        d = basis.shape[0]
        prods = np.einsum("iab,jbc->ijac", basis, basis).reshape(-1, n, n)
        stack = np.concatenate([basis, prods, nk.dag(basis)])
        basis = nk.orthonormal_matrix_basis(stack, rtol)
        if basis.shape[0] > n * n:
            raise DimensionOverflow(f"span reached {basis.shape[0]} > {n * n}")
        if basis.shape[0] == d:
            return StarAlgebra(basis)
    raise DimensionOverflow("closure did not stabilize")  # pragma: no cover


def commutant(s, algebra: StarAlgebra, rtol: float = 1e-9) -> StarAlgebra:
    """``{x in A : x s = s x for every s in S}``.

    The result is *-closed whenever ``S`` is (e.g. a set of projections).
    """
    s = [nk.as_matrix(m) for m in s]
    if not s:
        return algebra
    cols = [np.concatenate([(a @ m - m @ a).reshape(-1) for m in s]) for a in algebra.basis]
    kern = nk.null_space(np.stack(cols, axis=1), rtol)
    return StarAlgebra(np.tensordot(kern.T, algebra.basis, axes=(1, 0)))


@dataclass(frozen=True, eq=False)
class Idempotent:
    matrix: np.ndarray
    tol: float = 1e-10

    def __post_init__(self):
        p = nk.as_matrix(self.matrix)
        if nk.opnorm(p @ p - p) > self.tol * max(1.0, nk.opnorm(p)):
            raise NotIdempotent(f"||p^2 - p|| = {nk.opnorm(p @ p - p):.3e}")
        object.__setattr__(self, "matrix", p)

    @property
    def is_projection(self) -> bool:
        return nk.opnorm(self.matrix - self.matrix.conj().T) <= self.tol * max(1.0, nk.opnorm(self.matrix))

    @property
    def complement(self) -> "Idempotent":
        return Idempotent(np.eye(len(self.matrix)) - self.matrix, self.tol)


def _as_idempotent(p) -> Idempotent:
    return p if isinstance(p, Idempotent) else Idempotent(p)


def _as_projection(p) -> np.ndarray:
    try:
        q = _as_idempotent(p)
    except NotIdempotent as exc:
        raise NotProjection(str(exc)) from exc
    if not q.is_projection:
        raise NotProjection("idempotent is not self-adjoint")
    return nk.hermitian_part(q.matrix)


def idempotent_equivalent(p, q, tol: float = 1e-10) -> bool:
    """``p ~ q`` iff ``p q = q`` and ``q p = p``."""
    p, q = _as_idempotent(p).matrix, _as_idempotent(q).matrix
    return nk.opnorm(p @ q - q) <= tol and nk.opnorm(q @ p - p) <= tol


def isotropy_class_member(g, p, tol: float = 1e-10) -> bool:
    """Whether ``g`` lies in the isotropy group of the class ``[p]``: ``p g^{-1} p = g^{-1} p`` and ``p g p = g p``."""
    p = _as_idempotent(p).matrix
    g = nk.as_matrix(g)
    gi = nk.inv(g)
    scale = max(1.0, nk.opnorm(g), nk.opnorm(gi))
    return nk.opnorm(p @ gi @ p - gi @ p) <= tol * scale and nk.opnorm(p @ g @ p - g @ p) <= tol * scale


def ap_space(p, algebra: StarAlgebra, rtol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis of ``A^p = {a in A : (1 - p) a p = 0}``."""
    p = _as_projection(p)
    q = np.eye(len(p)) - p
    cols = [(q @ a @ p).reshape(-1) for a in algebra.basis]
    kern = nk.null_space(np.stack(cols, axis=1), rtol)
    return np.tensordot(kern.T, algebra.basis, axes=(1, 0))


@dataclass(frozen=True)
class APReport:
    dim_ap: int
    dim_ap_hat: int
    dim_commutant: int
    dim_algebra: int
    dim_sum: int
    adjoint_residual: float
    commutant_residual: float
    invariance_residual: float

    @property
    def ok(self) -> bool:
        return (
            self.dim_ap + self.dim_ap_hat - self.dim_commutant == self.dim_algebra
            and self.dim_sum == self.dim_algebra
            and self.adjoint_residual <= 1e-9
            and self.commutant_residual <= 1e-9
            and self.invariance_residual <= 1e-9
        )


def ap_space_report(p, algebra: StarAlgebra, seed: int = 0) -> APReport:
    """Numerical witnesses for the decomposition ``A^p + A^{1-p} = A`` and its companions."""
    p = _as_projection(p)
    ap = ap_space(p, algebra)
    aph = ap_space(np.eye(len(p)) - p, algebra)
    comm = commutant([p], algebra)
    span_ap = nk.orthonormal_matrix_basis(ap) if len(ap) else ap
    span_aph = nk.orthonormal_matrix_basis(aph) if len(aph) else aph
    dim_sum = len(nk.orthonormal_matrix_basis(np.concatenate([ap, aph]))) if len(ap) + len(aph) else 0
    adj = max((np.linalg.norm(a.conj().T - nk.hs_project(a.conj().T, span_aph, check=False)) for a in ap), default=0.0)
    cres = max(
        (
            max(np.linalg.norm(c - nk.hs_project(c, span_ap, check=False)), np.linalg.norm(c - nk.hs_project(c, span_aph, check=False)))
            for c in comm.basis
        ),
        default=0.0,
    )
    rng = as_rng(seed)
    inv_res = 0.0
    for _ in range(3):
        u = comm.random_unitary(rng)
        for a in ap:
            x = u @ a @ u.conj().T
            inv_res = max(inv_res, float(np.linalg.norm(x - nk.hs_project(x, span_ap, check=False))))
    return APReport(len(ap), len(aph), comm.dim, algebra.dim, dim_sum, float(adj), float(cres), inv_res)


@dataclass(frozen=True, eq=False)
class ConditionalExpectation:
    """Linear map ``A -> B`` stored as a matrix on the coordinates of ``A``'s basis."""

    source: StarAlgebra
    target: StarAlgebra
    matrix: np.ndarray
    name: str = field(default="E")

    @classmethod
    def from_function(cls, source: StarAlgebra, target: StarAlgebra, func: Callable, name: str = "E"):
        cols = [source.coords(func(a)) for a in source.basis]
        return cls(source, target, np.stack(cols, axis=1), name)

    def __call__(self, x) -> np.ndarray:
        return self.source.element(self.matrix @ self.source.coords(x))


def identity_expectation(algebra: StarAlgebra) -> ConditionalExpectation:
    return ConditionalExpectation(algebra, algebra, np.eye(algebra.dim, dtype=complex), "id")


def expectation_ep(p, algebra: StarAlgebra) -> ConditionalExpectation:
    """``E_p(T) = p T p + (1 - p) T (1 - p)`` onto the commutant of ``p``."""
    p = _as_projection(p)
    if not algebra.contains(p):
        raise NotProjection("projection does not belong to the algebra")
    q = np.eye(len(p)) - p
    target = commutant([p], algebra)
    return ConditionalExpectation.from_function(algebra, target, lambda t: p @ t @ p + q @ t @ q, "E_p")


def expectation_trace(algebra: StarAlgebra, sub: StarAlgebra) -> ConditionalExpectation:
    """Hilbert-Schmidt orthogonal projection of ``A`` onto a unital *-subalgebra ``B``."""
    if sub.n != algebra.n or not sub.is_subalgebra_of(algebra):
        raise NotSubalgebra("B is not contained in A")
    if not sub.contains_unit or not sub.is_star_closed() or sub.closure_residual() > 1e-9:
        raise NotSubalgebra("B is not a unital *-subalgebra")
    return ConditionalExpectation.from_function(algebra, sub, sub.project, "E_tr")


def compression(p, algebra: StarAlgebra) -> ConditionalExpectation:
    """``T -> p T p``; idempotent onto the corner ``pAp`` but not unital when ``p != 1``."""
    p = _as_projection(p)
    corner = StarAlgebra.span(np.array([p @ a @ p for a in algebra.basis]))
    return ConditionalExpectation.from_function(algebra, corner, lambda t: p @ t @ p, "compression")


@dataclass(frozen=True)
class TomiyamaReport:
    residuals: dict
    tol: float
    samples: int

    @property
    def failures(self) -> list[str]:
        return [k for k, v in self.residuals.items() if not v <= self.tol]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())


def tomiyama_check(e: ConditionalExpectation, samples: int = 20, seed: int = 0, tol: float = 1e-10) -> TomiyamaReport:
    """Residuals of unitality, idempotence, range, adjoint, bimodule and Schwarz properties."""
    rng = as_rng(seed)
    a_alg, b_alg = e.source, e.target
    one = np.eye(a_alg.n)
    res = {
        "unital": nk.opnorm(e(one) - one),
        "idempotent": 0.0,
        "range": 0.0,
        "adjoint": 0.0,
        "bimodule": 0.0,
        "schwarz": 0.0,
    }
    for _ in range(samples):
        a = a_alg.random_element(rng)
        b1, b2 = b_alg.random_element(rng), b_alg.random_element(rng)
        ea = e(a)
        res["idempotent"] = max(res["idempotent"], nk.opnorm(e(ea) - ea))
        res["range"] = max(res["range"], b_alg.residual(ea))
        res["adjoint"] = max(res["adjoint"], nk.opnorm(e(a.conj().T) - ea.conj().T))
        res["bimodule"] = max(res["bimodule"], nk.opnorm(e(b1 @ a @ b2) - b1 @ ea @ b2))
        gap = nk.hermitian_part(e(a.conj().T @ a) - ea.conj().T @ ea)
        res["schwarz"] = max(res["schwarz"], max(0.0, -float(np.linalg.eigvalsh(gap)[0])))
    return TomiyamaReport({k: float(v) for k, v in res.items()}, tol, samples)
