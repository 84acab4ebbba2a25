"""GNS and Stinespring dilations, compatible pairs over a conditional expectation.

The dilation space is the quotient of ``A (x) H0`` by the null space of the form
``(b (x) eta | a (x) xi) = (Phi(a^* b) eta | xi)``.  In the coefficient basis
``a_i (x) e_k`` (index ``i * h0 + k``) the form has Gram matrix
``G[(i,k),(j,l)] = Phi(a_i^* a_j)[k, l]``; with ``G = Q diag(lam) Q^*`` the map
``R = diag(sqrt(lam)) Q^*`` (kept eigenvalues only) sends a coefficient vector
to isometric coordinates of its class.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import numkernel as nk
from .cpstate import CPMap, State, is_completely_positive
from .errors import IncompatibleData, NotCP, NotState, NotUnital, ShapeMismatch
from .sampling import as_rng
from .staralg import ConditionalExpectation, StarAlgebra

GRAM_RTOL = 1e-10
ILL_CONDITIONED = 1e-12


@dataclass(frozen=True, eq=False)
class DilationResult:
    algebra: StarAlgebra
    phi: CPMap
    rep: np.ndarray  # (d, r, r): pi(a_i)
    isometry_v: np.ndarray  # (r, h0)
    coord_map: np.ndarray  # (r, d*h0)
    coord_pinv: np.ndarray  # (d*h0, r), right inverse of coord_map
    gram_rank_tol: float
    warnings: tuple = field(default=())

    @property
    def space_dim(self) -> int:
        return self.isometry_v.shape[0]

    @property
    def h0_dim(self) -> int:
        return self.isometry_v.shape[1]

    def pi(self, a) -> np.ndarray:
        """Representation of an arbitrary element of the algebra (linear in ``a``)."""
        return np.tensordot(self.algebra.coords(a), self.rep, axes=(0, 0))

    def vector(self, a, h) -> np.ndarray:
        """Class of ``a (x) h`` in the dilation space."""
        coeff = np.kron(self.algebra.coords(a), np.asarray(h, dtype=complex))
        return self.coord_map @ coeff

    def compress(self, a) -> np.ndarray:
        return self.isometry_v.conj().T @ self.pi(a) @ self.isometry_v

    @property
    def cyclic_vector(self) -> np.ndarray:
        return self.isometry_v[:, 0]


def _gram(algebra: StarAlgebra, phi: CPMap) -> np.ndarray:
    b = algebra.basis
    prods = np.einsum("iba,jbc->ijac", b.conj(), b)  # a_i^* a_j
    d, n = algebra.dim, algebra.n
    imgs = np.einsum("ijab,axby->ijxy", prods, phi.blocks)
    h0 = phi.out_dim
    return imgs.transpose(0, 2, 1, 3).reshape(d * h0, d * h0)


def stinespring(algebra: StarAlgebra, phi: CPMap, rtol: float = GRAM_RTOL, check: bool = True) -> DilationResult:
    """Minimal Stinespring dilation ``Phi(a) = V^* pi(a) V`` of a unital CP map on ``algebra``."""
    if phi.in_dim != algebra.n:
        raise ShapeMismatch(f"map acts on M_{phi.in_dim}, algebra lives in M_{algebra.n}")
    h0 = phi.out_dim
    if check:
        if nk.opnorm(phi(np.eye(algebra.n)) - np.eye(h0)) > 1e-9:
            raise NotUnital("Phi(1) != 1")
        if not is_completely_positive(phi, 1e-9):
            raise NotCP("Choi matrix is not positive semidefinite")
    gram = nk.hermitian_part(_gram(algebra, phi))
    eig = nk.herm_eig(gram)
    lam, q = eig.eigenvalues, eig.eigenvectors
    lmax = max(float(lam[-1]), 0.0)
    keep = lam > rtol * lmax
    lam, q = lam[keep], q[:, keep]
    notes = []
    if lam.size and lam[0] / lam[-1] < ILL_CONDITIONED:
        notes.append(f"ill-conditioned Gram: kept eigenvalue ratio {lam[0] / lam[-1]:.2e}")
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)
    r_map = np.sqrt(lam)[:, None] * q.conj().T
    r_pinv = q / np.sqrt(lam)[None, :]
    eye_h = np.eye(h0)
    rep = np.array([r_map @ np.kron(algebra.left_mult(a), eye_h) @ r_pinv for a in algebra.basis])
    v = r_map @ np.kron(algebra.unit_coords[:, None], eye_h)
    return DilationResult(algebra, phi, rep, v, r_map, r_pinv, rtol, tuple(notes))


def gns(algebra: StarAlgebra, phi, rtol: float = GRAM_RTOL) -> DilationResult:
    """GNS representation of a state (the ``h0 = 1`` case of :func:`stinespring`)."""
    if isinstance(phi, State):
        phi = phi.as_map()
    elif not isinstance(phi, CPMap):
        phi = State(algebra, phi).as_map()
    if phi.out_dim != 1:
        raise NotState("a state maps into M_1")
    if abs(phi(np.eye(algebra.n))[0, 0] - 1) > 1e-9 or not is_completely_positive(phi, 1e-9):
        raise NotState("functional is not a state")
    return stinespring(algebra, phi, rtol, check=False)


def dilation_residual(phi: CPMap, d: DilationResult, samples: int = 20, seed=0, include_basis: bool = True) -> float:
    """``max ||Phi(a) - V^* pi(a) V|| / ||a||`` over seeded random ``a`` (and the basis)."""
    rng = as_rng(seed)
    elems = [d.algebra.random_element(rng) for _ in range(samples)]
    if include_basis:
        elems += list(d.algebra.basis)
    worst = 0.0
    for a in elems:
        worst = max(worst, nk.opnorm(phi(a) - d.compress(a)) / max(nk.opnorm(a), 1e-300))
    return worst


def representation_residuals(d: DilationResult) -> dict:
    """Multiplicativity, *-compatibility, isometry and minimality witnesses."""
    c = d.algebra.structure
    mult = 0.0
    for i in range(d.algebra.dim):
        for j in range(d.algebra.dim):
            lhs = d.rep[i] @ d.rep[j]
            rhs = np.tensordot(c[i, j], d.rep, axes=(0, 0))
            mult = max(mult, nk.opnorm(lhs - rhs))
    star = max(nk.opnorm(d.pi(a.conj().T) - d.rep[i].conj().T) for i, a in enumerate(d.algebra.basis))
    iso = nk.opnorm(d.isometry_v.conj().T @ d.isometry_v - np.eye(d.h0_dim))
    span = np.concatenate([r @ d.isometry_v for r in d.rep], axis=1)
    return {
        "multiplicativity": float(mult),
        "star": float(star),
        "isometry": float(iso),
        "minimal_rank": nk.numerical_rank(span, 1e-9),
        "space_dim": d.space_dim,
        "unit": nk.opnorm(d.pi(np.eye(d.algebra.n)) - np.eye(d.space_dim)),
    }


@dataclass(frozen=True, eq=False)
class CompatiblePair:
    """Dilations of ``Phi`` on ``A`` and of ``Phi|_B`` on ``B``, with ``H_B`` embedded in ``H_A``."""

    dil_a: DilationResult
    dil_b: DilationResult
    embedding: np.ndarray  # (r_A, r_B) isometry H_B -> H_A
    expectation: ConditionalExpectation

    @property
    def projection_p(self) -> np.ndarray:
        return self.embedding.conj().T

    @property
    def a(self) -> StarAlgebra:
        return self.dil_a.algebra

    @property
    def b(self) -> StarAlgebra:
        return self.dil_b.algebra

    def e_tilde(self) -> np.ndarray:
        """Operator on ``H_A`` induced by ``E (x) id``."""
        d = self.dil_a
        return d.coord_map @ np.kron(self.expectation.matrix, np.eye(d.h0_dim)) @ d.coord_pinv

    def residuals(self) -> dict:
        p, iota = self.projection_p, self.embedding
        da, db = self.dil_a, self.dil_b
        right = 0.0
        restrict = 0.0
        for bb, rb in zip(self.b.basis, db.rep):
            pa = da.pi(bb)
            right = max(right, nk.opnorm(p @ pa - rb @ p))
            restrict = max(restrict, nk.opnorm(pa @ iota - iota @ rb))
        left = 0.0
        for a in self.a.basis:
            for k in range(da.h0_dim):
                h = np.eye(da.h0_dim)[k]
                left = max(left, float(np.linalg.norm(p @ da.vector(a, h) - db.vector(self.expectation(a), h))))
        return {
            "right_square": float(right),
            "restriction": float(restrict),
            "left_square": left,
            "e_tilde_vs_p": nk.opnorm(self.e_tilde() - iota @ p),
            "isometry": nk.opnorm(p @ iota - np.eye(iota.shape[1])),
        }

    def generation_rank(self, samples: int = 8, seed=0) -> int:
        """Rank of ``span pi_A(u) H_B`` over seeded random unitaries ``u`` of ``A`` (plus ``u = 1``)."""
        rng = as_rng(seed)
        blocks = [self.embedding]
        for _ in range(samples):
            blocks.append(self.dil_a.pi(self.a.random_unitary(rng)) @ self.embedding)
        return nk.numerical_rank(np.concatenate(blocks, axis=1), 1e-9)


def compatible_pair(
    expectation: ConditionalExpectation, phi: CPMap, rtol: float = GRAM_RTOL, tol: float = 1e-9
) -> CompatiblePair:
    """Build both dilations for ``Phi`` with ``Phi o E = Phi`` and the inclusion ``H_B -> H_A``."""
    a_alg, b_alg = expectation.source, expectation.target
    gap = max(nk.opnorm(phi(expectation(a)) - phi(a)) for a in a_alg.basis)
    if gap > tol:
        raise IncompatibleData(f"Phi o E differs from Phi by {gap:.3e}")
    dil_a = stinespring(a_alg, phi, rtol)
    dil_b = stinespring(b_alg, phi, rtol)
    h0 = phi.out_dim
    j = np.stack([a_alg.coords(b) for b in b_alg.basis], axis=1)
    embed = dil_a.coord_map @ np.kron(j, np.eye(h0)) @ dil_b.coord_pinv
    return CompatiblePair(dil_a, dil_b, embed, expectation)
