"""Homogeneous bundles ``G_A x_{G_B} H_B`` over ``G_A/G_B``, their reproducing
(-*)-kernels, the realization operator and the Grassmannian (tautological) case.

A bundle is fixed by a representation ``pi_A`` of ``A`` on ``H_A``, a
representation ``pi_B`` of ``B`` on ``H_B`` and an isometry ``iota: H_B -> H_A``
intertwining ``pi_B`` with ``pi_A|_B``; ``P = iota^*``.  Fiber vectors are kept
as coordinates in ``H_B`` relative to the stored coset representative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numkernel as nk
from .dilation import CompatiblePair
from .errors import BaseMismatch, ContextMismatch, IllConditionedGram, ShapeMismatch, VectorNotInFiber
from .geomorbit import (
    EPS_GRID,
    CosetPoint,
    CosetSpace,
    RatioReport,
    coset_equal,
    coset_involution,
    ratio_report,
)
from .sampling import as_rng
from .staralg import ConditionalExpectation, StarAlgebra, expectation_ep

GRAM_RTOL = 1e-10
ILL_CONDITIONED = 1e-12


@dataclass(frozen=True, eq=False)
class HomogeneousBundle:
    space: CosetSpace
    rep_a: np.ndarray  # (dim A, r_A, r_A): pi_A of the basis of A
    rep_b: np.ndarray  # (dim B, r_B, r_B): pi_B of the basis of B
    iota: np.ndarray  # (r_A, r_B)

    @classmethod
    def from_pair(cls, pair: CompatiblePair) -> "HomogeneousBundle":
        return cls(CosetSpace(pair.expectation), pair.dil_a.rep, pair.dil_b.rep, pair.embedding)

    @classmethod
    def from_data(cls, expectation: ConditionalExpectation, pi_a, pi_b, iota) -> "HomogeneousBundle":
        """Bundle from callables ``pi_a``, ``pi_b`` (evaluated on the algebra bases) and ``iota``."""
        rep_a = np.array([pi_a(a) for a in expectation.source.basis], dtype=complex)
        rep_b = np.array([pi_b(b) for b in expectation.target.basis], dtype=complex)
        iota = np.asarray(iota, dtype=complex)
        if iota.shape != (rep_a.shape[1], rep_b.shape[1]):
            raise ShapeMismatch(f"iota has shape {iota.shape}")
        return cls(CosetSpace(expectation), rep_a, rep_b, iota)

    @property
    def a(self) -> StarAlgebra:
        return self.space.a

    @property
    def b(self) -> StarAlgebra:
        return self.space.b

    @property
    def p(self) -> np.ndarray:
        return self.iota.conj().T

    @property
    def h_a_dim(self) -> int:
        return self.iota.shape[0]

    @property
    def h_b_dim(self) -> int:
        return self.iota.shape[1]

    def pi_a(self, x) -> np.ndarray:
        return np.tensordot(self.a.coords(x), self.rep_a, axes=(0, 0))

    def pi_b(self, x) -> np.ndarray:
        return np.tensordot(self.b.coords(x), self.rep_b, axes=(0, 0))

    def residuals(self) -> dict:
        """``iota`` isometric and ``pi_A(b) iota = iota pi_B(b)`` on the basis of ``B``."""
        inter = max(nk.opnorm(self.pi_a(b) @ self.iota - self.iota @ self.pi_b(b)) for b in self.b.basis)
        iso = nk.opnorm(self.p @ self.iota - np.eye(self.h_b_dim))
        return {"intertwining": float(inter), "isometry": float(iso)}

    def element(self, base: CosetPoint, fiber) -> "BundleElement":
        return BundleElement(base, np.asarray(fiber, dtype=complex), self)

    def generated_subspace(self, samples: int = 8, seed=0) -> np.ndarray:
        """Orthonormal basis of ``span pi_A(G_A) iota H_B`` from seeded invertibles (plus ``1``)."""
        rng = as_rng(seed)
        blocks = [self.iota] + [self.pi_a(self.a.random_invertible(rng)) @ self.iota for _ in range(samples)]
        return nk.range_basis(np.concatenate(blocks, axis=1), 1e-9)


@dataclass(frozen=True, eq=False)
class BundleElement:
    """``[(u, f)]`` with ``u = base.rep`` and ``f`` in ``H_B``."""

    base: CosetPoint
    fiber: np.ndarray
    bundle: HomogeneousBundle

    def __post_init__(self):
        if self.base.space is not self.bundle.space:
            raise ContextMismatch("base point is not in the bundle's base space")
        if self.fiber.shape != (self.bundle.h_b_dim,):
            raise ShapeMismatch(f"fiber vector has shape {self.fiber.shape}")

    def theta(self) -> np.ndarray:
        return basic_map(self)

    def with_rep(self, w) -> "BundleElement":
        """The same element written as ``(u w, pi_B(w^{-1}) f)`` for ``w`` in ``G_B``."""
        w = nk.as_matrix(w)
        return BundleElement(self.base.with_rep(w), self.bundle.pi_b(nk.inv(w)) @ self.fiber, self.bundle)

    def act(self, v) -> "BundleElement":
        """``v . [(u, f)] = [(v u, f)]``."""
        return BundleElement(self.base.act(v), self.fiber, self.bundle)


def basic_map(xi: BundleElement) -> np.ndarray:
    """``Theta([(u, f)]) = pi_A(u) iota f``."""
    bnd = xi.bundle
    return bnd.pi_a(xi.base.rep) @ bnd.iota @ xi.fiber


def element_equal(x1: BundleElement, x2: BundleElement, tol: float = 1e-9) -> bool:
    """``(u, f) ~ (u w, pi_B(w^{-1}) f)``."""
    if not coset_equal(x1.base, x2.base, tol):
        return False
    w = nk.inv(x1.base.rep) @ x2.base.rep
    f = x1.bundle.pi_b(nk.inv(w)) @ x1.fiber
    return float(np.linalg.norm(f - x2.fiber)) <= tol * max(1.0, float(np.linalg.norm(f)))


def bundle_pair(xi: BundleElement, eta: BundleElement) -> complex:
    """``(xi | eta)`` for ``xi`` over ``z`` and ``eta`` over ``z^{-*}``; linear in ``xi``."""
    if not coset_equal(coset_involution(xi.base), eta.base):
        raise BaseMismatch("second argument is not over the involuted base point")
    return complex(np.vdot(basic_map(eta), basic_map(xi)))


def kernel_eval(s: CosetPoint, t: CosetPoint, eta: BundleElement) -> BundleElement:
    """``K(s, t) eta = [(u, P pi_A(u^{-1}) pi_A(v) iota f)]`` for ``s = u G_B`` and ``eta = [(v, f)]`` over ``t``."""
    if not coset_equal(t, eta.base):
        raise BaseMismatch("eta is not over t")
    bnd = eta.bundle
    return BundleElement(s, bnd.p @ bnd.pi_a(nk.inv(s.rep)) @ basic_map(eta), bnd)


def kernel_matrix(s: CosetPoint, t: CosetPoint, bundle: HomogeneousBundle) -> np.ndarray:
    """Matrix of ``K(s, t)`` in the fiber coordinates given by the stored representatives."""
    return bundle.p @ bundle.pi_a(nk.inv(s.rep)) @ bundle.pi_a(t.rep) @ bundle.iota


@dataclass(frozen=True)
class KernelSample:
    points: tuple  # t_j
    vectors: tuple  # eta_j over t_j^{-*}
    gram: np.ndarray

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(nk.hermitian_part(self.gram))[0]) if len(self.gram) else 0.0

    @property
    def hermitian_residual(self) -> float:
        return nk.opnorm(self.gram - self.gram.conj().T)


def kernel_gram(points, vectors) -> KernelSample:
    """``G[l, j] = (K(t_l, t_j^{-*}) eta_j | eta_l)`` with ``eta_j`` over ``t_j^{-*}``."""
    points, vectors = tuple(points), tuple(vectors)
    k = len(points)
    g = np.empty((k, k), dtype=complex)
    for l in range(k):
        for j in range(k):
            kj = kernel_eval(points[l], vectors[j].base, vectors[j])
            g[l, j] = bundle_pair(kj, vectors[l])
    return KernelSample(points, vectors, g)


def ambient_gram(vectors) -> np.ndarray:
    """``[(Theta(eta_j) | Theta(eta_l))]_{l, j}``, the ``H_A`` side of the kernel Gram."""
    th = np.stack([basic_map(v) for v in vectors], axis=1)
    return th.conj().T @ th


def random_configuration(bundle: HomogeneousBundle, k: int, seed=0, cond_max: float = 10.0, involuted: bool = True):
    """Seeded points ``t_j`` and vectors ``eta_j`` over ``t_j^{-*}``.

    With ``involuted`` the point set is closed under ``z -> z^{-*}`` (``k`` is
    then rounded up to even), and the vectors use a representative of
    ``t_j^{-*}`` other than ``t_j.rep^{-*}``.
    """
    rng = as_rng(seed)
    space = bundle.space
    half = (k + 1) // 2 if involuted else k
    pts = [space.random_point(rng, cond_max) for _ in range(half)]
    if involuted:
        pts += [coset_involution(z) for z in pts]
    vecs = []
    for z in pts:
        w = space.b.random_invertible(rng, 5.0)
        base = coset_involution(z).with_rep(w)
        vecs.append(BundleElement(base, _random_fiber(rng, bundle), bundle))
    return tuple(pts), tuple(vecs)


def _random_fiber(rng, bundle: HomogeneousBundle) -> np.ndarray:
    r = bundle.h_b_dim
    return (rng.standard_normal(r) + 1j * rng.standard_normal(r)) / np.sqrt(2)


@dataclass(frozen=True, eq=False)
class Section:
    """``gamma(h)``: ``u G_B -> [(u, P pi_A(u^{-1}) h)]``, evaluated lazily."""

    bundle: HomogeneousBundle
    h: np.ndarray

    def __call__(self, z: CosetPoint) -> BundleElement:
        bnd = self.bundle
        return BundleElement(z, bnd.p @ bnd.pi_a(nk.inv(z.rep)) @ self.h, bnd)


def realization(bundle: HomogeneousBundle, h) -> Section:
    h = np.asarray(h, dtype=complex)
    if h.shape != (bundle.h_a_dim,):
        raise ShapeMismatch(f"vector of shape {h.shape} is not in H_A")
    return Section(bundle, h)


def kernel_section(t: CosetPoint, eta: BundleElement):
    """``K_eta = K(., t) eta``."""
    return lambda s: kernel_eval(s, t, eta)


def realization_kernel(bundle: HomogeneousBundle, samples: int = 8, seed=0) -> np.ndarray:
    """Orthonormal basis of ``Ker gamma = (span pi_A(G_A) iota H_B)^perp``."""
    span = bundle.generated_subspace(samples, seed)
    return nk.null_space(span.conj().T, 1e-9)


def intertwine_check(bundle: HomogeneousBundle, v, h, points) -> float:
    """``max_z || Theta(gamma(pi_A(v) h)(z)) - Theta(v . gamma(h)(v^{-1} z)) ||``."""
    v = nk.as_matrix(v)
    lhs = realization(bundle, bundle.pi_a(v) @ np.asarray(h, dtype=complex))
    rhs = realization(bundle, h)
    v_inv = nk.inv(v)
    worst = 0.0
    for z in points:
        a = basic_map(lhs(z))
        b = basic_map(rhs(z.act(v_inv)).act(v))
        worst = max(worst, float(np.linalg.norm(a - b)))
    return worst


@dataclass(frozen=True)
class KernelSpace:
    """Finite-sample coordinates of the kernel Hilbert space ``H^K``.

    ``elements`` are ``eta_j`` (over ``t_j``), standing for the sections
    ``K_{eta_j} = K(., t_j) eta_j``; ``gram[i, j] = (K_{eta_j} | K_{eta_i})``.
    ``coeffs[:, k]`` expresses the ``k``-th orthonormal vector as
    ``sum_j coeffs[j, k] K_{eta_j}``.
    """

    elements: tuple
    gram: np.ndarray
    coeffs: np.ndarray
    condition: float

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    @property
    def bundle(self) -> HomogeneousBundle:
        return self.elements[0].bundle

    def coordinates(self, j: int) -> np.ndarray:
        """Orthonormal coordinates of ``K_{eta_j}`` read off the Gram."""
        return self.coeffs.conj().T @ self.gram[:, j]

    def evaluation(self, s: CosetPoint) -> np.ndarray:
        """Matrix of ``ev_s`` (columns: fiber coordinates at ``s.rep`` of the orthonormal basis)."""
        cols = np.stack([kernel_eval(s, e.base, e).fiber for e in self.elements], axis=1)
        return cols @ self.coeffs

    def reproduced_coordinates(self, eta: BundleElement) -> np.ndarray:
        """Coordinates of ``K_eta`` from the reproducing property ``(F | K_eta) = (F(t^{-*}) | eta)``."""
        dual = coset_involution(eta.base)
        ev = self.evaluation(dual)
        return np.array([np.conj(bundle_pair(BundleElement(dual, ev[:, k], self.bundle), eta)) for k in range(self.dim)])


def kernel_space(elements, rtol: float = GRAM_RTOL) -> KernelSpace:
    """Gram factorization of the sections ``{K_eta}``, with the Gram computed on the kernel side."""
    elements = tuple(elements)
    sample = kernel_gram([coset_involution(e.base) for e in elements], elements)
    g = nk.hermitian_part(sample.gram)
    eig = nk.herm_eig(g)
    lam, q = eig.eigenvalues, eig.eigenvectors
    keep = lam > rtol * max(float(lam[-1]), 0.0)
    lam, q = lam[keep], q[:, keep]
    cond = float(lam[0] / lam[-1]) if lam.size else 1.0
    return KernelSpace(elements, g, q / np.sqrt(lam)[None, :], cond)


def fiber_basis(z: CosetPoint, bundle: HomogeneousBundle):
    return [BundleElement(z, e, bundle) for e in np.eye(bundle.h_b_dim, dtype=complex)]


def pairing_matrix(z: CosetPoint, w: CosetPoint, bundle: HomogeneousBundle) -> np.ndarray:
    """``N[b, a] = ([(z.rep, e_a)] | [(w.rep, e_b)])`` for ``w = z^{-*}`` as cosets."""
    return (bundle.pi_a(w.rep) @ bundle.iota).conj().T @ bundle.pi_a(z.rep) @ bundle.iota


def star_adjoint_evaluation(ks: KernelSpace, t: CosetPoint, t_dual: CosetPoint) -> np.ndarray:
    """Matrix of ``(ev_t)^{-*}: D_{t^{-*}} -> H^K`` in orthonormal coordinates.

    Defined by ``(ev_t h | y)_{t, t^{-*}} = (h | (ev_t)^{-*} y)``; with
    ``pair(x, y) = y^* N x`` this reads ``(ev_t)^{-*} = ev_t^* N^*``.  The
    pairing matrix ``N`` must be invertible (strong duality) for the adjoint to
    be well defined.
    """
    bnd = ks.elements[0].bundle
    if not coset_equal(coset_involution(t), t_dual):
        raise BaseMismatch("t_dual is not t^{-*}")
    n = pairing_matrix(t, t_dual, bnd)
    sv = np.linalg.svd(n, compute_uv=False)
    if sv.size and sv[-1] < ILL_CONDITIONED * sv[0]:
        raise IllConditionedGram(f"fiber pairing conditioning {sv[-1] / sv[0]:.2e}")
    ev_t = ks.evaluation(t)
    return ev_t.conj().T @ n.conj().T


def evaluation_identity_check(s: CosetPoint, t: CosetPoint, bundle: HomogeneousBundle, extra_points=(), t_dual=None) -> float:
    """Operator residual of ``K(s, t^{-*}) = ev_s o (ev_t)^{-*}`` on fiber bases.

    ``H^K`` is coordinatized on the sections ``K_eta`` for ``eta`` running over
    fiber bases at ``t^{-*}``, ``s``, ``s^{-*}``, ``t`` and ``extra_points``.
    """
    if t_dual is None:
        t_dual = coset_involution(t)
    pts = [t_dual, s, coset_involution(s), t, *extra_points]
    elements = [e for z in pts for e in fiber_basis(z, bundle)]
    ks = kernel_space(elements)
    if ks.condition < ILL_CONDITIONED:
        raise IllConditionedGram(f"kernel Gram conditioning {ks.condition:.2e}")
    composite = ks.evaluation(s) @ star_adjoint_evaluation(ks, t, t_dual)
    direct = kernel_matrix(s, t_dual, bundle)
    return nk.opnorm(composite - direct)


def prods_residual(ks: KernelSpace, eta: BundleElement, xi: BundleElement) -> float:
    """``(K_eta | K_xi)`` from reproduced coordinates against ``(K(s^{-*}, t) eta | xi)``.

    ``eta`` is over ``t`` and ``xi`` over ``s``; both sections must lie in the
    sampled span (e.g. the sample contains fiber bases at ``t`` and ``s``).
    """
    ce, cx = ks.reproduced_coordinates(eta), ks.reproduced_coordinates(xi)
    direct = bundle_pair(kernel_eval(coset_involution(xi.base), eta.base, eta), xi)
    return abs(complex(np.vdot(cx, ce)) - direct)


def isometry_residual(ks: KernelSpace) -> float:
    """Gram of ``{K_eta}`` against the Gram of ``{Theta(eta)}`` in ``H_A``."""
    return nk.opnorm(ks.gram - ambient_gram(ks.elements))


def holomorphy_check(bundle: HomogeneousBundle, h, z0: CosetPoint, direction, eps=EPS_GRID, conjugate: bool = False) -> RatioReport:
    """Cauchy-Riemann test for ``g -> P pi_A(g^{-1}) h`` at ``g0 = z0.rep``.

    Compares the central difference along ``i v`` with ``i`` times the one
    along ``v``.  ``conjugate=True`` applies the test to the entrywise complex
    conjugate of the map (a negative control).
    """
    h = np.asarray(h, dtype=complex)
    v = nk.as_matrix(direction)
    g0 = z0.rep

    def f(g):
        out = bundle.p @ bundle.pi_a(nk.inv(g)) @ h
        return out.conj() if conjugate else out

    def cdiff(w, e):
        return (f(g0 + e * w) - f(g0 - e * w)) / (2 * e)

    res = [np.linalg.norm(cdiff(1j * v, e) - 1j * cdiff(v, e)) for e in eps]
    return ratio_report(res)


@dataclass(frozen=True)
class UnitaryRestrictionReport:
    min_diagonal_pairing: float
    max_imag_diagonal: float
    definition_residual: float

    def passed(self, tol: float = 1e-10, def_tol: float = 1e-12) -> bool:
        return self.min_diagonal_pairing >= -tol and self.max_imag_diagonal <= tol and self.definition_residual <= def_tol


def unitary_restriction_check(bundle: HomogeneousBundle, h, unitaries) -> UnitaryRestrictionReport:
    """On fixed points ``u G_B`` (``u`` unitary): Hermitian, nonnegative diagonal
    pairing, and ``gamma^U(h)(u U_B) = [(u, P pi_A(u^*) h)]`` agrees with ``gamma(h)(u G_B)``.
    """
    h = np.asarray(h, dtype=complex)
    sec = realization(bundle, h)
    mins, imag, defres = np.inf, 0.0, 0.0
    for u in unitaries:
        z = bundle.space.point(u)
        xi = sec(z)
        val = bundle_pair(xi, xi)
        mins = min(mins, val.real)
        imag = max(imag, abs(val.imag))
        gu = bundle.p @ bundle.pi_a(nk.as_matrix(u).conj().T) @ h
        defres = max(defres, float(np.linalg.norm(basic_map(BundleElement(z, gu, bundle)) - basic_map(xi))))
    return UnitaryRestrictionReport(float(mins), float(imag), float(defres))


# Grassmannian instance ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SubspacePoint:
    """A subspace of ``C^n`` with orthonormal basis columns."""

    ortho_basis: np.ndarray

    @classmethod
    def span(cls, vecs, rtol: float = 1e-10) -> "SubspacePoint":
        return cls(nk.range_basis(np.atleast_2d(np.asarray(vecs, dtype=complex)), rtol))

    def __post_init__(self):
        q = np.asarray(self.ortho_basis, dtype=complex)
        if q.ndim != 2 or nk.opnorm(q.conj().T @ q - np.eye(q.shape[1])) > 1e-10:
            raise ShapeMismatch("columns are not orthonormal")
        object.__setattr__(self, "ortho_basis", q)

    @property
    def ambient_dim(self) -> int:
        return self.ortho_basis.shape[0]

    @property
    def dim(self) -> int:
        return self.ortho_basis.shape[1]

    @property
    def projection(self) -> np.ndarray:
        q = self.ortho_basis
        return q @ q.conj().T

    def contains(self, x, tol: float = 1e-10) -> bool:
        x = np.asarray(x, dtype=complex)
        return float(np.linalg.norm(x - self.projection @ x)) <= tol * max(1.0, float(np.linalg.norm(x)))

    def perp(self) -> "SubspacePoint":
        return SubspacePoint(nk.null_space(self.ortho_basis.conj().T))

    def image(self, g) -> "SubspacePoint":
        return SubspacePoint.span(nk.as_matrix(g) @ self.ortho_basis)

    def equals(self, other: "SubspacePoint", tol: float = 1e-10) -> bool:
        return self.dim == other.dim and nk.opnorm(self.projection - other.projection) <= tol


def grassmann_kernel(s1: SubspacePoint, s2: SubspacePoint, x) -> np.ndarray:
    """``Q_H(S1, S2) x = p_{S1} x`` for ``x`` in ``S2``."""
    if not s2.contains(x):
        raise VectorNotInFiber("x is not in the second subspace")
    return s1.projection @ np.asarray(x, dtype=complex)


def grassmann_gram(subspaces, vectors) -> np.ndarray:
    """``G[l, j] = (Q(S_l, S_j) x_j | x_l)``."""
    k = len(subspaces)
    g = np.empty((k, k), dtype=complex)
    for l in range(k):
        for j in range(k):
            g[l, j] = np.vdot(vectors[l], grassmann_kernel(subspaces[l], subspaces[j], vectors[j]))
    return g


def tautological_bundle(s0: SubspacePoint) -> HomogeneousBundle:
    """Bundle over ``G_A/G_B`` with ``A = M_n``, ``B = {p_{S0}}'``, fiber ``S0``, ``pi_A = id``."""
    a = StarAlgebra.full(s0.ambient_dim)
    e = expectation_ep(s0.projection, a)
    q = s0.ortho_basis
    return HomogeneousBundle.from_data(e, lambda x: x, lambda x: q.conj().T @ x @ q, q)


def tautological_lift(bundle: HomogeneousBundle, u, f) -> tuple[SubspacePoint, np.ndarray]:
    """``[(u, f)] -> (u S0, u f)`` where ``f`` is given in the coordinates of ``S0``."""
    u = nk.as_matrix(u)
    q = bundle.iota
    return SubspacePoint.span(u @ q), u @ q @ np.asarray(f, dtype=complex)


def tautological_unlift(bundle: HomogeneousBundle, s: SubspacePoint, x) -> BundleElement:
    """Inverse of :func:`tautological_lift` on the unitary orbit of ``S0``."""
    q0 = bundle.iota
    if s.dim != q0.shape[1]:
        raise ShapeMismatch("subspace dimension differs from dim S0")
    if not s.contains(x):
        raise VectorNotInFiber("x is not in the subspace")
    c0 = nk.null_space(q0.conj().T)
    c1 = nk.null_space(s.ortho_basis.conj().T)
    u = np.concatenate([s.ortho_basis, c1], axis=1) @ np.concatenate([q0, c0], axis=1).conj().T
    f = q0.conj().T @ u.conj().T @ np.asarray(x, dtype=complex)
    return BundleElement(bundle.space.point(u), f, bundle)


def perp_image_residual(s0: SubspacePoint, g) -> float:
    """``(g S0)^perp = (g^*)^{-1} S0^perp``: projection distance of the two subspaces."""
    lhs = s0.image(g).perp()
    rhs = s0.perp().image(nk.inv_dag(g))
    return nk.opnorm(lhs.projection - rhs.projection) if lhs.dim == rhs.dim else np.inf


def tautological_intertwining_residual(u, h, subspaces) -> float:
    """``gamma(u h)(S) = u gamma(h)(u^{-1} S)`` with ``gamma(h)(S) = p_S h``."""
    u = nk.as_matrix(u)
    h = np.asarray(h, dtype=complex)
    worst = 0.0
    for s in subspaces:
        lhs = s.projection @ (u @ h)
        rhs = u @ (s.image(nk.inv(u)).projection @ h)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst
