"""Homogeneous space G_A/G_B of invertibles, its involution ``z -> z^{-*}``,
and the polar picture ``a = u exp(iX) b`` relative to a conditional expectation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from . import numkernel as nk
from .errors import ContextMismatch, NoConvergence, NotPositive, Singular
from .staralg import MEMBER_TOL, ConditionalExpectation, StarAlgebra

log = logging.getLogger(__name__)

PR_TARGET = 1e-10
PR_POLISH = 1e-13
PR_POLISH_STEPS = 3
PR_MAX_ITER = 500
PR_THETA = 0.5
EPS_GRID = (1e-3, 5e-4, 2.5e-4)


@dataclass(frozen=True, eq=False)
class CosetSpace:
    """The data ``(A, B, E)`` defining ``G_A / G_B``."""

    expectation: ConditionalExpectation

    @property
    def a(self) -> StarAlgebra:
        return self.expectation.source

    @property
    def b(self) -> StarAlgebra:
        return self.expectation.target

    @property
    def n(self) -> int:
        return self.a.n

    def point(self, rep) -> "CosetPoint":
        return CosetPoint(rep, self)

    def identity(self) -> "CosetPoint":
        return CosetPoint(np.eye(self.n), self)

    def kill_e(self, x) -> np.ndarray:
        """``(1 - E) x``."""
        return np.asarray(x) - self.expectation(x)

    def random_p(self, rng, scale: float = 1.0) -> np.ndarray:
        """Random element of ``p = Ker E`` intersected with the anti-Hermitian part of ``A``."""
        h = self.a.random_hermitian(rng)
        h = nk.hermitian_part(self.kill_e(h))
        return 1j * scale * h

    def random_point(self, rng, cond_max: float = 100.0) -> "CosetPoint":
        return CosetPoint(self.a.random_invertible(rng, cond_max), self)


@dataclass(frozen=True, eq=False)
class CosetPoint:
    rep: np.ndarray
    space: CosetSpace

    def __post_init__(self):
        r = nk.as_matrix(self.rep)
        nk.inv(r)
        object.__setattr__(self, "rep", r)

    def act(self, g) -> "CosetPoint":
        """Left translation ``g . (u G_B) = g u G_B``."""
        return CosetPoint(nk.as_matrix(g) @ self.rep, self.space)

    def with_rep(self, w) -> "CosetPoint":
        """Same coset, representative ``rep @ w`` for ``w`` in ``G_B``."""
        return CosetPoint(self.rep @ nk.as_matrix(w), self.space)


def _same_space(z1: CosetPoint, z2: CosetPoint):
    if z1.space is not z2.space:
        raise ContextMismatch("cosets live in different homogeneous spaces")


def coset_equal(z1: CosetPoint, z2: CosetPoint, tol: float = MEMBER_TOL) -> bool:
    """``u1 G_B == u2 G_B`` iff ``u1^{-1} u2`` lies in ``B``."""
    _same_space(z1, z2)
    w = nk.inv(z1.rep) @ z2.rep
    return z1.space.b.contains(w, tol)


def coset_involution(z: CosetPoint) -> CosetPoint:
    """``u G_B -> u^{-*} G_B``."""
    return CosetPoint(nk.inv_dag(z.rep), z.space)


@dataclass(frozen=True)
class PolarTriple:
    u: np.ndarray
    x: np.ndarray
    b: np.ndarray
    iterations: int = 0
    residual: float = 0.0
    method: str = "fixed-point"

    def reconstruct(self) -> np.ndarray:
        return self.u @ nk.mat_exp(1j * self.x) @ self.b


def _e_log(c, b, e: ConditionalExpectation):
    bi = nk.inv(b)
    y = nk.mat_log_pd(nk.hermitian_part(bi @ c @ bi))
    return y, nk.hermitian_part(e(y))


def _log_derivative(m_eig: nk.HermEig, delta: np.ndarray) -> np.ndarray:
    """Frechet derivative of ``log`` at ``M`` in direction ``delta`` (divided differences)."""
    mu, u = m_eig.eigenvalues, m_eig.eigenvectors
    lmu = np.log(mu)
    diff = mu[:, None] - mu[None, :]
    same = np.abs(diff) <= 1e-12 * np.maximum(mu[:, None], mu[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        div = np.where(same, 1.0 / mu[:, None], (lmu[:, None] - lmu[None, :]) / np.where(same, 1.0, diff))
    return u @ (div * (u.conj().T @ delta @ u)) @ u.conj().T


def _newton_direction(c, b, d, e: ConditionalExpectation, hb: np.ndarray) -> np.ndarray:
    """Solve the linearization of ``H -> E(log(e^{-H/2} M e^{-H/2}))`` at ``H = 0`` for ``-D``."""
    bi = nk.inv(b)
    m_eig = nk.herm_eig(nk.hermitian_part(bi @ c @ bi))
    m = m_eig.reconstruct()
    jac = np.empty((len(hb), len(hb)))
    for k, h in enumerate(hb):
        col = e(_log_derivative(m_eig, -(h @ m + m @ h) / 2))
        jac[:, k] = np.real(np.einsum("kab,ab->k", hb.conj(), col))
    rhs = -np.real(np.einsum("kab,ab->k", hb.conj(), d))
    coef = np.linalg.lstsq(jac, rhs, rcond=None)[0]
    return np.tensordot(coef, hb, axes=(0, 0))


def _update(b, h, e: ConditionalExpectation) -> np.ndarray:
    """``b -> sqrt(b exp(H) b)``, kept inside ``B``."""
    return nk.hermitian_part(e.target.project(nk.mat_sqrt_psd(nk.hermitian_part(b @ nk.mat_exp(h) @ b))))


def _damped_step(c, b, y, d, e: ConditionalExpectation, theta: float, hb=None, min_step: float = 1e-6):
    """One iteration on ``b``; returns the new ``b`` with its ``log`` and ``D``.

    A Newton step for ``D = 0`` is tried first (when ``hb`` is given).  If it
    neither decreases the merit ``||log(b^{-1} c b^{-1})||_F^2`` nor halves
    ``||D||`` (needed at the rounding floor, where the merit is flat) the damped
    update ``b^2 <- b exp(s D) b`` with ``s = theta, theta/2, ...`` is used;
    for a trace-orthogonal ``E`` that is Riemannian gradient descent for this
    geodesically convex merit on the positive cone of ``B``.
    """
    merit = np.linalg.norm(y) ** 2
    if hb is not None:
        try:
            cand = _update(b, _newton_direction(c, b, d, e, hb), e)
            y_new, d_new = _e_log(c, cand, e)
            if np.linalg.norm(y_new) ** 2 < merit or np.linalg.norm(d_new) < 0.5 * np.linalg.norm(d):
                return cand, y_new, d_new
        except (ValueError, np.linalg.LinAlgError):
            pass
    s = theta
    while True:
        cand = _update(b, s * d, e)
        y_new, d_new = _e_log(c, cand, e)
        if np.linalg.norm(y_new) ** 2 < merit or s <= min_step:
            return cand, y_new, d_new
        s /= 2


def _herm_basis(alg: StarAlgebra) -> np.ndarray:
    """Real basis of the Hermitian part of a *-closed algebra."""
    mats = []
    for a in alg.basis:
        mats += [nk.hermitian_part(a), nk.hermitian_part(1j * a)]
    flat = np.array([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in mats])
    u, s, vh = np.linalg.svd(flat, full_matrices=False)
    keep = s > 1e-10 * s[0]
    n = alg.n
    rows = vh[keep]
    return np.array([(r[: n * n] + 1j * r[n * n :]).reshape(n, n) for r in rows])


def _fallback(c, e: ConditionalExpectation, b0, budget: int) -> tuple[np.ndarray, int]:
    hb = _herm_basis(e.target)
    theta0 = np.real(np.einsum("kab,ab->k", hb.conj(), nk.mat_log_pd(b0)))

    def objective(theta):
        b = nk.mat_exp(np.tensordot(theta, hb, axes=(0, 0)))
        try:
            _, d = _e_log(c, b, e)
        except (Singular, ValueError):
            return 1e10
        return float(np.linalg.norm(d) ** 2)

    res = scipy.optimize.minimize(objective, theta0, method="Powell", options={"maxfev": budget, "xtol": 1e-12, "ftol": 1e-30})
    return nk.mat_exp(np.tensordot(res.x, hb, axes=(0, 0))), int(res.nfev)


def porta_recht(
    a,
    e: ConditionalExpectation,
    theta: float = PR_THETA,
    max_iter: int = PR_MAX_ITER,
    target: float = PR_TARGET,
    start=None,
    fallback_budget: int = 20000,
    newton: bool = True,
) -> PolarTriple:
    """Factor an invertible ``a`` as ``u exp(iX) b``.

    ``u`` is unitary, ``X`` is anti-Hermitian with ``E(X) = 0`` and ``b`` is
    positive invertible in ``B``.  Writing ``c = a^* a = b exp(2iX) b``, the
    positive factor solves ``E(log(b^{-1} c b^{-1})) = 0``; it is found by the
    damped update ``b^2 <- b exp(s D) b`` with ``D = E(log(b^{-1} c b^{-1}))`` and
    step ``s <= theta``, accelerated by a Newton step whenever that step
    decreases the merit (see :func:`_damped_step`); a derivative-free
    minimization of ``||D||`` is the fallback.
    """
    a = nk.as_matrix(a)
    nk.inv(a)
    c = nk.hermitian_part(a.conj().T @ a)
    if start is None:
        b = nk.mat_exp(0.5 * nk.hermitian_part(e(nk.mat_log_pd(c))))
    else:
        b = nk.hermitian_part(e.target.project(nk.as_matrix(start)))
    hb = _herm_basis(e.target) if newton else None
    method = "fixed-point"
    its = 0
    y, d = _e_log(c, b, e)
    res = nk.opnorm(d)
    while res > target and its < max_iter:
        b, y, d = _damped_step(c, b, y, d, e, theta, hb)
        its += 1
        res = nk.opnorm(d)
    if not res <= target:
        log.warning("porta_recht fixed point stalled at %.3e after %d iterations; using fallback", res, its)
        b, nfev = _fallback(c, e, b, fallback_budget)
        its += nfev
        method = "fallback"
        # polish from the fallback point
        for _ in range(max_iter):
            y, d = _e_log(c, b, e)
            res = nk.opnorm(d)
            if res <= target:
                break
            b, y, d = _damped_step(c, b, y, d, e, theta, hb)
        if not res <= target:
            raise NoConvergence(f"E(log(b^-1 c b^-1)) stuck at {res:.3e}")
    # Polish past the stopping target: the unitarity of u = a b^-1 exp(-iX)
    # degrades like cond(a) * ||D||, so a converged but unpolished b can miss it.
    for _ in range(PR_POLISH_STEPS):
        if res <= PR_POLISH:
            break
        b_new, y_new, d_new = _damped_step(c, b, y, d, e, theta, hb)
        res_new = nk.opnorm(d_new)
        if not res_new < res:
            break
        b, y, d, res = b_new, y_new, d_new, res_new
        its += 1
    x = -0.5j * y
    x = x - e(x)
    x = (x - x.conj().T) / 2
    u = a @ nk.inv(b) @ nk.mat_exp(-1j * x)
    return PolarTriple(u, x, b, its, res, method)


def triples_equivalent(t1: PolarTriple, t2: PolarTriple, b_alg: StarAlgebra, tol: float = 1e-6) -> tuple[bool, float]:
    """Whether ``(u2, X2) = (u1 v, v^{-1} X1 v)`` for a unitary ``v`` of ``B``; returns the worst residual."""
    v = t1.u.conj().T @ t2.u
    res = max(
        b_alg.residual(v),
        nk.opnorm(v.conj().T @ v - np.eye(len(v))),
        nk.opnorm(t2.x - v.conj().T @ t1.x @ v),
    )
    return res <= tol, float(res)


def psi_e(u, x, space: CosetSpace) -> CosetPoint:
    """``[(u, X)] -> u exp(iX) G_B``."""
    return CosetPoint(nk.as_matrix(u) @ nk.mat_exp(1j * nk.as_matrix(x)), space)


def psi_e_inv(z: CosetPoint, **kw) -> tuple[np.ndarray, np.ndarray]:
    """A representative ``(u, X)`` of the class mapped to ``z``."""
    t = porta_recht(z.rep, z.space.expectation, **kw)
    return t.u, t.x


def is_fixed_point(z: CosetPoint, tol: float = MEMBER_TOL) -> tuple[bool, np.ndarray | None]:
    """Fixed point of the involution; on success also a unitary representative of ``z``."""
    if not coset_equal(z, coset_involution(z), tol):
        return False, None
    u = z.rep
    m = nk.hermitian_part(nk.inv(u) @ nk.inv_dag(u))  # in G_B^+
    w = z.space.b.project(nk.mat_sqrt_psd(m))
    return True, u @ w


@dataclass(frozen=True)
class RatioReport:
    """Finite-difference residuals on a halving step grid and their successive ratios.

    An ``O(eps^2)`` residual gives ratios near 4; ratios within ``[2, 8]`` pass.
    Residuals that are all below ``floor`` pass outright (exact derivative).
    """

    residuals: tuple
    ratios: tuple
    floor: float = 1e-12

    @property
    def passed(self) -> bool:
        if max(self.residuals) <= self.floor:
            return True
        return all(2.0 <= r <= 8.0 for r in self.ratios)


def coset_chart(z: CosetPoint) -> np.ndarray:
    """Local chart ``g G_B -> g E(g)^{-1} - 1`` near the base point, valued in ``Ker E``."""
    g = z.rep
    return g @ nk.inv(z.space.expectation(g)) - np.eye(len(g))


def tangent_check_psi(space: CosetSpace, z_dir, y_dir, eps=EPS_GRID) -> RatioReport:
    """Central differences of ``t -> chart(Psi(exp(tZ), tY))`` against ``(1 - E) Z + iY``."""
    z_dir = np.asarray(z_dir, dtype=complex)
    y_dir = np.asarray(y_dir, dtype=complex)
    expected = space.kill_e(z_dir) + 1j * y_dir

    def f(t):
        return coset_chart(psi_e(nk.mat_exp(t * z_dir), t * y_dir, space))

    res = tuple(float(np.linalg.norm((f(h) - f(-h)) / (2 * h) - expected)) for h in eps)
    return ratio_report(res)


def ratio_report(residuals) -> RatioReport:
    res = tuple(float(r) for r in residuals)
    ratios = tuple(r0 / r1 if r1 > 0 else np.inf for r0, r1 in zip(res, res[1:]))
    return RatioReport(res, ratios)


@dataclass(frozen=True)
class MRFactorization:
    a_plus: np.ndarray
    b_plus: np.ndarray
    scale: float
    residual: float


def mr_factorization(a, e: ConditionalExpectation, tol: float = 1e-10) -> MRFactorization:
    """``a^{-*} = a_+ a b_+`` with ``b_+ = E(a^* a)`` and ``a_+ = a^{-*} b_+^{-1} a^{-1}``.

    ``a`` is first scaled so that ``||a|| < sqrt(2)``; the returned factors
    belong to the scaled element ``scale * a``.
    """
    a = nk.as_matrix(a)
    norm = nk.opnorm(a)
    scale = 1.0 if norm < np.sqrt(2) else 1.0 / norm
    a = scale * a
    a_inv = nk.inv(a)
    a_md = a_inv.conj().T
    b_plus = nk.hermitian_part(e(a.conj().T @ a))
    bw = np.linalg.eigvalsh(b_plus)
    if bw[0] <= tol * bw[-1]:
        raise NotPositive("E(a^* a) is not positive definite")
    a_plus = nk.hermitian_part(a_md @ nk.inv(b_plus) @ a_inv)
    aw = np.linalg.eigvalsh(a_plus)
    if aw[0] <= tol * aw[-1]:
        raise NotPositive("a_+ is not positive definite")  # pragma: no cover - congruence of PD
    resid = nk.opnorm(a_md - a_plus @ a @ b_plus) / nk.opnorm(a_md)
    return MRFactorization(a_plus, b_plus, scale, float(resid))
