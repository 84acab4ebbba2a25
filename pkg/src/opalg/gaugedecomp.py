"""Weighted circle actions on ``M_n``: spectral expectations, gauge invariance of
CP maps, the Fourier decomposition of a dilation space, and Kraus-sum maps.

The action ``tau_lambda(x)_{ij} = lambda^{k_i - k_j} x_{ij}`` stands in for a
gauge group; its weight-``m`` part is ``E^(m)(x) = int lambda^{-m} tau_lambda(x) dlambda``,
which is the entry mask ``{k_i - k_j = m}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numkernel as nk
from .cpstate import CPMap
from .dilation import CompatiblePair
from .errors import NotGaugeInvariant, ShapeMismatch
from .sampling import as_rng
from .staralg import ConditionalExpectation, StarAlgebra


@dataclass(frozen=True)
class CircleAction:
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(k) for k in self.weights))

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def differences(self) -> np.ndarray:
        k = np.array(self.weights)
        return k[:, None] - k[None, :]

    @property
    def spread(self) -> int:
        return max(self.weights) - min(self.weights) if self.weights else 0

    @property
    def modes(self) -> range:
        return range(-self.spread, self.spread + 1)

    @property
    def default_points(self) -> int:
        return 2 * self.spread + 3

    def tau(self, lam: complex, x) -> np.ndarray:
        x = nk.as_matrix(x)
        if x.shape[0] != self.n:
            raise ShapeMismatch(f"action on M_{self.n}, matrix of size {x.shape[0]}")
        return lam ** self.differences * x

    def roots(self, k: int | None = None) -> np.ndarray:
        k = self.default_points if k is None else k
        return np.exp(2j * np.pi * np.arange(k) / k)

    def automorphism_residual(self, samples: int = 10, seed=0) -> float:
        """Multiplicativity and *-compatibility of ``tau_lambda`` at seeded ``lambda``."""
        rng = as_rng(seed)
        worst = 0.0
        for _ in range(samples):
            lam = np.exp(2j * np.pi * rng.uniform())
            x, y = (rng.standard_normal((2, self.n, self.n)) + 1j * rng.standard_normal((2, self.n, self.n)))
            worst = max(
                worst,
                nk.opnorm(self.tau(lam, x @ y) - self.tau(lam, x) @ self.tau(lam, y)),
                nk.opnorm(self.tau(lam, x.conj().T) - self.tau(lam, x).conj().T),
            )
        return worst


@dataclass(frozen=True)
class SpectralExpectation:
    """``E^(m)`` as the entry mask ``{(i, j): k_i - k_j = m}``."""

    action: CircleAction
    m: int

    @property
    def mask(self) -> np.ndarray:
        return self.action.differences == self.m

    def __call__(self, x) -> np.ndarray:
        return np.where(self.mask, nk.as_matrix(x), 0)

    def discrete(self, x, k: int | None = None) -> np.ndarray:
        """``(1/K) sum_lambda lambda^{-m} tau_lambda(x)`` over the ``K``-th roots of unity."""
        lams = self.action.roots(k)
        return sum(lam ** (-self.m) * self.action.tau(lam, x) for lam in lams) / len(lams)


def spectral_expectation(action: CircleAction, m: int) -> SpectralExpectation:
    return SpectralExpectation(action, int(m))


def spectral_residual(action: CircleAction, m: int, samples: int = 10, seed=0, k: int | None = None) -> float:
    """Entrywise mask-versus-average discrepancy on seeded matrices."""
    rng = as_rng(seed)
    e = spectral_expectation(action, m)
    worst = 0.0
    for _ in range(samples):
        x = rng.standard_normal((action.n, action.n)) + 1j * rng.standard_normal((action.n, action.n))
        worst = max(worst, float(np.max(np.abs(e(x) - e.discrete(x, k)))))
    return worst


def weight_zero_subalgebra(action: CircleAction) -> StarAlgebra:
    n = action.n
    units = [np.outer(np.eye(n)[i], np.eye(n)[j]) for i, j in zip(*np.nonzero(action.differences == 0))]
    return StarAlgebra(np.array(units, dtype=complex))


def gauge_expectation(action: CircleAction) -> ConditionalExpectation:
    """``E^(0)`` as a conditional expectation ``M_n -> weight-zero subalgebra``."""
    return ConditionalExpectation.from_function(
        StarAlgebra.full(action.n), weight_zero_subalgebra(action), spectral_expectation(action, 0), "E^(0)"
    )


def homogeneous_basis(action: CircleAction, m: int) -> list[np.ndarray]:
    n = action.n
    return [np.outer(np.eye(n)[i], np.eye(n)[j]).astype(complex) for i, j in zip(*np.nonzero(action.differences == m))]


@dataclass(frozen=True)
class GaugeVerdict:
    via_expectation: bool
    via_action: bool
    expectation_residual: float
    action_residual: float

    @property
    def agree(self) -> bool:
        return self.via_expectation == self.via_action


def gauge_invariance_equiv(phi: CPMap, action: CircleAction, lambdas=None, tol: float = 1e-9) -> GaugeVerdict:
    """Evaluate ``Phi o E^(0) = Phi`` and ``Phi o tau_lambda = Phi`` on matrix units."""
    if phi.in_dim != action.n:
        raise ShapeMismatch("map and action live on different algebras")
    if lambdas is None:
        lambdas = np.exp(2j * np.pi * np.array([0.1234, 0.377, 0.6180, 0.8901]))
    e0 = spectral_expectation(action, 0)
    units = StarAlgebra.full(action.n).basis
    res_e = max(nk.opnorm(phi(e0(x)) - phi(x)) for x in units)
    res_t = max(nk.opnorm(phi(action.tau(lam, x)) - phi(x)) for lam in lambdas for x in units)
    return GaugeVerdict(res_e <= tol, res_t <= tol, float(res_e), float(res_t))


def grading_residuals(action: CircleAction, samples: int = 10, seed=0) -> dict:
    """``E^(m)(x) E^(n)(y)`` is weight ``m + n``; ``E^(m)(x)^*`` is weight ``-m``."""
    rng = as_rng(seed)
    prod = adj = 0.0
    for _ in range(samples):
        x, y = rng.standard_normal((2, action.n, action.n)) + 1j * rng.standard_normal((2, action.n, action.n))
        for m in action.modes:
            xm = spectral_expectation(action, m)(x)
            xm_star = xm.conj().T
            adj = max(adj, nk.opnorm(xm_star - spectral_expectation(action, -m)(xm_star)))
            for n_ in action.modes:
                z = xm @ spectral_expectation(action, n_)(y)
                prod = max(prod, nk.opnorm(z - spectral_expectation(action, m + n_)(z)))
    return {"product": float(prod), "adjoint": float(adj)}


def orthogonality_mechanism(phi: CPMap, action: CircleAction) -> float:
    """``max ||Phi(y^* x)||`` over matrix units ``x, y`` of different weights."""
    worst = 0.0
    for m in action.modes:
        for n_ in action.modes:
            if m == n_:
                continue
            for x in homogeneous_basis(action, m):
                for y in homogeneous_basis(action, n_):
                    worst = max(worst, nk.opnorm(phi(y.conj().T @ x)))
    return worst


@dataclass(frozen=True, eq=False)
class FourierDecomposition:
    pair: CompatiblePair
    action: CircleAction
    components: dict  # m -> orthonormal basis columns of H^(m) (possibly zero columns)

    @property
    def dims(self) -> dict:
        return {m: q.shape[1] for m, q in self.components.items()}

    def projection(self, m: int) -> np.ndarray:
        q = self.components.get(m)
        r = self.pair.dil_a.space_dim
        return np.zeros((r, r), dtype=complex) if q is None else q @ q.conj().T

    def gauge_unitary(self, lam: complex) -> np.ndarray:
        """``U_lambda [x (x) xi] = [tau_lambda(x) (x) xi]`` on ``H_A``."""
        d = self.pair.dil_a
        alg = d.algebra
        t = np.stack([alg.coords(self.action.tau(lam, a)) for a in alg.basis], axis=1)
        return d.coord_map @ np.kron(t, np.eye(d.h0_dim)) @ d.coord_pinv

    def averaged_projection(self, m: int, k: int | None = None) -> np.ndarray:
        lams = self.action.roots(k)
        return sum(lam ** (-m) * self.gauge_unitary(lam) for lam in lams) / len(lams)

    def section_average(self, m: int, h, a, k: int | None = None) -> np.ndarray:
        """``(1/K) sum lambda^{-m} P pi_A(tau_{lambda^{-1}}(a^{-1})) h``: fiber of ``P^(m) gamma(h)`` at ``a G_B``."""
        pair = self.pair
        a_inv = nk.inv(a)
        h = np.asarray(h, dtype=complex)
        lams = self.action.roots(k)
        acc = sum(lam ** (-m) * (pair.projection_p @ pair.dil_a.pi(self.action.tau(1 / lam, a_inv)) @ h) for lam in lams)
        return acc / len(lams)

    def residuals(self, samples: int = 5, seed=0) -> dict:
        """Orthogonality, completeness, idempotence and span-versus-average agreement."""
        rng = as_rng(seed)
        r = self.pair.dil_a.space_dim
        ms = sorted(self.components)
        ortho = 0.0
        for i, m in enumerate(ms):
            for n_ in ms[i + 1 :]:
                ortho = max(ortho, nk.opnorm(self.components[m].conj().T @ self.components[n_]))
        total = sum(self.projection(m) for m in ms)
        idem = max(nk.opnorm(self.projection(m) @ self.projection(m) - self.projection(m)) for m in ms)
        op_avg = max(nk.opnorm(self.averaged_projection(m) - self.projection(m)) for m in self.action.modes)
        sec = 0.0
        alg = self.pair.a
        for _ in range(samples):
            h = rng.standard_normal(r) + 1j * rng.standard_normal(r)
            a = alg.random_invertible(rng, 10.0)
            pi_a_inv = self.pair.dil_a.pi(nk.inv(a))
            for m in self.action.modes:
                lhs = self.pair.dil_a.pi(a) @ self.pair.embedding @ self.section_average(m, h, a)
                rhs = self.pair.dil_a.pi(a) @ self.pair.embedding @ self.pair.projection_p @ pi_a_inv @ self.projection(m) @ h
                sec = max(sec, float(np.linalg.norm(lhs - rhs)))
        return {
            "orthogonality": float(ortho),
            "completeness": nk.opnorm(total - np.eye(r)),
            "idempotence": float(idem),
            "average_vs_span_operator": float(op_avg),
            "average_vs_span_section": sec,
        }


def fourier_decompose(pair: CompatiblePair, action: CircleAction, tol: float = 1e-9) -> FourierDecomposition:
    """``H_A = sum_m H^(m)`` with ``H^(m) = span pi_A(A^(m)) V H_0``."""
    verdict = gauge_invariance_equiv(pair.dil_a.phi, action, tol=tol)
    if not verdict.via_expectation:
        raise NotGaugeInvariant(f"Phi o E^(0) differs from Phi by {verdict.expectation_residual:.3e}")
    wz = weight_zero_subalgebra(action)
    if pair.b.dim != wz.dim or not wz.is_subalgebra_of(pair.b):
        raise NotGaugeInvariant("the pair is not built over the weight-zero subalgebra")
    d = pair.dil_a
    comps = {}
    for m in action.modes:
        mats = homogeneous_basis(action, m)
        if not mats:
            comps[m] = np.zeros((d.space_dim, 0), dtype=complex)
            continue
        comps[m] = nk.range_basis(np.concatenate([d.pi(x) @ d.isometry_v for x in mats], axis=1), 1e-9)
    return FourierDecomposition(pair, action, comps)


def kraus_sum_map(kraus) -> CPMap:
    """``T -> sum_j v_j T v_j^*``; unital iff ``sum v_j v_j^* = 1``, trace preserving iff ``sum v_j^* v_j = 1``."""
    kraus = [nk.as_matrix(v, square=False) for v in kraus]
    if not kraus or any(v.shape != kraus[0].shape for v in kraus):
        raise ShapeMismatch("Kraus family must be non-empty with a common shape")
    return CPMap.from_kraus(kraus)
