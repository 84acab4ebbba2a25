import numpy as np
import pytest

from opalg import numkernel as nk
from opalg.errors import NotIdempotent, NotProjection, NotSubalgebra, Singular
from opalg.sampling import random_unitary, rng_for
from opalg.staralg import (
    Idempotent,
    StarAlgebra,
    algebra_from_generators,
    ap_space,
    ap_space_report,
    commutant,
    compression,
    expectation_ep,
    expectation_trace,
    idempotent_equivalent,
    isotropy_class_member,
    tomiyama_check,
)

from helpers import I2, P0, X, Z


def random_projection(rng, n, k):
    u = random_unitary(rng, n)
    return u[:, :k] @ u[:, :k].conj().T


def test_generators_examples():
    assert algebra_from_generators(2, []).dim == 1
    assert algebra_from_generators(2, [P0]).dim == 2
    assert algebra_from_generators(2, [X, Z]).dim == 4


def test_generated_algebra_is_closed(rng):
    g = rng.standard_normal((4, 4)) * (rng.uniform(size=(4, 4)) < 0.3)
    alg = algebra_from_generators(4, [np.kron(np.eye(2), g[:2, :2])])
    assert alg.closure_residual() <= 1e-10
    assert alg.contains_unit and alg.is_star_closed()


def test_generators_shape_mismatch():
    with pytest.raises(Exception):
        algebra_from_generators(2, [np.eye(3)])


def test_commutant_examples():
    m2 = StarAlgebra.full(2)
    assert commutant([I2], m2).dim == 4
    d = commutant([P0], m2)
    assert d.dim == 2 and d.contains(np.diag([2.0, 5.0])) and not d.contains(X)
    assert commutant([X, Z], m2).dim == 1


def test_commutant_of_block_projection(rng):
    p = random_projection(rng, 5, 2)
    c = commutant([p], StarAlgebra.full(5))
    assert c.dim == 2 * 2 + 3 * 3
    assert max(nk.opnorm(b @ p - p @ b) for b in c.basis) <= 1e-10


def test_idempotent_equivalence_examples():
    q = np.array([[1.0, 1.0], [0.0, 0.0]])
    assert idempotent_equivalent(P0, P0)
    assert idempotent_equivalent(P0, q)
    assert not idempotent_equivalent(P0, np.diag([0.0, 1.0]))


def test_idempotent_rejects_non_idempotent():
    with pytest.raises(NotIdempotent):
        Idempotent(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_isotropy_examples():
    assert isotropy_class_member(np.diag([2.0, -3.0]), P0)
    assert not isotropy_class_member(X, P0)
    assert isotropy_class_member(np.array([[1.0, 1.0], [0.0, 1.0]]), P0)
    with pytest.raises(Singular):
        isotropy_class_member(np.zeros((2, 2)), P0)


def test_ap_space_examples():
    ap = ap_space(P0, StarAlgebra.full(2))
    assert ap.shape[0] == 3
    upper = StarAlgebra.span(ap)
    assert upper.contains(np.array([[1.0, 2.0], [0.0, 3.0]])) and not upper.contains(np.array([[0.0, 0.0], [1.0, 0.0]]))
    assert ap_space(np.eye(3), StarAlgebra.full(3)).shape[0] == 9


@pytest.mark.parametrize("n, k", [(2, 1), (3, 1), (4, 2), (5, 3)])
def test_ap_space_dimension_count(rng, n, k):
    rep = ap_space_report(random_projection(rng, n, k), StarAlgebra.full(n), rng)
    assert rep.dim_ap + rep.dim_ap_hat - rep.dim_commutant == rep.dim_algebra
    assert rep.ok


def test_ap_space_needs_projection():
    with pytest.raises(NotProjection):
        ap_space(np.array([[1.0, 1.0], [0.0, 0.0]]), StarAlgebra.full(2))


def test_ep_examples(rng):
    m2 = StarAlgebra.full(2)
    e = expectation_ep(P0, m2)
    assert np.allclose(e(np.array([[1, 2], [3, 4]])), np.diag([1, 4]))
    t = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    assert np.allclose(expectation_ep(I2, m2)(t), t)


def test_ep_idempotent_random(rng):
    p = random_projection(rng, 4, 2)
    e = expectation_ep(p, StarAlgebra.full(4))
    t = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert nk.opnorm(e(e(t)) - e(t)) <= 1e-12


def test_ep_requires_projection():
    with pytest.raises(NotProjection):
        expectation_ep(np.array([[1.0, 1.0], [0.0, 0.0]]), StarAlgebra.full(2))


def test_trace_expectation_examples(rng):
    m2 = StarAlgebra.full(2)
    e_tr = expectation_trace(m2, StarAlgebra.diagonal(2))
    assert nk.opnorm(e_tr.matrix - expectation_ep(P0, m2).matrix) <= 1e-12
    assert np.allclose(expectation_trace(m2, m2).matrix, np.eye(4))
    t = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    e_sc = expectation_trace(StarAlgebra.full(3), StarAlgebra.scalars(3))
    assert np.allclose(e_sc(t), np.trace(t) / 3 * np.eye(3))


def test_trace_expectation_rejects_non_subalgebra():
    upper = StarAlgebra.span(np.array([np.eye(2), [[0, 1], [0, 0]]], dtype=complex))
    with pytest.raises(NotSubalgebra):
        expectation_trace(StarAlgebra.full(2), upper)


@pytest.mark.parametrize("n, k", [(2, 1), (3, 2), (5, 2)])
def test_tomiyama_ep_passes(rng, n, k):
    rep = tomiyama_check(expectation_ep(random_projection(rng, n, k), StarAlgebra.full(n)), 50, rng)
    assert rep.passed, rep.residuals


def test_tomiyama_compression_fails_unitality():
    rep = tomiyama_check(compression(P0, StarAlgebra.full(2)), 10, 0)
    assert "unital" in rep.failures
    assert rep.residuals["unital"] == pytest.approx(1.0)


def test_tomiyama_scalars_schwarz(rng):
    e = expectation_trace(StarAlgebra.full(3), StarAlgebra.scalars(3))
    rep = tomiyama_check(e, 50, rng)
    assert rep.passed and rep.residuals["schwarz"] == 0.0
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    gap = e(a.conj().T @ a) - e(a).conj().T @ e(a)
    assert np.allclose(gap, (np.trace(a.conj().T @ a) / 3 - abs(np.trace(a) / 3) ** 2) * np.eye(3))
    assert gap[0, 0].real >= 0



def test_random_invertible_is_well_scaled():
    """A nearly scalar Hermitian draw must not be blown up into a huge or tiny element."""
    d2 = StarAlgebra.diagonal(2)
    for k in range(300):
        g = d2.random_invertible(rng_for(0, f"inv-{k}"), 5.0)
        s = np.linalg.svd(g, compute_uv=False)
        assert s[0] / s[-1] <= 5.0 * (1 + 1e-12)
        assert 1 / 5.0 - 1e-12 <= s[-1] and s[0] <= 5.0 + 1e-12
