import numpy as np
import pytest
import scipy.optimize

from opalg import geomorbit as gm
from opalg import numkernel as nk
from opalg.errors import ContextMismatch, NotPositive, Singular
from opalg.sampling import random_unitary
from opalg.staralg import ConditionalExpectation, StarAlgebra, expectation_ep, expectation_trace


def space_diag(n=3):
    return gm.CosetSpace(expectation_trace(StarAlgebra.full(n), StarAlgebra.diagonal(n)))


def space_block(n=4, k=2):
    return gm.CosetSpace(expectation_ep(np.diag([1.0] * k + [0.0] * (n - k)), StarAlgebra.full(n)))


def herm_basis(alg):
    """Real basis of the Hermitian part of a *-algebra (as a real vector space)."""
    out = []
    for b in alg.basis:
        for h in (nk.hermitian_part(b), nk.hermitian_part(1j * b)):
            out.append(h)
    flat = np.array([np.concatenate([h.real.ravel(), h.imag.ravel()]) for h in out])
    _, s, vh = np.linalg.svd(flat, full_matrices=False)
    keep = s > 1e-10 * s[0]
    n = alg.n
    return [(v[: n * n] + 1j * v[n * n :]).reshape(n, n) for v in vh[keep]]


def brute_force_b(a, e, start_rng):
    """Least squares over b = exp(L), L in Herm(B), and H in Herm with E(H) = 0 for
    a* a = b exp(2H) b.  Independent of the fixed-point iteration."""
    c = a.conj().T @ a
    lb = herm_basis(e.target)
    hp = [h for h in (nk.hermitian_part(m - e(m)) for m in herm_basis(e.source)) if nk.opnorm(h) > 1e-12]
    hp = herm_basis(StarAlgebra.span(np.array(hp))) if hp else []
    hp = [nk.hermitian_part(h - e(h)) for h in hp]

    def unpack(theta):
        lmat = sum(t * m for t, m in zip(theta[: len(lb)], lb))
        hmat = sum(t * m for t, m in zip(theta[len(lb) :], hp)) if hp else 0
        return nk.mat_exp(lmat), hmat

    def resid(theta):
        b, h = unpack(theta)
        r = b @ nk.mat_exp(2 * (h if np.ndim(h) else np.zeros_like(c))) @ b - c
        return np.concatenate([r.real.ravel(), r.imag.ravel()])

    best = []
    for _ in range(3):
        x0 = 0.3 * start_rng.standard_normal(len(lb) + len(hp))
        sol = scipy.optimize.least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000)
        best.append(unpack(sol.x)[0])
    return best


# cosets -------------------------------------------------------------------------------


def test_coset_equal_examples(rng):
    sp = space_diag()
    z = sp.random_point(rng)
    assert gm.coset_equal(z, z)
    assert gm.coset_equal(z, z.with_rep(np.diag([2.0, -1j, 0.5])))
    x = sp.random_p(rng)
    assert not gm.coset_equal(sp.identity(), sp.point(nk.mat_exp(1j * x)))


def test_coset_equal_context_mismatch(rng):
    with pytest.raises(ContextMismatch):
        gm.coset_equal(space_diag().identity(), space_diag().identity())


def test_coset_point_needs_invertible():
    with pytest.raises(Singular):
        space_diag().point(np.zeros((3, 3)))


def test_involution_examples(rng):
    sp = space_block()
    u = random_unitary(rng, 4)
    z = sp.point(u)
    assert gm.coset_equal(gm.coset_involution(z), z)
    x = sp.random_p(rng)
    assert gm.coset_equal(gm.coset_involution(sp.point(nk.mat_exp(1j * x))), sp.point(nk.mat_exp(-1j * x)))
    w = sp.random_point(rng)
    assert gm.coset_equal(gm.coset_involution(gm.coset_involution(w)), w)


# Porta-Recht --------------------------------------------------------------------------


def test_polar_unitary(rng):
    sp = space_diag()
    u = random_unitary(rng, 3)
    t = gm.porta_recht(u, sp.expectation)
    assert nk.opnorm(t.x) <= 1e-10 and nk.opnorm(t.b - np.eye(3)) <= 1e-10 and nk.opnorm(t.u - u) <= 1e-10


def test_polar_exponential(rng):
    sp = space_block()
    x0 = 0.7 * sp.random_p(rng)
    t = gm.porta_recht(nk.mat_exp(1j * x0), sp.expectation)
    assert nk.opnorm(t.x - x0) <= 1e-9 and nk.opnorm(t.u - np.eye(4)) <= 1e-9 and nk.opnorm(t.b - np.eye(4)) <= 1e-9


def test_polar_positive_in_b(rng):
    sp = space_diag()
    b0 = np.diag([3.0, 0.5, 1.5])
    t = gm.porta_recht(b0, sp.expectation)
    assert nk.opnorm(t.b - b0) <= 1e-10 and nk.opnorm(t.x) <= 1e-10 and nk.opnorm(t.u - np.eye(3)) <= 1e-10


@pytest.mark.parametrize("make", [space_diag, space_block])
def test_polar_random_matches_brute_force(rng, make):
    sp = make()
    for _ in range(3):
        a = sp.a.random_invertible(rng, 100.0)
        t = gm.porta_recht(a, sp.expectation)
        assert nk.opnorm(t.reconstruct() - a) <= 1e-7 * nk.opnorm(a)
        assert nk.opnorm(sp.expectation(t.x)) <= 1e-8
        assert nk.opnorm(t.x + t.x.conj().T) <= 1e-10
        for b in brute_force_b(a, sp.expectation, rng):
            assert nk.opnorm(b - t.b) <= 1e-6


def test_polar_restarts_agree(rng):
    sp = space_block(5, 2)
    a = sp.a.random_invertible(rng, 50.0)
    t1 = gm.porta_recht(a, sp.expectation)
    for _ in range(3):
        t2 = gm.porta_recht(a, sp.expectation, start=sp.b.random_positive(rng) + 0.1 * np.eye(5))
        ok, res = gm.triples_equivalent(t1, t2, sp.b)
        assert ok and nk.opnorm(t1.b - t2.b) <= 1e-6, res


def test_polar_without_newton_still_converges(rng):
    sp = space_diag()
    a = sp.a.random_invertible(rng, 20.0)
    t = gm.porta_recht(a, sp.expectation, newton=False)
    assert nk.opnorm(t.reconstruct() - a) <= 1e-7 * nk.opnorm(a)


def test_polar_singular():
    with pytest.raises(Singular):
        gm.porta_recht(np.diag([1.0, 0.0, 1.0]), space_diag().expectation)


# Psi^E and fixed points ---------------------------------------------------------------


def test_psi_round_trips(rng):
    sp = space_block()
    z = gm.psi_e(np.eye(4), np.zeros((4, 4)), sp)
    assert gm.coset_equal(z, sp.identity())
    u = random_unitary(rng, 4)
    u2, x2 = gm.psi_e_inv(gm.psi_e(u, np.zeros((4, 4)), sp))
    assert nk.opnorm(x2) <= 1e-9 and sp.b.contains(u.conj().T @ u2, 1e-8)
    x = sp.random_p(rng)
    z = gm.psi_e(u, x, sp)
    assert gm.coset_equal(gm.psi_e(*gm.psi_e_inv(z), sp), z, 1e-7)


def test_fixed_point_examples(rng):
    sp = space_block()
    u = random_unitary(rng, 4)
    ok, w = gm.is_fixed_point(sp.point(u))
    assert ok and nk.opnorm(w.conj().T @ w - np.eye(4)) <= 1e-9 and gm.coset_equal(sp.point(w), sp.point(u))
    assert not gm.is_fixed_point(sp.point(nk.mat_exp(1j * sp.random_p(rng))))[0]
    b = sp.b.random_positive(rng) + 0.2 * np.eye(4)
    ok, w = gm.is_fixed_point(sp.point(u @ b))
    assert ok and nk.opnorm(w - u) <= 1e-8


def test_tangent_examples(rng):
    sp = space_diag()
    zero = np.zeros((3, 3))
    rep = gm.tangent_check_psi(sp, zero, zero)
    assert max(rep.residuals) <= 1e-12 and rep.passed
    y = sp.random_p(rng)
    assert gm.tangent_check_psi(sp, zero, y).passed
    z = 1j * sp.a.random_hermitian(rng)
    assert gm.tangent_check_psi(sp, z, zero).passed
    assert gm.tangent_check_psi(sp, z, y).passed


def test_chart_derivative_is_i_y(rng):
    sp = space_diag()
    y = sp.random_p(rng)
    def chart(h):
        return gm.coset_chart(gm.psi_e(np.eye(3), h * y, sp))

    d = (chart(1e-4) - chart(-1e-4)) / 2e-4
    assert nk.opnorm(d - 1j * y) <= 1e-6
    assert nk.opnorm(d - y) > 0.1


def test_ratio_report():
    assert gm.ratio_report([4e-6, 1e-6, 2.5e-7]).passed
    assert not gm.ratio_report([4e-6, 3.9e-6, 3.8e-6]).passed
    assert gm.ratio_report([1e-14, 1e-13, 1e-14]).passed


# MR ------------------------------------------------------------------------------------


def test_mr_unitary(rng):
    u = random_unitary(rng, 3)
    mr = gm.mr_factorization(u, space_diag().expectation)
    assert nk.opnorm(mr.a_plus - np.eye(3)) <= 1e-10 and nk.opnorm(mr.b_plus - np.eye(3)) <= 1e-10


def test_mr_positive(rng):
    sp = space_diag()
    a = sp.a.random_positive(rng)
    a = a / (1.01 * nk.opnorm(a))  # below sqrt(2): no rescaling
    mr = gm.mr_factorization(a, sp.expectation)
    b_plus = sp.expectation(a @ a)
    assert nk.opnorm(mr.b_plus - b_plus) <= 1e-12
    assert nk.opnorm(mr.a_plus - nk.inv(a) @ nk.inv(b_plus) @ nk.inv(a)) <= 1e-9
    assert mr.residual <= 1e-9


def test_mr_random(rng):
    sp = space_diag()
    for _ in range(10):
        a = sp.a.random_invertible(rng, 100.0) * rng.uniform(0.1, 10)
        mr = gm.mr_factorization(a, sp.expectation)
        sa = mr.scale * a
        lhs = nk.inv_dag(sa)
        assert nk.opnorm(lhs - mr.a_plus @ sa @ mr.b_plus) <= 1e-9 * nk.opnorm(lhs)


def test_mr_not_positive():
    # a "expectation" that is not positive produces a non-PD b_+
    m2 = StarAlgebra.full(2)
    bad = ConditionalExpectation.from_function(m2, StarAlgebra.diagonal(2), lambda t: -np.diag(np.diag(t)))
    with pytest.raises(NotPositive):
        gm.mr_factorization(np.eye(2), bad)


# orbit structure ----------------------------------------------------------------------


def unitary_in(alg, rng):
    return nk.mat_exp(1j * alg.random_hermitian(rng))


@pytest.mark.parametrize("make", [space_diag, space_block])
def test_orbit_stratification_witness(rng, make):
    """``w exp(iX) G_B`` and ``exp(iY) G_B`` coincide when ``Y = w X w^{-1}`` with ``w`` in ``U_B``,
    and the Porta-Recht ``X`` is recovered up to that conjugation."""
    sp = make()
    for _ in range(5):
        x = sp.random_p(rng, 0.7)
        w = unitary_in(sp.b, rng)
        y = w @ x @ w.conj().T
        assert nk.opnorm(sp.expectation(y)) <= 1e-12
        z1, z2 = gm.psi_e(w, x, sp), gm.psi_e(np.eye(sp.n), y, sp)
        assert gm.coset_equal(z1, z2)
        t = gm.porta_recht(z1.rep, sp.expectation)
        ok, res = gm.triples_equivalent(gm.PolarTriple(w, x, np.eye(sp.n)), t, sp.b)
        assert ok, res
        # a different X gives a different coset, detected by the spectrum of the recovered X
        other = sp.random_p(rng, 0.7)
        z3 = gm.psi_e(np.eye(sp.n), other, sp)
        assert not gm.coset_equal(z1, z3)
        x3 = gm.porta_recht(z3.rep, sp.expectation).x
        spec = lambda m: np.sort(np.linalg.eigvalsh(1j * m))
        assert np.abs(spec(x3) - spec(other)).max() <= 1e-8
        assert np.abs(spec(x3) - spec(x)).max() > 1e-3


@pytest.mark.parametrize("make", [space_diag, space_block])
def test_positive_elements_of_b_have_square_roots_in_b(rng, make):
    sp = make()
    for _ in range(20):
        b = sp.b.random_positive(rng) + 0.05 * np.eye(sp.n)
        w = nk.mat_sqrt_psd(b)
        assert sp.b.residual(w) <= 1e-10
        assert nk.opnorm(w.conj().T @ w - b) <= 1e-10 * nk.opnorm(b)
