import numpy as np
import pytest

from opalg import geomorbit as gm
from opalg import numkernel as nk
from opalg import rkbundle as rk
from opalg.cpstate import CPMap, random_unital_cp
from opalg.dilation import compatible_pair
from opalg.errors import BaseMismatch, IllConditionedGram, VectorNotInFiber
from opalg.sampling import random_unitary, rng_for
from opalg.staralg import StarAlgebra, expectation_ep, expectation_trace


@pytest.fixture
def bundle():
    """M_3 over {p}' with p = diag(1, 1, 0) and a channel that factors through E_p."""
    p = np.diag([1.0, 1.0, 0.0])
    e = expectation_ep(p, StarAlgebra.full(3))
    psi = random_unital_cp(rng_for(3, "bundle"), 3, 2)
    phi = CPMap.from_function(lambda t: psi(e(t)), 3, 2)
    return rk.HomogeneousBundle.from_pair(compatible_pair(e, phi))


@pytest.fixture
def state_bundle():
    e = expectation_trace(StarAlgebra.full(3), StarAlgebra.diagonal(3))
    return rk.HomogeneousBundle.from_pair(compatible_pair(e, CPMap.vector_state([1, 0, 0])))


def split_bundle():
    """pi_A = id (+) id on C^2 (+) C^2 with H_B = C e_1 in the first copy: the generated
    subspace is the first copy only."""
    e = expectation_ep(np.diag([1.0, 0.0]), StarAlgebra.full(2))
    iota = np.zeros((4, 1), dtype=complex)
    iota[0, 0] = 1
    return rk.HomogeneousBundle.from_data(e, lambda a: np.kron(np.eye(2), a), lambda b: b[:1, :1], iota)


def rand_vec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def test_bundle_structure(bundle):
    assert max(bundle.residuals().values()) <= 1e-10


def test_basic_map_examples(bundle, rng):
    f = rand_vec(rng, bundle.h_b_dim)
    sp = bundle.space
    xi = bundle.element(sp.identity(), f)
    assert np.allclose(rk.basic_map(xi), bundle.iota @ f)
    z = sp.random_point(rng)
    eta = bundle.element(z, f)
    w = sp.b.random_invertible(rng, 10.0)
    assert np.linalg.norm(rk.basic_map(eta) - rk.basic_map(eta.with_rep(w))) <= 1e-10
    assert rk.element_equal(eta, eta.with_rep(w))
    u = sp.a.random_unitary(rng)
    assert np.linalg.norm(rk.basic_map(bundle.element(sp.point(u), f))) == pytest.approx(np.linalg.norm(f))


def test_pairing_examples(bundle, rng):
    sp = bundle.space
    f, g = rand_vec(rng, bundle.h_b_dim), rand_vec(rng, bundle.h_b_dim)
    e0 = sp.identity()
    assert rk.bundle_pair(bundle.element(e0, f), bundle.element(e0, f)) == pytest.approx(np.vdot(f, f))
    u = sp.a.random_invertible(rng, 10.0)
    xi = bundle.element(sp.point(u), f)
    eta = bundle.element(sp.point(nk.inv_dag(u)), g)
    assert rk.bundle_pair(xi, eta) == pytest.approx(np.vdot(g, f), abs=1e-10)
    assert rk.bundle_pair(eta, xi) == pytest.approx(np.conj(rk.bundle_pair(xi, eta)), abs=1e-10)


def test_pairing_base_mismatch(bundle, rng):
    sp = bundle.space
    z = sp.point(nk.mat_exp(1j * sp.random_p(rng)))
    f = rand_vec(rng, bundle.h_b_dim)
    with pytest.raises(BaseMismatch):
        rk.bundle_pair(bundle.element(z, f), bundle.element(z, f))


def test_kernel_eval_examples(bundle, rng):
    sp = bundle.space
    f = rand_vec(rng, bundle.h_b_dim)
    e0 = sp.identity()
    out = rk.kernel_eval(e0, e0, bundle.element(e0, f))
    assert np.allclose(out.fiber, f)
    v = sp.a.random_unitary(rng)
    out = rk.kernel_eval(e0, sp.point(v), bundle.element(sp.point(v), f))
    assert np.allclose(out.fiber, bundle.p @ bundle.pi_a(v) @ bundle.iota @ f)


def test_kernel_diagonal_is_positive(bundle, rng):
    sp = bundle.space
    for _ in range(5):
        s = sp.random_point(rng, 10.0)
        xi = bundle.element(gm.coset_involution(s), rand_vec(rng, bundle.h_b_dim))
        val = rk.bundle_pair(rk.kernel_eval(s, xi.base, xi), xi)
        assert val.real >= -1e-12 and abs(val.imag) <= 1e-10


def test_gram_single_point(bundle, rng):
    pts, vecs = rk.random_configuration(bundle, 1, rng, involuted=False)
    ks = rk.kernel_gram(pts, vecs)
    assert ks.gram.shape == (1, 1) and ks.gram[0, 0].real >= 0 and abs(ks.gram[0, 0].imag) <= 1e-12


def test_gram_unitary_points_oracle(bundle, rng):
    sp = bundle.space
    us = [sp.a.random_unitary(rng) for _ in range(5)]
    fs = [rand_vec(rng, bundle.h_b_dim) for _ in us]
    pts = [sp.point(u) for u in us]
    vecs = [bundle.element(sp.point(u), f) for u, f in zip(us, fs)]  # u^{-*} = u
    ks = rk.kernel_gram(pts, vecs)
    cols = [bundle.pi_a(u) @ bundle.iota @ f for u, f in zip(us, fs)]
    direct = np.array([[np.vdot(cols[l], cols[j]) for j in range(5)] for l in range(5)])
    assert nk.opnorm(ks.gram - direct) <= 1e-12
    assert ks.min_eigenvalue >= -1e-12


@pytest.mark.parametrize("which", ["bundle", "state_bundle"])
def test_gram_random_psd(request, rng, which):
    bnd = request.getfixturevalue(which)
    pts, vecs = rk.random_configuration(bnd, 6, rng)
    ks = rk.kernel_gram(pts, vecs)
    assert ks.min_eigenvalue >= -1e-8
    assert ks.hermitian_residual <= 1e-10
    assert nk.opnorm(ks.gram - rk.ambient_gram(vecs)) <= 1e-9


def test_realization_examples(bundle, rng):
    f = rand_vec(rng, bundle.h_b_dim)
    sec = rk.realization(bundle, bundle.iota @ f)
    assert np.allclose(sec(bundle.space.identity()).fiber, f)


def test_realization_kernel_is_complement():
    bnd = split_bundle()
    ker = rk.realization_kernel(bnd)
    assert ker.shape[1] == 2
    h = ker[:, 0]
    sec = rk.realization(bnd, h)
    rng = np.random.default_rng(0)
    for _ in range(5):
        z = bnd.space.random_point(rng)
        assert np.linalg.norm(sec(z).fiber) <= 1e-12
    # a pair from a dilation is always generated
    assert rk.realization_kernel(rk.HomogeneousBundle.from_pair(
        compatible_pair(expectation_ep(np.diag([1.0, 0.0]), StarAlgebra.full(2)), CPMap.vector_state([1, 0]))
    )).shape[1] == 0


def test_intertwining(bundle, rng):
    pts = [bundle.space.random_point(rng, 10.0) for _ in range(5)]
    h = rand_vec(rng, bundle.h_a_dim)
    assert rk.intertwine_check(bundle, np.eye(3), h, pts) <= 1e-14
    assert rk.intertwine_check(bundle, bundle.a.random_unitary(rng), h, pts) <= 1e-8
    assert rk.intertwine_check(bundle, bundle.a.random_invertible(rng, 20.0), h, pts) <= 1e-8


def test_realization_of_kernel_section(bundle, rng):
    sp = bundle.space
    t = sp.random_point(rng, 10.0)
    eta = bundle.element(t, rand_vec(rng, bundle.h_b_dim))
    sec = rk.realization(bundle, rk.basic_map(eta))
    ksec = rk.kernel_section(t, eta)
    for _ in range(4):
        s = sp.random_point(rng, 10.0)
        assert np.linalg.norm(rk.basic_map(sec(s)) - rk.basic_map(ksec(s))) <= 1e-10


def test_evaluation_identity_examples(bundle, rng):
    sp = bundle.space
    e0 = sp.identity()
    assert rk.evaluation_identity_check(e0, e0, bundle) <= 1e-10
    assert nk.opnorm(rk.kernel_matrix(e0, e0, bundle) - np.eye(bundle.h_b_dim)) <= 1e-12
    u, v = sp.point(random_unitary(rng, 3)), sp.point(random_unitary(rng, 3))
    assert rk.evaluation_identity_check(u, v, bundle) <= 1e-8
    for _ in range(3):
        s, t = sp.random_point(rng, 10.0), sp.random_point(rng, 10.0)
        assert rk.evaluation_identity_check(s, t, bundle, extra_points=[sp.random_point(rng, 10.0)]) <= 1e-8


def test_evaluation_identity_other_dual_rep(bundle, rng):
    sp = bundle.space
    s, t = sp.random_point(rng, 10.0), sp.random_point(rng, 10.0)
    t_dual = gm.coset_involution(t).with_rep(sp.b.random_invertible(rng, 5.0))
    assert rk.evaluation_identity_check(s, t, bundle, t_dual=t_dual) <= 1e-8


def test_star_adjoint_ill_conditioned(bundle, rng):
    sp = bundle.space
    t = sp.random_point(rng, 10.0)
    ks = rk.kernel_space(rk.fiber_basis(gm.coset_involution(t), bundle))
    # a representative of t^{-*} scaled by a nearly singular element of B
    w = np.diag([1.0, 1.0, 1e-13])
    with pytest.raises(IllConditionedGram):
        rk.star_adjoint_evaluation(ks, t, gm.coset_involution(t).with_rep(w))


def test_prods_and_isometry(bundle, rng):
    sp = bundle.space
    s, t = sp.random_point(rng, 10.0), sp.random_point(rng, 10.0)
    ks = rk.kernel_space([e for z in (s, t) for e in rk.fiber_basis(z, bundle)])
    eta = bundle.element(t, rand_vec(rng, bundle.h_b_dim))
    xi = bundle.element(s, rand_vec(rng, bundle.h_b_dim))
    assert rk.prods_residual(ks, eta, xi) <= 1e-9
    assert rk.isometry_residual(ks) <= 1e-9


def test_holomorphy(bundle, rng):
    sp = bundle.space
    for _ in range(3):
        h = rand_vec(rng, bundle.h_a_dim)
        z0 = sp.random_point(rng, 10.0)
        d = sp.a.random_element(rng)
        rep = rk.holomorphy_check(bundle, h, z0, d)
        assert rep.passed and max(rep.residuals) > rep.floor
        assert all(3.0 <= r <= 5.0 for r in rep.ratios)
        assert not rk.holomorphy_check(bundle, h, z0, d, conjugate=True).passed


def test_holomorphy_constant_section():
    bnd = split_bundle()
    h = rk.realization_kernel(bnd)[:, 0]
    rng = np.random.default_rng(1)
    rep = rk.holomorphy_check(bnd, h, bnd.space.random_point(rng), bnd.a.random_element(rng))
    assert max(rep.residuals) <= 1e-14 and rep.passed


def test_unitary_restriction(bundle, rng):
    h = rand_vec(rng, bundle.h_a_dim)
    rep = rk.unitary_restriction_check(bundle, h, [np.eye(3)])
    f = bundle.p @ h
    assert rep.min_diagonal_pairing == pytest.approx(np.linalg.norm(bundle.iota @ f) ** 2)
    rep = rk.unitary_restriction_check(bundle, h, [random_unitary(rng, 3) for _ in range(20)])
    assert rep.passed()


# Grassmannian ------------------------------------------------------------------------


def test_grassmann_kernel_examples(rng):
    s = rk.SubspacePoint.span(rng.standard_normal((4, 2)))
    x = s.ortho_basis @ rand_vec(rng, 2)
    assert np.allclose(rk.grassmann_kernel(s, s, x), x)
    s1 = rk.SubspacePoint.span(np.eye(4)[:, :2])
    s2 = rk.SubspacePoint.span(np.eye(4)[:, 2:])
    assert np.allclose(rk.grassmann_kernel(s1, s2, np.eye(4)[:, 3]), 0)
    with pytest.raises(VectorNotInFiber):
        rk.grassmann_kernel(s1, s1, np.eye(4)[:, 3])


def test_grassmann_gram_psd(rng):
    subs = [rk.SubspacePoint.span(rand_vec(rng, 10).reshape(5, 2)) for _ in range(6)]
    vecs = [s.ortho_basis @ rand_vec(rng, 2) for s in subs]
    g = rk.grassmann_gram(subs, vecs)
    assert np.linalg.eigvalsh(nk.hermitian_part(g))[0] >= -1e-10


def test_tautological_bundle(rng):
    s0 = rk.SubspacePoint.span(rng.standard_normal((4, 2)) + 0j)
    bnd = rk.tautological_bundle(s0)
    assert max(bnd.residuals().values()) <= 1e-10
    f = rand_vec(rng, 2)
    s, x = rk.tautological_lift(bnd, np.eye(4), f)
    assert s.equals(s0) and np.allclose(x, s0.ortho_basis @ f)
    u = random_unitary(rng, 4)
    s, x = rk.tautological_lift(bnd, u, f)
    assert s.dim == s0.dim and s.perp().dim == s0.perp().dim
    xi = rk.tautological_unlift(bnd, s, x)
    assert np.allclose(rk.basic_map(xi), x)
    assert gm.coset_equal(xi.base, bnd.space.point(u))
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert rk.perp_image_residual(s0, g) <= 1e-10
    subs = [s0.image(random_unitary(rng, 4)) for _ in range(4)]
    assert rk.tautological_intertwining_residual(u, rand_vec(rng, 4), subs) <= 1e-10
