import dataclasses

import numpy as np
import pytest

from opalg import numkernel as nk
from opalg.cpstate import CPMap, State, random_unital_cp
from opalg.dilation import compatible_pair, dilation_residual, gns, representation_residuals, stinespring
from opalg.errors import IncompatibleData, NotCP, NotState, NotUnital
from opalg.staralg import StarAlgebra, expectation_ep, expectation_trace, identity_expectation

from helpers import P0


def _gram_rank_oracle(alg, phi):
    """Rank of the form (a_i (x) e_k | a_j (x) e_l) = Phi(a_i^* a_j)[k, l], assembled naively."""
    h0 = phi.out_dim
    rows = []
    for ai in alg.basis:
        for k in range(h0):
            row = []
            for aj in alg.basis:
                img = phi(ai.conj().T @ aj)
                row.extend(img[k, l] for l in range(h0))
            rows.append(row)
    return nk.numerical_rank(np.array(rows), 1e-10)


def test_gns_examples():
    diag = StarAlgebra.diagonal(2)
    assert gns(diag, State.vector(diag, [1, 0])).space_dim == 1
    m2 = StarAlgebra.full(2)
    assert gns(m2, State.vector(m2, [1, 0])).space_dim == 2
    assert gns(m2, State.trace(m2)).space_dim == 4


def test_gns_rejects_non_state():
    with pytest.raises(NotState):
        gns(StarAlgebra.full(2), CPMap.state(np.diag([2.0, 0.0])))


def test_identity_channel():
    d = stinespring(StarAlgebra.full(2), CPMap.identity(2))
    assert d.space_dim == 2
    assert nk.opnorm(d.isometry_v.conj().T @ d.isometry_v - np.eye(2)) <= 1e-12
    assert nk.opnorm(d.isometry_v @ d.isometry_v.conj().T - np.eye(2)) <= 1e-12
    # pi is unitarily equivalent to the identity representation: pi(a) = V a V*
    for a in StarAlgebra.full(2).basis:
        assert nk.opnorm(d.pi(a) - d.isometry_v @ a @ d.isometry_v.conj().T) <= 1e-12
    assert dilation_residual(CPMap.identity(2), d) <= 1e-12


def test_state_matches_gns():
    m3 = StarAlgebra.full(3)
    s = State.vector(m3, [1.0, 1j, 0.5])
    d1, d2 = stinespring(m3, s.as_map()), gns(m3, s)
    assert d1.space_dim == d2.space_dim == 3
    a = np.arange(9).reshape(3, 3) + 1j
    assert np.allclose(d1.compress(a), d2.compress(a))


def test_depolarizing_dimension():
    # Kraus rank 4, so the minimal dilation of M_2 has dimension 2 * 4 = 8.
    phi = CPMap.from_function(lambda t: np.trace(t) / 2 * np.eye(2), 2)
    d = stinespring(StarAlgebra.full(2), phi)
    assert d.space_dim == 8 == _gram_rank_oracle(StarAlgebra.full(2), phi)
    assert dilation_residual(phi, d) <= 1e-12


@pytest.mark.parametrize("n, m", [(2, 1), (3, 2), (4, 3), (5, 4)])
def test_random_cp_residuals(rng, n, m):
    phi = random_unital_cp(rng, n, m)
    alg = StarAlgebra.full(n)
    d = stinespring(alg, phi)
    assert dilation_residual(phi, d, 20, rng) <= 1e-9
    res = representation_residuals(d)
    assert res["multiplicativity"] <= 1e-9 and res["star"] <= 1e-10 and res["isometry"] <= 1e-10
    assert res["minimal_rank"] == d.space_dim == _gram_rank_oracle(alg, phi)


def test_dilation_on_subalgebra(rng):
    alg = StarAlgebra.diagonal(4)
    phi = random_unital_cp(rng, 4, 2)
    d = stinespring(alg, phi)
    assert dilation_residual(phi, d, 10, rng) <= 1e-9
    assert d.space_dim == _gram_rank_oracle(alg, phi)


def test_corrupted_isometry_is_detected(rng):
    phi = random_unital_cp(rng, 3, 2)
    d = stinespring(StarAlgebra.full(3), phi)
    v = d.isometry_v.copy()
    v[:, 0] = 0
    bad = dataclasses.replace(d, isometry_v=v)
    assert dilation_residual(phi, bad) > 0.1


def test_stinespring_errors():
    m2 = StarAlgebra.full(2)
    with pytest.raises(NotUnital):
        stinespring(m2, CPMap.from_kraus([P0]))
    with pytest.raises(NotCP):
        stinespring(m2, CPMap.from_function(lambda t: t.T, 2))


def test_pair_trivial_expectation(rng):
    m3 = StarAlgebra.full(3)
    pair = compatible_pair(identity_expectation(m3), random_unital_cp(rng, 3, 2))
    assert nk.opnorm(pair.projection_p - np.eye(pair.dil_a.space_dim)) <= 1e-10


def test_pair_vector_state_m2():
    m2 = StarAlgebra.full(2)
    pair = compatible_pair(expectation_ep(P0, m2), CPMap.vector_state([1, 0]))
    res = pair.residuals()
    assert all(v <= 1e-9 for v in res.values()), res
    assert pair.generation_rank(8, 0) == pair.dil_a.space_dim


@pytest.mark.parametrize("n", [3, 4, 5])
def test_pair_block_projection(rng, n):
    k = n // 2
    p = np.diag([1.0] * k + [0.0] * (n - k))
    x = np.concatenate([rng.standard_normal(k) + 1j * rng.standard_normal(k), np.zeros(n - k)])
    pair = compatible_pair(expectation_ep(p, StarAlgebra.full(n)), CPMap.vector_state(x))
    res = pair.residuals()
    assert max(res.values()) <= 1e-9, res
    assert pair.generation_rank(8, rng) == pair.dil_a.space_dim


def test_pair_trace_expectation_with_channel(rng):
    # Phi o E = Phi holds for Phi = Phi o E itself
    m3, diag = StarAlgebra.full(3), StarAlgebra.diagonal(3)
    e = expectation_trace(m3, diag)
    psi = random_unital_cp(rng, 3, 2)
    phi = CPMap.from_function(lambda t: psi(e(t)), 3, 2)
    pair = compatible_pair(e, phi)
    assert max(pair.residuals().values()) <= 1e-9


def test_pair_incompatible():
    m2 = StarAlgebra.full(2)
    with pytest.raises(IncompatibleData):
        compatible_pair(expectation_ep(P0, m2), CPMap.vector_state([1, 1]))
