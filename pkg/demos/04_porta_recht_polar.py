"""Porta-Recht factorization on the coset space G_A / G_B.

Every invertible a in A factors as a = u exp(iX) b with u unitary, X
anti-Hermitian in Ker E, and b positive invertible in B.  The factor b is the
fixed point of E(log(b^-1 a*a b^-1)) = 0.  This gives the diffeomorphism
U_A x_{U_B} p -> G_A / G_B, under which the involution u G_B -> u^{-*} G_B
becomes [(u, X)] -> [(u, -X)].
"""

import numpy as np

from opalg import geomorbit as gm
from opalg import numkernel as nk
from opalg.sampling import rng_for
from opalg.staralg import StarAlgebra, expectation_ep

rng = rng_for(4, "demo-polar")
e = expectation_ep(np.diag([1.0, 1.0, 0.0, 0.0, 0.0]), StarAlgebra.full(5))
space = gm.CosetSpace(e)

a = space.a.random_invertible(rng, 50.0)
t = gm.porta_recht(a, e)
print(f"a = u exp(iX) b found in {t.iterations} iterations ({t.method})")
print(f"  reconstruction {nk.opnorm(t.reconstruct() - a) / nk.opnorm(a):.1e}")
print(f"  ||u*u - 1|| {nk.opnorm(t.u.conj().T @ t.u - np.eye(5)):.1e}   ||E(X)|| {nk.opnorm(e(t.x)):.1e}"
      f"   b in B: {space.b.residual(t.b):.1e}")

# Different starting points converge to the same triple up to the U_B action.
t2 = gm.porta_recht(a, e, start=space.b.random_positive(rng) + 0.1 * np.eye(5))
print(f"  restart agrees up to U_B: {gm.triples_equivalent(t, t2, space.b)}")

# Fixed points of the involution are exactly the cosets with X = 0.
z = space.point(a)
print(f"\nrandom coset is a fixed point: {gm.is_fixed_point(z)[0]}")
u = space.a.random_unitary(rng)
print(f"unitary coset is a fixed point: {gm.is_fixed_point(space.point(u))[0]}")

# The MR factorization a^{-*} = a_+ a b_+ with b_+ = E(a*a).
mr = gm.mr_factorization(a, e)
print(f"\nMR factorization residual {mr.residual:.1e} (a scaled by {mr.scale:.3f})")

# Derivative of the chart at the base point: second-order finite differences.
rep = gm.tangent_check_psi(space, 1j * space.a.random_hermitian(rng), space.random_p(rng))
print(f"tangent map residuals {['%.1e' % r for r in rep.residuals]}, ratios {['%.2f' % r for r in rep.ratios]}")
