"""Reproducing kernels on a homogeneous vector bundle.

A compatible pair gives a bundle over G_A / G_B with fiber H_B and the kernel
K(u G_B, v G_B) = P pi_A(u^-1) pi_A(v) iota built from the dilation.  Every Gram matrix of
kernel sections is positive semidefinite, the realization h -> gamma(h) is
equivariant, and sections are holomorphic in the base point.  On the
Grassmannian the bundle is the tautological one.
"""

import numpy as np

from opalg import numkernel as nk
from opalg import rkbundle as rk
from opalg.cpstate import CPMap, random_unital_cp
from opalg.dilation import compatible_pair
from opalg.sampling import random_unitary, rng_for
from opalg.staralg import StarAlgebra, expectation_ep

rng = rng_for(5, "demo-kernel")
e = expectation_ep(np.diag([1.0, 1.0, 0.0]), StarAlgebra.full(3))
psi = random_unital_cp(rng, 3, 2)
bundle = rk.HomogeneousBundle.from_pair(compatible_pair(e, CPMap.from_function(lambda t: psi(e(t)), 3, 2)))
print(f"fiber H_B of dimension {bundle.h_b_dim} inside H_A of dimension {bundle.h_a_dim}")

points, vectors = rk.random_configuration(bundle, 12, rng)
ks = rk.kernel_gram(points, vectors)
amb = nk.opnorm(ks.gram - rk.ambient_gram(vectors))
print(f"12-point kernel Gram: min eigenvalue {ks.min_eigenvalue:.2e}, agrees with the ambient Gram to {amb:.1e}")

h = rng.standard_normal(bundle.h_a_dim) + 1j * rng.standard_normal(bundle.h_a_dim)
v = bundle.a.random_invertible(rng, 10.0)
print(f"equivariance gamma(pi(v) h) = v . gamma(h): {rk.intertwine_check(bundle, v, h, points[:5]):.1e}")

z0 = bundle.space.random_point(rng)
d = bundle.a.random_element(rng)
hol = rk.holomorphy_check(bundle, h, z0, d)
anti = rk.holomorphy_check(bundle, h, z0, d, conjugate=True)
print(f"holomorphy: ratios {['%.2f' % r for r in hol.ratios]} (pass={hol.passed});"
      f" antiholomorphic control pass={anti.passed}")

# Tautological bundle over the Grassmannian of 2-planes in C^4.
s0 = rk.SubspacePoint.span(rng.standard_normal((4, 2)) + 0j)
subs = [s0.image(random_unitary(rng, 4)) for _ in range(6)]
vecs = [s.ortho_basis @ (rng.standard_normal(2) + 1j * rng.standard_normal(2)) for s in subs]
g = rk.grassmann_gram(subs, vecs)
print(f"\nGrassmannian Gram min eigenvalue {np.linalg.eigvalsh(nk.hermitian_part(g))[0]:.2e}")
u = random_unitary(rng, 4)
print(f"gamma(u h)(S) = u gamma(h)(u^-1 S): {rk.tautological_intertwining_residual(u, rng.standard_normal(4) + 0j, subs):.1e}")
