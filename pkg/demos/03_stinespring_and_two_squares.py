"""Stinespring dilation and the commuting squares of a compatible pair.

For a unital CP map Phi on a *-algebra A there is a representation pi of A on
a space H and an isometry V with Phi(a) = V* pi(a) V.  The space is the
quotient of A (x) H_0 by the null space of the Gram form
<a (x) h, b (x) k> = <Phi(b* a) h, k>.

When Phi = Phi o E for an expectation E onto B, the dilation of Phi|_B sits
inside the dilation of Phi, and the projection P onto it intertwines E.
"""

import numpy as np

from opalg.cpstate import CPMap, random_unital_cp
from opalg.dilation import compatible_pair, dilation_residual, representation_residuals, stinespring
from opalg.sampling import rng_for
from opalg.staralg import StarAlgebra, expectation_ep

rng = rng_for(3, "demo-stinespring")
m2 = StarAlgebra.full(2)

for name, phi in [
    ("vector state at e1", CPMap.vector_state([1, 0])),
    ("normalized trace state", CPMap.state(np.eye(2) / 2)),
    ("identity channel", CPMap.identity(2)),
    ("depolarizing T -> tr(T)/2 I", CPMap.from_function(lambda t: np.trace(t) / 2 * np.eye(2), 2)),
]:
    d = stinespring(m2, phi)
    res = representation_residuals(d)
    print(f"{name:30s} dilation dim {d.space_dim}   ||Phi - V*piV|| = {dilation_residual(phi, d, seed=rng):.1e}"
          f"   multiplicativity {res['multiplicativity']:.1e}")

# A compatible pair: Phi factors through E_p on M_3.
p = np.diag([1.0, 1.0, 0.0])
e = expectation_ep(p, StarAlgebra.full(3))
psi = random_unital_cp(rng, 3, 2)
phi = CPMap.from_function(lambda t: psi(e(t)), 3, 2)
pair = compatible_pair(e, phi)
print(f"\nH_B has dimension {pair.dil_b.space_dim} inside H_A of dimension {pair.dil_a.space_dim}")
for k, v in pair.residuals().items():
    print(f"  {k:14s} {v:.2e}")
print(f"  pi_A(U_A) H_B spans a space of dimension {pair.generation_rank(seed=rng)}")
