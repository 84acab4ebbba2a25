"""Conditional expectations onto subalgebras of M_n.

A conditional expectation E: A -> B is a unital idempotent map onto B that is
a B-bimodule map.  Tomiyama's theorem says such a norm-one projection is
automatically completely positive.  This script builds three of them and
checks the defining identities numerically, then shows why the compression
T -> pTp is *not* one.
"""

import numpy as np

from opalg import numkernel as nk
from opalg.sampling import rng_for
from opalg.staralg import (
    StarAlgebra,
    commutant,
    compression,
    expectation_ep,
    expectation_trace,
    tomiyama_check,
)

rng = rng_for(1, "demo-expectations")

# E_p(T) = pTp + (1-p)T(1-p) is the expectation onto the commutant {p}'.
p = np.diag([1.0, 1.0, 0.0, 0.0])
m4 = StarAlgebra.full(4)
e_p = expectation_ep(p, m4)
print(f"{{p}}' has dimension {e_p.target.dim} inside M_4 (dimension {m4.dim})")

# The trace-preserving expectation onto the same subalgebra is the
# Hilbert-Schmidt orthogonal projection, so it must coincide with E_p.
e_tr = expectation_trace(m4, commutant([p], m4))
x = m4.random_element(rng)
print(f"||E_p(x) - E_tr(x)|| = {nk.opnorm(e_p(x) - e_tr(x)):.2e}")

for name, e in [
    ("E_p onto {p}'", e_p),
    ("trace expectation onto the diagonal of M_3", expectation_trace(StarAlgebra.full(3), StarAlgebra.diagonal(3))),
]:
    rep = tomiyama_check(e, samples=50, seed=0)
    print(f"{name}: max residual {rep.max_residual:.2e}, passed={rep.passed}")

# The compression T -> pTp is idempotent and positive, but it is not unital
# (it sends 1 to p), so the checker flags it.
rep = tomiyama_check(compression(p, m4), samples=20, seed=0)
print(f"compression T -> pTp: failures {rep.failures}")
