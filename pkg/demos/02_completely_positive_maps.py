"""Completely positive maps and the Choi criterion.

A map Phi: M_n -> M_m is completely positive iff its Choi matrix
sum_ab e_ab (x) Phi(e_ab) is positive semidefinite.  The transpose map is the
standard example of a positive map that fails this test.
"""

import numpy as np

from opalg.cpstate import (
    CPMap,
    amplified_min_eigenvalue,
    conjugate,
    find_non_cp_conjugate,
    is_completely_positive,
    random_unital_cp,
)
from opalg.sampling import random_unitary, rng_for
from opalg.staralg import StarAlgebra, expectation_ep

rng = rng_for(2, "demo-cp")

transpose = CPMap.from_function(lambda t: t.T, 2)
verdict = is_completely_positive(transpose)
print(f"transpose on M_2: CP={bool(verdict)}, Choi min eigenvalue {verdict.min_eigenvalue:+.3f}")
print("  the Choi matrix of the transpose is the swap operator, whose eigenvalues are +1, +1, +1, -1")

# Positivity alone is not enough: apply the amplification id_2 (x) T to PSD inputs.
print(f"  min eigenvalue of (id_2 (x) T)(PSD) over random inputs: {amplified_min_eigenvalue(transpose, 2, 200, rng):+.3f}")

phi = random_unital_cp(rng, 3, 3)
print(f"random unital CP map M_3 -> M_3 with {len(phi.kraus)} Kraus operators: CP={bool(is_completely_positive(phi))}")

# Conjugating by unitaries keeps complete positivity; by general invertibles it may not.
worst = min(conjugate(phi, random_unitary(rng, 3)).min_choi_eigenvalue() for _ in range(20))
print(f"min Choi eigenvalue over 20 unitary conjugates: {worst:+.2e}")
e = expectation_ep(np.diag([1.0, 0.0]), StarAlgebra.full(2))
found = find_non_cp_conjugate(CPMap.from_function(e, 2), seed=0)
if found is not None:
    print(f"an invertible conjugate of E_p has Choi eigenvalue {found[1]:+.3f}")
