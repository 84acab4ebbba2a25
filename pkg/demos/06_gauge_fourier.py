"""Circle actions and the Fourier decomposition of a dilation space.

The weights k_i define tau_lambda(x)_ij = lambda^(k_i - k_j) x_ij.  Its
spectral projections E^(m) pick out the entries of weight m, and averaging
lambda^-m tau_lambda over K roots of unity reproduces them exactly once
K > 2 * spread.  For a gauge-invariant map the dilation space splits into
orthogonal pieces H^(m).
"""

import numpy as np

from opalg.cpstate import CPMap
from opalg.dilation import compatible_pair
from opalg.gaugedecomp import (
    CircleAction,
    fourier_decompose,
    gauge_expectation,
    gauge_invariance_equiv,
    grading_residuals,
    spectral_residual,
)
from opalg.staralg import tomiyama_check

action = CircleAction((0, 1, 1, 2))
print(f"weights {action.weights}, modes {list(action.modes)}, K = {action.default_points}")
for k in (action.default_points, 3):
    print(f"  mask vs {k}-point average: {spectral_residual(action, 1, k=k):.1e}")
print(f"grading residuals {grading_residuals(action)}")

e0 = gauge_expectation(action)
print(f"E^(0) is a conditional expectation: {tomiyama_check(e0).passed}")

phi = CPMap.from_function(lambda t: np.diag(np.diag(t)), 4)
print(f"Phi = diagonal part: {gauge_invariance_equiv(phi, action)}")
fd = fourier_decompose(compatible_pair(e0, phi), action)
print(f"dims of H^(m): {fd.dims}")
for k, v in fd.residuals().items():
    print(f"  {k:26s} {v:.1e}")
