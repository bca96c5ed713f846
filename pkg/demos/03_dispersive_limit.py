"""
When does the effective model hold?
===================================

The effective three-body coupling comes from eliminating the upper qutrit
level. Here the full Hamiltonian is evolved next to the effective one for
a single photon, for a few detuning-to-coupling ratios. The deviation and
the virtual population of the upper level both shrink as the detuning grows.
"""

import math

import numpy as np

from qbcharge.fulldyn import SystemSpec, dispersive_residual
from qbcharge.hilbert import G, basis_state

print(" Delta/Omega   residual   max p_i")
for ratio in (3, 10, 30, 50, 100):
    spec = SystemSpec.from_ratio(ratio, chi=1.0, cutoffs=(6, 6))
    t = np.linspace(0, math.pi / spec.lambda_eff, 41)
    rep = dispersive_residual(spec, basis_state(1, G, 0, spec.dims), t)
    print(f"  {ratio:9.0f}   {rep.residual:.2e}   {rep.max_p_i:.2e}")

# with a Stark drive selecting the (M, N) = (1, 0) family at chi = 0.5
spec = SystemSpec.from_ratio(100, chi=0.5, M=1, N=0, cutoffs=(4, 4))
t = np.linspace(0, math.pi / spec.lambda_eff, 41)
rep = dispersive_residual(spec, basis_state(1, G, 0, spec.dims), t)
print(f"\nselective drive, Delta/Omega = 100: residual {rep.residual:.2e}")
