"""
Charging a thermal battery with one photon
==========================================

A single photon in the left mode, an empty right mode and a battery that
starts in a thermal state. With equal couplings and the drive switched off,
the photon is handed over through the battery and the battery ends up fully
excited, whatever its initial temperature.
"""

import math

import numpy as np

from qbcharge import EffectiveParams, delta_U_q, evolve_effective
from qbcharge.hilbert import kron, partial_trace
from qbcharge.states import qubit_state

p = EffectiveParams.from_ratio(chi=1.0)  # lambda_eff = 1, so times are in lambda*t

# populations of |1>_L and |0>_R on a small truncation
pL = [0.0, 1.0, 0.0]
pR = [1.0, 0.0, 0.0]

for p_g in (1.0, 0.8, 0.6):
    gain = delta_U_q(pL, (p_g, 1 - p_g), pR, math.pi / 2, p)
    print(f"p_g = {p_g:.1f}: energy gained at lambda*t = pi/2 is {gain:.6f} (2 p_g = {2 * p_g:.1f})")

# the same thing from the full state, watching the battery along the way
q = qubit_state(0.8)
rho = kron(np.diag(pL), q, np.diag(pR))
print("\n lambda*t   p_e")
for t in np.linspace(0, math.pi, 9):
    p_e = partial_trace(evolve_effective(rho, t, p, (3, 3)), 1, (3, 2, 3))[1, 1].real
    print(f"  {t:6.3f}   {p_e:.4f}")

# swapping the roles of the modes resets the battery instead
rho = kron(np.diag(pR), q, np.diag(pL))
p_g = partial_trace(evolve_effective(rho, math.pi / 2, p, (3, 3)), 1, (3, 2, 3))[0, 0].real
print(f"\nmirrored input: p_g at pi/2 = {p_g:.6f}")
