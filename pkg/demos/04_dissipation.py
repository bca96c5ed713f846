"""
Charging with leaky modes
=========================

Thermal losses on the qutrit transitions and on both modes, at a bath
temperature Tbar = 0.1. A small truncation keeps this demo quick; the
``dissipation`` experiment of the command line runs the same thing at
cutoff 12.
"""

import math

import numpy as np

from qbcharge import states
from qbcharge.fulldyn import SystemSpec
from qbcharge.hilbert import kron
from qbcharge.lindblad import DissipationSpec, integrate
from qbcharge.observables import energy_report

T = 0.1
spec = SystemSpec.from_ratio(10, chi=1.0, cutoffs=(5, 5))
ls = states.ThermalSpec(T, spec.omega_L, 5)
rs = states.ThermalSpec(T, spec.omega_R, 5)
rho0 = kron(states.npats(1, ls), states.qutrit_thermal(T), states.gibbs_oscillator(rs))
t = np.linspace(0, math.pi, 21) / spec.lambda_eff

for g in (0.0, 0.05, 0.2, 0.5):
    diss = DissipationSpec.for_system(spec, g, T)  # rate in units of lambda_eff
    traj = integrate(rho0, t, spec, diss, observe=lambda r: energy_report(r, spec.dims).U_q)
    u = np.array(traj.values)
    print(f"gamma0 = {g:4.2f} lambda: peak charge {u.max() - u[0]:.4f}, trace drift {traj.max_trace_drift:.1e}")
