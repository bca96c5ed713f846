"""
Photon-added versus displaced thermal chargers
==============================================

Both chargers carry the same mean photon number: a single-photon-added
thermal state (SPATS) and a displaced thermal state (DTS) with
alpha = sqrt(Z0). The SPATS charges better, but only if it is prepared
efficiently: mixing it with the bare thermal state (efficiency eta) wipes
out the advantage at eta of about one half.
"""

import numpy as np

from qbcharge import states
from qbcharge.collisions import ChargerState, optimal_collision_tau
from qbcharge.effective import EffectiveParams
from qbcharge.fulldyn import SystemSpec
from qbcharge.observables import mean_number

s = SystemSpec()
p = EffectiveParams.from_ratio(1.0)

for T in (0.05, 0.1):
    ls = states.ThermalSpec(T, s.omega_L, 25)
    rs = states.ThermalSpec(T, s.omega_R, 25)
    q = states.qubit_thermal(T, s.omega_eg)
    pq = (q[0, 0].real, q[1, 1].real)
    gibbs_r = states.gibbs_oscillator(rs)

    spats = states.npats(1, ls)
    dts = states.dts(states.alpha_opt(1, ls), ls)
    print(f"Tbar = {T}: <n> SPATS = {mean_number(spats):.6f}, <n> DTS = {mean_number(dts):.6f}")

    def peak(rho_l):
        return optimal_collision_tau(ChargerState.product(rho_l, gibbs_r), pq, (0, -1), p)[1]

    dts_peak = peak(dts)
    print(f"  peak charge: SPATS {peak(spats):.4f}, DTS {dts_peak:.4f}")
    etas = np.linspace(0, 1, 21)
    curve = np.array([peak(states.inefficient_spats(e, ls)) for e in etas])
    k = np.flatnonzero(curve > dts_peak)[0]
    eta_c = etas[k - 1] + (dts_peak - curve[k - 1]) * (etas[k] - etas[k - 1]) / (curve[k] - curve[k - 1])
    print(f"  imperfect SPATS overtakes the DTS at eta = {eta_c:.3f}")
