"""
A string of batteries
=====================

Thirty thermal batteries meet the same charger one after the other. The
left mode starts in a displaced thermal state, the right mode in a thermal
state. The first battery is inverted; the rest heat up a little each, until
the extractable energy in the charger is gone. Meanwhile the two charger
modes become correlated.
"""

import numpy as np

from qbcharge import states
from qbcharge.collisions import ChargerState, collide_one, run_chain
from qbcharge.effective import EffectiveParams
from qbcharge.fulldyn import SystemSpec

T = 0.1
s = SystemSpec()
ls = states.ThermalSpec(T, s.omega_L, 25)
rs = states.ThermalSpec(T, s.omega_R, 25)
charger = ChargerState.product(states.dts(states.alpha_opt(1, ls), ls), states.gibbs_oscillator(rs))
q = states.qubit_thermal(T, s.omega_eg)

res = run_chain(30, charger, q, EffectiveParams.from_ratio(1.0))

print("  k    p_e     dU      sum S    I(R:L)")
acc = 0.0
for r in res.records:
    acc += r.delta_U
    if r.k <= 5 or r.k % 5 == 0:
        print(f" {r.k:2d}  {r.qubit_final_populations[1]:.4f}  {r.delta_U:.4f}  {r.raw_energy_sum:.2e}  {r.mutual_info:.4f}")

spats = ChargerState.product(states.npats(1, ls), states.gibbs_oscillator(rs))
single = collide_one(spats, q, EffectiveParams.from_ratio(1.0))[2].delta_U
print(f"\ntotal energy to the string: {acc:.4f}; one battery from a SPATS: {single:.4f}")
print(f"charger tail population {res.charger.tail_population():.1e}")
