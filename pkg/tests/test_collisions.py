import math

import numpy as np
import pytest

from qbcharge import states
from qbcharge.collisions import (ChainConfig, ChargerState, collide_one, optimal_collision_tau, raw_energy_brute,
                                 raw_energy_sum_k, run_chain, select_MN)
from qbcharge.effective import EffectiveParams, delta_U_joint
from qbcharge.errors import DimensionError
from qbcharge.fulldyn import SystemSpec

SPEC = SystemSpec()


def thermal_pair(T, cutoff=12):
    ls = states.ThermalSpec(T, SPEC.omega_L, cutoff)
    rs = states.ThermalSpec(T, SPEC.omega_R, cutoff)
    return ls, rs


def fock(k, d):
    r = np.zeros((d, d), dtype=complex)
    r[k, k] = 1
    return r


def test_charger_state_accessors(rng):
    rl, rr = np.diag(rng.dirichlet(np.ones(4))), np.diag(rng.dirichlet(np.ones(3)))
    ch = ChargerState.product(rl, rr)
    assert np.allclose(ch.rho_L, rl) and np.allclose(ch.rho_R, rr)
    assert ch.joint(2, 2, 1, 1) == pytest.approx(rl[2, 2] * rr[1, 1])
    assert ch.populations.shape == (4, 3)
    ch.validate()
    with pytest.raises(DimensionError):
        ChargerState(np.eye(5) / 5, (2, 3))


def test_raw_energy_sum_closed_form(rng):
    for _ in range(20):
        P = rng.dirichlet(np.ones(20)).reshape(4, 5)
        ch = ChargerState(np.diag(P.ravel()), (4, 5))
        pg = rng.uniform()
        assert raw_energy_sum_k(ch, (pg, 1 - pg)) == pytest.approx(raw_energy_brute(ch, (pg, 1 - pg)), abs=1e-12)
    assert raw_energy_sum_k(ChargerState.product(fock(1, 3), fock(0, 3)), (0.7, 0.3)) == pytest.approx(0.7)


def test_select_MN_chi_one():
    ch = ChargerState.product(fock(1, 4), fock(0, 4))
    assert select_MN(ch, (0.8, 0.2), EffectiveParams.from_ratio(1.0)) == (0, -1)


def test_select_MN_matches_brute_force_scan():
    ls, rs = thermal_pair(0.1)
    ch = ChargerState.product(states.dts(states.alpha_opt(1, ls), ls), states.gibbs_oscillator(rs))
    pq = (0.62, 0.38)
    p = EffectiveParams.from_ratio(0.1)
    P = ch.populations
    t = np.linspace(0, 200, 40001)
    table = {M: delta_U_joint(P, pq, t, p.with_drive(M, 0)).max() for M in range(1, 12)}
    best = max(table, key=table.get)
    assert select_MN(ch, pq, p) == (best, 0)


def test_select_MN_chi_large_scans_right_mode():
    ls, rs = thermal_pair(0.1)
    ch = ChargerState.product(states.npats(2, ls), states.gibbs_oscillator(rs))
    mn = select_MN(ch, (0.62, 0.38), EffectiveParams.from_ratio(10.0))
    assert mn[0] == 2


def test_drained_charger_terminates():
    ls, rs = thermal_pair(0.1)
    ch = ChargerState.product(states.gibbs_oscillator(ls), states.gibbs_oscillator(rs))
    q = states.qubit_thermal(0.1, SPEC.omega_eg)
    pq = (q[0, 0].real, q[1, 1].real)
    assert abs(raw_energy_sum_k(ch, pq)) < 1e-12
    assert select_MN(ch, pq, EffectiveParams.from_ratio()) is None
    new, q_out, rec = collide_one(ch, q, EffectiveParams.from_ratio())
    assert rec.selected_MN is None and rec.delta_U == 0.0
    assert np.allclose(q_out, q)


def test_equal_temperature_gibbs_charger_does_nothing():
    # equal-temperature modes and qubit satisfy p_g P[m,n] = p_e P[m-1,n+1] doublet by doublet
    ls, rs = thermal_pair(0.3, cutoff=30)
    ch = ChargerState.product(states.gibbs_oscillator(ls), states.gibbs_oscillator(rs))
    q = states.qubit_thermal(0.3, SPEC.omega_eg)
    p = EffectiveParams.from_ratio()
    for t in (0.5, 1.3, 4.0):
        assert abs(delta_U_joint(ch.populations, (q[0, 0].real, q[1, 1].real), t, p)) < 1e-12


def test_optimal_tau_single_photon():
    ch = ChargerState.product(fock(1, 4), fock(0, 4))
    tau, gain = optimal_collision_tau(ch, (0.8, 0.2), (0, -1), EffectiveParams.from_ratio())
    assert tau == pytest.approx(math.pi / 2, rel=1e-4)
    assert gain == pytest.approx(1.6, abs=1e-9)


def test_optimal_tau_beats_grid():
    ls, rs = thermal_pair(0.1)
    ch = ChargerState.product(states.dts(1.0, ls), states.gibbs_oscillator(rs))
    pq = (0.62, 0.38)
    p = EffectiveParams.from_ratio()
    tau, gain = optimal_collision_tau(ch, pq, (0, -1), p)
    grid = np.linspace(0, 2 * math.pi / 2.0, 400)
    assert gain >= delta_U_joint(ch.populations, pq, grid, p).max() - 1e-15
    assert gain == pytest.approx(delta_U_joint(ch.populations, pq, tau, p))


def test_collide_one_full_inversion():
    ch = ChargerState.product(fock(1, 4), fock(0, 4))
    new, q, rec = collide_one(ch, states.qubit_state(0.8), EffectiveParams.from_ratio())
    assert q[1, 1].real == pytest.approx(1.0, abs=1e-9)
    assert rec.delta_U == pytest.approx(1.6, abs=1e-9)
    # only the ground-state part of the battery can take the photon
    assert new.rho_R[1, 1].real == pytest.approx(0.8, abs=1e-9)
    h = -(0.8 * math.log(0.8) + 0.2 * math.log(0.2))
    assert rec.mutual_info == pytest.approx(h, abs=1e-9)


def test_collide_one_rejects_qutrit():
    ch = ChargerState.product(fock(1, 3), fock(0, 3))
    with pytest.raises(DimensionError):
        collide_one(ch, np.eye(3) / 3, EffectiveParams.from_ratio())


@pytest.fixture(scope="module")
def dts_chain():
    ls, rs = thermal_pair(0.1, 25)
    ch = ChargerState.product(states.dts(states.alpha_opt(1, ls), ls), states.gibbs_oscillator(rs))
    q = states.qubit_thermal(0.1, SPEC.omega_eg)
    return run_chain(12, ch, q, EffectiveParams.from_ratio()), q


def test_chain_invariants(dts_chain):
    res, q = dts_chain
    assert res.tail_ok
    raw = [r.raw_energy_sum for r in res.records]
    assert all(abs(b) <= abs(a) + 1e-9 for a, b in zip(raw, raw[1:]))
    for r in res.records:
        assert -2 <= r.delta_U <= 2
        assert r.mutual_info > 0
    p_e = [r.qubit_final_populations[1] for r in res.records]
    assert p_e[0] > 0.5 and max(p_e[1:]) < 0.5
    res.charger.validate()


def test_chain_is_deterministic(dts_chain):
    res, q = dts_chain
    ls, rs = thermal_pair(0.1, 25)
    ch = ChargerState.product(states.dts(states.alpha_opt(1, ls), ls), states.gibbs_oscillator(rs))
    again = run_chain(3, ch, q, EffectiveParams.from_ratio())
    assert again.records == res.records[:3]


def test_chain_keeps_running_after_drain():
    res = run_chain(3, ChargerState.product(fock(1, 3), fock(0, 3)), states.qubit_state(1.0), EffectiveParams.from_ratio())
    assert len(res.records) == 3
    assert res.records[0].delta_U == pytest.approx(2.0)
    assert res.terminated_at == 2
    assert res.records[1].selected_MN is None


def test_run_chain_validates_K():
    with pytest.raises(ValueError):
        run_chain(0, ChargerState.product(fock(1, 3), fock(0, 3)), states.qubit_state(1.0), EffectiveParams.from_ratio())


def test_chain_config_grid():
    ch = ChargerState.product(fock(1, 4), fock(0, 4))
    tau, gain = optimal_collision_tau(ch, (1.0, 0.0), (0, -1), EffectiveParams.from_ratio(), ChainConfig(grid_points=11))
    assert gain == pytest.approx(2.0, abs=1e-8)
