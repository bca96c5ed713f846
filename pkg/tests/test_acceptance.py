"""
End-to-end acceptance criteria, one test per criterion.

Each test records a one-line verdict that is printed in the pytest terminal
summary, then asserts it.
"""

import math
import time

import numpy as np
import pytest

from qbcharge import states
from qbcharge.cli import ExperimentConfig, AUTO
from qbcharge.effective import (EffectiveParams, delta_U_q, effective_hamiltonian, evolve_effective, optimal_tau,
                                raw_energy_matrix, raw_energy_sum, transfer_probability)
from qbcharge.experiments import appendix_checks, collisions, eta_sweep, lindblad_initial, validate_dispersive
from qbcharge.fulldyn import SystemSpec, build_full_hamiltonian
from qbcharge.hilbert import E, G, expm, kron, partial_trace, product_index, propagate
from qbcharge.lindblad import DissipationSpec, integrate
from qbcharge.observables import energy_report, qubit_energy

from conftest import ACCEPTANCE, random_density


def record(k, ok, detail):
    ACCEPTANCE[k] = (bool(ok), detail)
    assert ok, f"criterion {k}: {detail}"


def params(experiment, **kw):
    cfg = ExperimentConfig(experiment=experiment, **AUTO[experiment])
    return dict(cfg.params(), **kw)


def fock(k, d):
    r = np.zeros((d, d), dtype=complex)
    r[k, k] = 1
    return r


def test_1_universal_optimal_charge():
    t0 = time.perf_counter()
    p = EffectiveParams.from_ratio(1.0, M=0, N=-1)
    q = states.qubit_state(0.8)
    rho = kron(fock(1, 4), q, fock(0, 4))
    out = evolve_effective(rho, math.pi / (2 * p.lambda_eff), p, (4, 4))
    du = qubit_energy(partial_trace(out, 1, (4, 2, 4))) - qubit_energy(q)
    closed = delta_U_q([0, 1, 0, 0], (0.8, 0.2), [1, 0, 0, 0], math.pi / 2, p)
    dt = time.perf_counter() - t0
    ok = abs(du - 1.6) <= 1e-9 and abs(closed - 1.6) <= 1e-9 and dt < 1
    record(1, ok, f"dU={du:.12f} (closed form {closed:.12f}), target 1.6 +- 1e-9, {dt:.2f}s")


def test_2_reset_symmetry():
    p = EffectiveParams.from_ratio(1.0)
    q = states.qubit_state(0.2)
    rho = kron(fock(0, 4), q, fock(1, 4))
    out = evolve_effective(rho, math.pi / (2 * p.lambda_eff), p, (4, 4))
    p_g = partial_trace(out, 1, (4, 2, 4))[0, 0].real
    record(2, abs(p_g - 1.0) <= 1e-9, f"mirrored run p_g(tau)={p_g:.12f}, target 1 +- 1e-9")


def test_3_appendix_identities():
    t0 = time.perf_counter()
    cfg = params("appendix-checks")
    out = appendix_checks(cfg)
    w = SystemSpec().omega_L
    z_err = max(abs(states.npats_partition(N, w, cfg["Tbar"]) - states.npats_partition_sum(N, w, cfg["Tbar"]))
                for N in (1, 2, 3))
    dt = time.perf_counter() - t0
    names = ("Z_N_closed_form", "npats_mean_number", "dts_mean_number", "dts_purity")
    ok = all(out.checks[n] for n in names) and z_err <= 1e-10 and dt < 1
    record(3, ok, f"Z_N err {z_err:.1e}, <n>_N err {out.scalars['npats_mean_number_error']:.1e}, "
                  f"<n>_DTS err {out.scalars['dts_mean_number_error']:.1e}, "
                  f"purity err {out.scalars['dts_purity_error']:.1e}, {dt:.2f}s")


def test_4_raw_energy_identity():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(50):
        pl = rng.dirichlet(np.ones(rng.integers(2, 30)))
        pr = rng.dirichlet(np.ones(rng.integers(2, 30)))
        pg = rng.uniform()
        s = raw_energy_matrix(pl, (pg, 1 - pg), pr)
        brute = math.fsum(s.ravel())
        worst = max(worst, abs(brute - raw_energy_sum(pl, (pg, 1 - pg), pr)))
    record(4, worst <= 1e-12, f"max |brute - closed| over 50 profiles = {worst:.1e}")


def test_5_effective_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(20):
        p = EffectiveParams.from_ratio(rng.uniform(0.1, 10), rng.uniform(0.2, 2), int(rng.integers(-2, 4)),
                                       int(rng.integers(-2, 4)))
        h = effective_hamiltonian(4, 4, p, levels=2)
        rho = random_density(32, rng)
        for t in rng.uniform(0, 20, 5):
            ref = propagate(rho, expm(h, t))
            worst = max(worst, float(np.abs(evolve_effective(rho, t, p, (4, 4)) - ref).max()))
    dt = time.perf_counter() - t0
    record(5, worst <= 1e-8 and dt < 10, f"max deviation {worst:.1e} over 20 states x 5 times, {dt:.2f}s")


def test_6_dispersive_validation():
    t0 = time.perf_counter()
    out = validate_dispersive(params("validate-dispersive"))
    dt = time.perf_counter() - t0
    s = out.scalars
    ok = out.ok and dt < 120
    record(6, ok, f"residual(50)={s['residual_ratio50.0']:.2e}, max p_i={s['max_p_i_ratio50.0']:.2e}, residual "
                  f"10/30/100 = {s['residual_ratio10.0']:.2e}/{s['residual_ratio30.0']:.2e}/"
                  f"{s['residual_ratio100.0']:.2e}, {dt:.1f}s")


def test_7_lindblad_suite():
    t0 = time.perf_counter()
    cfg = params("dissipation")
    spec = SystemSpec.from_ratio(cfg["delta_over_omega"], cfg["chi"], cutoffs=(12, 12))
    rho0 = lindblad_initial(cfg, spec)
    t = np.linspace(0.0, cfg["horizon"], cfg["points"]) / spec.lambda_eff

    # unitary reference from one diagonalization
    w, v = np.linalg.eigh(build_full_hamiltonian(spec, "interaction"))
    r0 = v.conj().T @ rho0 @ v
    step = iter(t)

    def versus_unitary(r):
        ph = np.exp(-1j * w * next(step))
        ref = v @ (ph[:, None] * r0 * ph.conj()[None, :]) @ v.conj().T
        return float(np.abs(r - ref).max())

    traj = integrate(rho0, t, spec, DissipationSpec.for_system(spec, 0.0, cfg["Tbar"]), observe=versus_unitary)
    unitary_dev = max(traj.values)
    drifts = [traj.max_trace_drift]

    peaks = []
    for g in (0.01, 0.05, 0.1):
        tr = integrate(rho0, t, spec, DissipationSpec.for_system(spec, g, cfg["Tbar"]),
                       observe=lambda r: energy_report(r, spec.dims).U_q)
        peaks.append(max(tr.values) - tr.values[0])
        drifts.append(tr.max_trace_drift)

    free = SystemSpec(Omega_L=0.0, Omega_R=0.0, cutoffs=(12, 12))
    ls = states.ThermalSpec(cfg["Tbar"], free.omega_L, 12)
    rs = states.ThermalSpec(cfg["Tbar"], free.omega_R, 12)
    gibbs = kron(states.gibbs_oscillator(ls), states.qutrit_thermal(cfg["Tbar"]), states.gibbs_oscillator(rs))
    diss = DissipationSpec(0.1 * spec.lambda_eff, cfg["Tbar"],
                           DissipationSpec.for_system(spec, 0.1, cfg["Tbar"]).transition_freqs)
    gt = integrate(gibbs, [0.0, t[-1] / 2, t[-1]], free, diss)
    gibbs_dev = max(float(np.abs(r - gibbs).max()) for r in gt.values)
    drifts.append(gt.max_trace_drift)
    dt = time.perf_counter() - t0

    ok = (max(drifts) < 1e-8 and unitary_dev <= 1e-6 and gibbs_dev <= 1e-8
          and peaks[0] > peaks[1] > peaks[2] and dt < 300)
    record(7, ok, f"max drift {max(drifts):.1e}, unitary dev {unitary_dev:.1e}, Gibbs dev {gibbs_dev:.1e}, "
                  f"peaks (0.01/0.05/0.1) = {peaks[0]:.4f}/{peaks[1]:.4f}/{peaks[2]:.4f}, {dt:.0f}s")


def test_8_eta_crossing():
    t0 = time.perf_counter()
    out = eta_sweep(params("eta-sweep", Tbar_list=(0.1,)))
    dt = time.perf_counter() - t0
    eta_c = out.scalars["eta_crossing_T0.1"]
    record(8, abs(eta_c - 0.5) <= 0.02 and dt < 60, f"crossing eta = {eta_c:.4f} at Tbar=0.1, {dt:.1f}s")


def test_9_collisional_chain():
    t0 = time.perf_counter()
    out = collisions(params("collisions", K=30, Tbar=0.1, chi=1.0))
    dt = time.perf_counter() - t0
    s = out.scalars
    names = ("only_first_inverted", "charger_drained", "chain_beats_single_spats", "mutual_info_positive", "tail_audit")
    ok = all(out.checks[n] for n in names) and dt < 300
    record(9, ok, f"inverted: {s['inverted']}, final/initial raw = {s['final_raw_energy'] / s['initial_raw_energy']:.1e}, "
                  f"chain {s['accumulated_delta_U']:.4f} vs SPATS {s['single_shot_spats_delta_U']:.4f}, "
                  f"final I(R:L) = {s['final_mutual_info']:.4f}, {dt:.1f}s")


def test_10_selectivity():
    t0 = time.perf_counter()
    s = SystemSpec()
    T = 0.1
    ls = states.ThermalSpec(T, s.omega_L, 25)
    rs = states.ThermalSpec(T, s.omega_R, 25)
    M, N = 2, 0
    p = EffectiveParams.from_ratio(0.1, M=M, N=N)
    rho = kron(states.npats(2, ls), states.qubit_thermal(T, s.omega_eg), states.gibbs_oscillator(rs))
    tau = optimal_tau(M, N, p)
    out = evolve_effective(rho, tau, p, (25, 25))
    dims = (25, 2, 25)
    change = np.abs(np.diag(out).real - np.diag(rho).real)
    selected = [product_index(M, G, N, dims), product_index(M - 1, E, N + 1, dims)]
    change[selected] = 0.0
    leak = float(change.max())
    b2 = float(transfer_probability(M, N, tau, p))
    dt = time.perf_counter() - t0
    record(10, leak < 1e-3 and b2 > 0.99 and dt < 30,
           f"chi=0.1, NPATS(2) charger, (M,N)=(2,0): max non-selected change {leak:.1e}, |B|^2={b2:.6f}, {dt:.1f}s")
