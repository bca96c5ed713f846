import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from qbcharge import states
from qbcharge.errors import TruncationError
from qbcharge.hilbert import annihilation
from qbcharge.observables import mean_number, purity


def test_thermal_spec_properties():
    s = states.ThermalSpec(0.1, 0.95)
    assert s.ratio == pytest.approx(math.exp(-9.5))
    assert s.Z0 == pytest.approx(1 / (1 - math.exp(-9.5)))
    assert s.mean_occupation == pytest.approx(1 / math.expm1(9.5))


def test_thermal_spec_rejects_short_cutoff():
    with pytest.raises(TruncationError):
        states.ThermalSpec(2.0, 1.0, cutoff=10)
    with pytest.raises(ValueError):
        states.ThermalSpec(-0.1)


def test_gibbs_oscillator_is_boltzmann():
    s = states.ThermalSpec(0.5, 1.0, 40)
    p = np.diag(states.gibbs_oscillator(s)).real
    assert p.sum() == pytest.approx(1.0)
    assert np.allclose(p[1:] / p[:-1], math.exp(-2.0))
    assert mean_number(states.gibbs_oscillator(s)) == pytest.approx(s.mean_occupation, abs=1e-12)


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("T", [0.1, 0.5, 1.0])
def test_npats_partition_closed_vs_sum(N, T):
    assert states.npats_partition(N, 1.0, T) == pytest.approx(states.npats_partition_sum(N, 1.0, T), rel=1e-10)


def test_npats_matches_operator_definition():
    # a^dag^N rho_T a^N built with matrices, on a roomy space
    s = states.ThermalSpec(0.5, 1.0, 60)
    ad = annihilation(70).conj().T
    rho_t = np.zeros((70, 70), dtype=complex)
    rho_t[:60, :60] = states.gibbs_oscillator(s)
    for N in (1, 2, 3):
        op = np.linalg.matrix_power(ad, N)
        ref = op @ rho_t @ op.conj().T
        ref = ref / np.trace(ref)
        assert np.allclose(states.npats(N, s), ref[:60, :60], atol=1e-12)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_npats_mean_number_closed_form(N):
    s = states.ThermalSpec(0.3, 1.0, 60)
    rho = states.npats(N, s)
    assert mean_number(rho) == pytest.approx(states.PhotonAddition.from_spec(N, s).mean_number, abs=1e-6)
    assert np.allclose(np.diag(rho)[:N], 0.0)


def test_npats_zero_temperature_is_fock():
    s = states.ThermalSpec(0.0, 1.0, 5)
    assert states.npats(2, s)[2, 2] == 1.0


def test_npats_truncation_errors():
    with pytest.raises(TruncationError):
        states.npats(5, states.ThermalSpec(0.1, 1.0, 5))


@settings(max_examples=10, deadline=None)
@given(st.floats(0.0, 1.5), st.floats(-math.pi, math.pi))
def test_displacement_matches_expm(r, phi):
    alpha = r * np.exp(1j * phi)
    cut = 60
    big = 130
    a = annihilation(big)
    ref = scipy.linalg.expm(alpha * a.conj().T - np.conj(alpha) * a)[:cut, :cut]
    assert np.allclose(states.displacement_matrix(alpha, cut), ref, atol=1e-8)


def test_displacement_truncation_error():
    with pytest.raises(TruncationError):
        states.displacement_matrix(3.0, 10)


def test_dts_mean_number_and_purity():
    s = states.ThermalSpec(0.1, 0.95, 25)
    alpha = states.alpha_opt(1, s)
    rho = states.dts(alpha, s)
    g = states.gibbs_oscillator(s)
    assert mean_number(rho) == pytest.approx(mean_number(g) + alpha ** 2, abs=1e-6)
    assert purity(rho) == pytest.approx(purity(g), abs=1e-8)
    # matched energy with the single-photon-added state
    assert mean_number(rho) == pytest.approx(mean_number(states.npats(1, s)), abs=1e-6)


def test_dts_at_higher_temperature():
    s = states.ThermalSpec(0.5, 1.0, 40)
    rho = states.dts(0.7j, s)
    np.testing.assert_allclose(np.trace(rho), 1.0)
    assert purity(rho) == pytest.approx(purity(states.gibbs_oscillator(s)), abs=1e-8)
    assert mean_number(rho) == pytest.approx(mean_number(states.gibbs_oscillator(s)) + 0.49, abs=1e-6)


def test_dts_truncation_error():
    with pytest.raises(TruncationError):
        states.dts(4.0, states.ThermalSpec(0.1, 1.0, 12))


def test_inefficient_spats_endpoints():
    s = states.ThermalSpec(0.1, 0.95, 25)
    assert np.allclose(states.inefficient_spats(1.0, s), states.npats(1, s))
    assert np.allclose(states.inefficient_spats(0.0, s), states.gibbs_oscillator(s))
    with pytest.raises(ValueError):
        states.inefficient_spats(1.2, s)


def test_qubit_and_qutrit_states():
    q = states.qubit_thermal(0.1, 0.05)
    assert q[0, 0].real == pytest.approx(1 / (1 + math.exp(-0.5)))
    q3 = states.qutrit_thermal(0.1)
    assert np.trace(q3).real == pytest.approx(1.0)
    assert q3[2, 2].real < 1e-4
    assert states.qubit_state(0.8)[1, 1] == pytest.approx(0.2)
    with pytest.raises(ValueError):
        states.qubit_state(1.5)
