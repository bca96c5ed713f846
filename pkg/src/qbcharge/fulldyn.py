"""
Full qutrit + two-mode Hamiltonian and its unitary evolution.

Frequencies are in units of ``omega_ig`` with ``hbar = 1``. Evolution runs
in the frame rotating with ``H_0 - Delta sigma_ii``, which commutes with
the full Hamiltonian, so only the detuning of level ``i`` and the
couplings remain. Populations are identical in both frames.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .effective import EffectiveParams, evolve_effective
from .errors import DimensionError
from .hilbert import E, G, I, annihilation, kron, partial_trace, transition
from .observables import mean_number


@dataclass(frozen=True)
class SystemSpec:
    """Every parameter of the full model.

    Mode frequencies are derived: ``omega_L = omega_ig - Delta`` and
    ``omega_R = omega_ie - Delta``.
    """

    omega_g: float = 0.0
    omega_e: float = 0.05
    omega_i: float = 1.0
    Delta: float = 0.05
    Omega_L: float = 1e-3
    Omega_R: float = 1e-3
    M: int = 0
    N: int = -1
    cutoffs: tuple = field(default=(6, 6))

    def __post_init__(self):
        if not self.omega_g < self.omega_e < self.omega_i:
            raise ValueError("qutrit levels must satisfy omega_g < omega_e < omega_i")
        if self.Delta <= 0 or self.Omega_L < 0 or self.Omega_R < 0:
            raise ValueError("Delta must be positive and couplings non-negative")
        if self.omega_L <= 0 or self.omega_R <= 0:
            raise ValueError("Delta too large: mode frequencies must stay positive")
        if len(self.cutoffs) != 2 or min(self.cutoffs) < 2:
            raise DimensionError(f"cutoffs must be two integers >= 2, got {self.cutoffs}")

    @classmethod
    def from_ratio(cls, delta_over_omega: float = 50.0, chi: float = 1.0, Delta: float = 0.05,
                   M: int = 0, N: int = -1, cutoffs=(6, 6), **levels) -> "SystemSpec":
        """Spec with ``max(Omega_L, Omega_R) = Delta / delta_over_omega``."""
        if chi <= 0:
            raise ValueError(f"chi must be positive, got {chi}")
        big = Delta / delta_over_omega
        om_l, om_r = (big, chi * big) if chi <= 1 else (big / chi, big)
        return cls(Delta=Delta, Omega_L=om_l, Omega_R=om_r, M=M, N=N, cutoffs=tuple(cutoffs), **levels)

    @property
    def omega_L(self) -> float:
        return self.omega_i - self.omega_g - self.Delta

    @property
    def omega_R(self) -> float:
        return self.omega_i - self.omega_e - self.Delta

    @property
    def omega_eg(self) -> float:
        return self.omega_e - self.omega_g

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.cutoffs[0], 3, self.cutoffs[1])

    @property
    def lambda_eff(self) -> float:
        return self.Omega_L * self.Omega_R / self.Delta

    @property
    def drive_shift(self) -> float:
        """Stark-shift amplitude ``Omega_R^2 (N+1)/Delta - Omega_L^2 M/Delta``."""
        return (self.Omega_R ** 2 * (self.N + 1) - self.Omega_L ** 2 * self.M) / self.Delta

    def effective(self) -> EffectiveParams:
        return EffectiveParams(self.Omega_L, self.Omega_R, self.Delta, self.M, self.N)


def _operators(spec: SystemSpec):
    n_left, _, n_right = spec.dims
    a_l, a_r = annihilation(n_left), annihilation(n_right)
    il, iq, ir = np.eye(n_left), np.eye(3), np.eye(n_right)
    return a_l, a_r, il, iq, ir


def build_full_hamiltonian(spec: SystemSpec, frame: str = "lab") -> np.ndarray:
    """Full Hamiltonian on ``L x qutrit x R``.

    ``frame="lab"`` returns ``H_T`` itself; ``frame="interaction"`` returns
    ``H_T - (H_0 - Delta sigma_ii)``, the generator used for evolution.

    The Stark drive enters as ``(drive_shift / 2) sigma_z`` so that the
    g-e splitting it adds equals the shift appearing in the effective
    coupling.
    """
    a_l, a_r, il, iq, ir = _operators(spec)
    s = {(j, k): transition(j, k, 3) for j in range(3) for k in range(3)}
    sz = s[E, E] - s[G, G]
    h_int = spec.Omega_L * kron(a_l.conj().T, s[G, I], ir) + spec.Omega_R * kron(il, s[E, I], a_r.conj().T)
    h_int = h_int + h_int.conj().T
    h_drive = 0.5 * spec.drive_shift * kron(il, sz, ir)
    if frame == "interaction":
        return spec.Delta * kron(il, s[I, I], ir) + h_int + h_drive
    if frame != "lab":
        raise ValueError(f"unknown frame {frame!r}")
    h_q = spec.omega_g * s[G, G] + spec.omega_e * s[E, E] + spec.omega_i * s[I, I]
    h0 = (
        kron(il, h_q, ir)
        + spec.omega_L * kron(a_l.conj().T @ a_l, iq, ir)
        + spec.omega_R * kron(il, iq, a_r.conj().T @ a_r)
    )
    return h0 + h_int + h_drive


def excitation_operator(spec: SystemSpec) -> np.ndarray:
    """``n_L + n_R + sigma_ii``, conserved by the couplings."""
    a_l, a_r, il, iq, ir = _operators(spec)
    return (
        kron(a_l.conj().T @ a_l, iq, ir)
        + kron(il, iq, a_r.conj().T @ a_r)
        + kron(il, transition(I, I, 3), ir)
    )


def full_trajectory(rho: np.ndarray, t_grid: Sequence[float], spec: SystemSpec) -> np.ndarray:
    """States ``U(t) rho U(t)^dag`` for every ``t`` in ``t_grid``; shape ``(len(t), d, d)``."""
    rho = np.asarray(rho, dtype=complex)
    h = build_full_hamiltonian(spec, frame="interaction")
    if rho.shape != h.shape:
        raise DimensionError(f"state shape {rho.shape} does not match spec dims {spec.dims}")
    w, v = np.linalg.eigh(h)
    r = v.conj().T @ rho @ v
    out = np.empty((len(t_grid),) + rho.shape, dtype=complex)
    for k, t in enumerate(t_grid):
        ph = np.exp(-1j * w * t)
        out[k] = v @ (ph[:, None] * r * ph.conj()[None, :]) @ v.conj().T
    return out


def evolve_full(rho: np.ndarray, t: float, spec: SystemSpec) -> np.ndarray:
    return full_trajectory(rho, [t], spec)[0]


@dataclass
class DispersiveReport:
    """Largest effective-vs-full deviation of each observable over a time grid."""

    deviations: dict
    max_p_i: float

    @property
    def residual(self) -> float:
        return max(self.deviations.values())


def _populations(rho, dims):
    q = np.real(np.diag(partial_trace(rho, 1, dims)))
    return {
        "p_g": q[G],
        "p_e": q[E],
        "n_L": mean_number(partial_trace(rho, 0, dims)),
        "n_R": mean_number(partial_trace(rho, 2, dims)),
    }, q[I]


def dispersive_residual(spec: SystemSpec, initial: np.ndarray, t_grid: Sequence[float]) -> DispersiveReport:
    """Compare full and effective evolution of ``initial`` on ``t_grid``."""
    dims = spec.dims
    p = spec.effective()
    full = full_trajectory(initial, t_grid, spec)
    dev = {"p_g": 0.0, "p_e": 0.0, "n_L": 0.0, "n_R": 0.0}
    max_p_i = 0.0
    for k, t in enumerate(t_grid):
        pf, p_i = _populations(full[k], dims)
        pe, _ = _populations(evolve_effective(initial, t, p, dims[::2]), dims)
        for key in dev:
            dev[key] = max(dev[key], abs(pf[key] - pe[key]))
        max_p_i = max(max_p_i, p_i)
    return DispersiveReport(dev, max_p_i)
