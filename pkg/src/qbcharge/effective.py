"""
Dynamics under the dispersive effective Hamiltonian.

The effective coupling ``H_LqR`` only connects the doublets
``{|m,g,n>, |m-1,e,n+1>}`` (m >= 1, n >= 0), so evolution is applied block
by block with the closed-form 2x2 propagator. Level ``i`` (when present)
only picks up its Stark phase. States outside any doublet, i.e. ``|0,g,n>``,
``|m,e,0>`` and doublet partners cut off by the Fock truncation, are
eigenstates and only acquire a phase.

Populations are always those of the qubit subspace ``{g, e}``; energies
are in units of ``hbar omega_eg`` with ``U = p_e - p_g``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError
from .hilbert import E, G, I, annihilation, kron, transition

DISPERSIVE_FACTOR = 10.0


@dataclass(frozen=True)
class EffectiveParams:
    """Couplings, detuning and Stark-drive integers of the effective model."""

    Omega_L: float
    Omega_R: float
    Delta: float
    M: int = 0
    N: int = -1

    def __post_init__(self):
        if self.Omega_L <= 0 or self.Omega_R <= 0:
            raise ValueError("couplings must be positive")
        if self.Delta <= 0:
            raise ValueError("detuning must be positive")

    @classmethod
    def from_ratio(cls, chi: float = 1.0, lambda_eff: float = 1.0, M: int = 0, N: int = -1,
                   Delta: float = 1.0) -> "EffectiveParams":
        """Parameters with the given ``chi = Omega_R/Omega_L`` and ``lambda_eff``."""
        if chi <= 0:
            raise ValueError(f"chi must be positive, got {chi}")
        if lambda_eff <= 0:
            raise ValueError(f"lambda_eff must be positive, got {lambda_eff}")
        omega_l = math.sqrt(lambda_eff * Delta / chi)
        return cls(omega_l, chi * omega_l, Delta, M, N)

    def with_drive(self, M: int, N: int) -> "EffectiveParams":
        return EffectiveParams(self.Omega_L, self.Omega_R, self.Delta, int(M), int(N))

    @property
    def chi(self) -> float:
        return self.Omega_R / self.Omega_L

    @property
    def lambda_eff(self) -> float:
        return self.Omega_L * self.Omega_R / self.Delta

    @property
    def dispersive(self) -> bool:
        return self.Delta >= DISPERSIVE_FACTOR * max(self.Omega_L, self.Omega_R)


@dataclass(frozen=True)
class DoubletAmplitudes:
    m: int
    n: int
    delta_mn: float
    Omega_mn: float
    A: complex
    B: complex


def doublet_detuning(m, n, p: EffectiveParams):
    """``lambda (chi^-1 (m - M) - chi (n - N))``; accepts arrays."""
    return p.lambda_eff * ((np.asarray(m) - p.M) / p.chi - p.chi * (np.asarray(n) - p.N))


def doublet_rabi(m, n, p: EffectiveParams):
    m = np.asarray(m)
    n = np.asarray(n)
    return np.sqrt(4.0 * m * (n + 1) * p.lambda_eff ** 2 + doublet_detuning(m, n, p) ** 2)


def _amplitudes(m, n, t, p: EffectiveParams):
    d = doublet_detuning(m, n, p)
    w = doublet_rabi(m, n, p)
    s = np.sin(w * np.asarray(t) / 2.0)
    a = np.cos(w * np.asarray(t) / 2.0) + 1j * (d / w) * s
    b = 1j * (2.0 * p.lambda_eff * np.sqrt(np.asarray(m) * (np.asarray(n) + 1)) / w) * s
    return a, b


def amplitudes(m: int, n: int, t: float, p: EffectiveParams) -> DoubletAmplitudes:
    """Closed-form doublet amplitudes ``A_mn(t)`` and ``B_mn(t)``."""
    if m < 1 or n < 0:
        raise ValueError(f"no doublet for m={m}, n={n}")
    if t < 0:
        raise ValueError("t must be >= 0")
    a, b = _amplitudes(m, n, t, p)
    return DoubletAmplitudes(m, n, float(doublet_detuning(m, n, p)), float(doublet_rabi(m, n, p)),
                             complex(a), complex(b))


def transfer_probability(m, n, t, p: EffectiveParams):
    """``|B_mn(t)|^2``; broadcasts over ``m``, ``n`` and ``t``."""
    m = np.asarray(m)
    n = np.asarray(n)
    w = doublet_rabi(m, n, p)
    return 4.0 * m * (n + 1) * p.lambda_eff ** 2 / w ** 2 * np.sin(w * np.asarray(t) / 2.0) ** 2


def selective_eigenvalues(m: int, n: int, p: EffectiveParams) -> tuple[float, float]:
    """Bare energies of ``|m,g,n>`` and ``|m-1,e,n+1>`` in units of ``hbar lambda_eff``."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return (p.M - m) / p.chi, p.chi * (p.N - n)


def optimal_tau(m: int, n: int, p: EffectiveParams) -> float:
    """Half Rabi period ``pi / Omega_mn`` of a doublet."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return math.pi / float(doublet_rabi(m, n, p))


def effective_hamiltonian(n_left: int, n_right: int, p: EffectiveParams, levels: int = 3) -> np.ndarray:
    """Dense matrix of the effective Hamiltonian (hbar = 1).

    With ``levels=3`` the Stark term of level ``i`` is included; with
    ``levels=2`` only the ``{g, e}`` coupling ``H_LqR`` is built.
    """
    if levels not in (2, 3):
        raise DimensionError("levels must be 2 or 3")
    a_l, a_r = annihilation(n_left), annihilation(n_right)
    n_l, n_r = a_l.conj().T @ a_l, a_r.conj().T @ a_r
    il, ir, iq = np.eye(n_left), np.eye(n_right), np.eye(levels)
    sgg, see = transition(G, G, levels), transition(E, E, levels)
    seg, sge = transition(E, G, levels), transition(G, E, levels)
    kl = p.Omega_L ** 2 / p.Delta
    kr = p.Omega_R ** 2 / p.Delta
    h = (
        -kl * kron(n_l - p.M * il, sgg, ir)
        - kr * kron(il, see, n_r - (p.N + 1) * ir)
        - p.lambda_eff * (kron(a_l, seg, a_r.conj().T) + kron(a_l.conj().T, sge, a_r))
    )
    if levels == 3:
        sii = transition(I, I, 3)
        h = h + kl * kron(n_l + il, sii, ir) + kr * kron(il, sii, n_r + ir)
    return h


@lru_cache(maxsize=32)
def _layout(n_left: int, levels: int, n_right: int):
    """Index bookkeeping for a product space, cached per dimensions."""
    m, j, n = np.meshgrid(np.arange(n_left), np.arange(levels), np.arange(n_right), indexing="ij")
    m, j, n = m.ravel(), j.ravel(), n.ravel()
    dm, dn = np.meshgrid(np.arange(1, n_left), np.arange(n_right - 1), indexing="ij")
    dm, dn = dm.ravel(), dn.ravel()
    a = (dm * levels + G) * n_right + dn
    b = ((dm - 1) * levels + E) * n_right + dn + 1
    return m, j, n, dm, dn, a, b


def _diagonal_energies(m, j, n, p: EffectiveParams) -> np.ndarray:
    lam, chi = p.lambda_eff, p.chi
    energy = np.zeros(m.shape)
    g, e, i = j == G, j == E, j == I
    energy[g] = -lam * (m[g] - p.M) / chi
    energy[e] = -lam * chi * (n[e] - p.N - 1)
    energy[i] = lam / chi * (m[i] + 1) + lam * chi * (n[i] + 1)
    return energy


def effective_propagator(n_left: int, n_right: int, t: float, p: EffectiveParams, levels: int = 3) -> sp.csr_matrix:
    """Sparse ``exp(-i H_eff t)`` assembled from the doublet blocks."""
    m, j, n, dm, dn, a, b = _layout(n_left, levels, n_right)
    energy = _diagonal_energies(m, j, n, p)
    diag = np.exp(-1j * energy * t)
    amp_a, amp_b = _amplitudes(dm, dn, t, p)
    phase = np.exp(-0.5j * (energy[a] + energy[b]) * t)
    rows = np.concatenate([a, b, a, b])
    cols = np.concatenate([a, b, b, a])
    vals = np.concatenate([phase * amp_a, phase * np.conj(amp_a), phase * amp_b, phase * amp_b])
    single = np.ones(m.size, dtype=bool)
    single[a] = False
    single[b] = False
    idx = np.flatnonzero(single)
    rows = np.concatenate([rows, idx])
    cols = np.concatenate([cols, idx])
    vals = np.concatenate([vals, diag[idx]])
    dim = m.size
    return sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))


def _infer_levels(rho: np.ndarray, dims: Sequence[int]) -> int:
    n_left, n_right = dims
    dim = rho.shape[0]
    levels, rem = divmod(dim, n_left * n_right)
    if rho.shape != (dim, dim) or rem or levels not in (2, 3):
        raise DimensionError(f"state of shape {rho.shape} does not fit modes {tuple(dims)} with a 2- or 3-level qutrit")
    return levels


def evolve_effective(rho: np.ndarray, t: float, p: EffectiveParams, dims: Sequence[int]) -> np.ndarray:
    """Exact evolution of ``rho`` on ``L x q x R`` for time ``t``.

    ``dims = (n_left, n_right)``; the qutrit dimension (2 or 3) is read off
    the state.
    """
    rho = np.asarray(rho, dtype=complex)
    levels = _infer_levels(rho, dims)
    u = effective_propagator(dims[0], dims[1], t, p, levels)
    half = u @ rho
    return (u @ half.conj().T).conj().T


def _check_populations(pop, name):
    pop = np.asarray(pop, dtype=float)
    if abs(pop.sum() - 1.0) > 1e-10:
        raise ValueError(f"{name} populations sum to {pop.sum()!r}, not 1")
    return pop


def raw_energy_matrix(pL, pq, pR) -> np.ndarray:
    """Raw energy elements ``S[m, n]`` for uncorrelated populations.

    The result has shape ``(len(pL) + 1, len(pR))`` and is indexed by the
    doublet labels directly; row 0 is zero. Populations beyond the cutoff
    are treated as zero, which makes the total equal its closed form
    exactly.
    """
    pL = _check_populations(pL, "left")
    pR = _check_populations(pR, "right")
    return raw_energy_joint(np.outer(pL, pR), pq)


def raw_energy_joint(P: np.ndarray, pq) -> np.ndarray:
    """``S[m, n] = p_g P[m, n] - p_e P[m-1, n+1]`` for a joint mode distribution ``P``."""
    P = np.asarray(P, dtype=float)
    p_g, p_e = pq[0], pq[1]
    n_left, n_right = P.shape
    padded = np.zeros((n_left + 1, n_right + 1))
    padded[:n_left, :n_right] = P
    s = np.zeros((n_left + 1, n_right))
    s[1:, :] = p_g * padded[1:, :n_right] - p_e * padded[:n_left, 1:]
    return s


def raw_energy_sum(pL, pq, pR) -> float:
    """Closed form ``p_g (1 - p^L_0) - p_e (1 - p^R_0)``."""
    return pq[0] * (1.0 - pL[0]) - pq[1] * (1.0 - pR[0])


def delta_U_joint(P: np.ndarray, pq, tau, p: EffectiveParams):
    """Qubit energy change ``2 sum S_mn |B_mn(tau)|^2`` for a diagonal qubit.

    ``P`` is the joint mode distribution ``<m,n|rho_LR|m,n>``. Only the
    doublets that fit inside the truncation contribute, matching
    :func:`evolve_effective`. ``tau`` may be an array.
    """
    P = np.asarray(P, dtype=float)
    n_left, n_right = P.shape
    s = raw_energy_joint(P, pq)[1:n_left, : n_right - 1]
    m = np.arange(1, n_left)[:, None]
    n = np.arange(n_right - 1)[None, :]
    tau = np.asarray(tau, dtype=float)
    prob = transfer_probability(m[..., None], n[..., None], tau.reshape(-1)[None, None, :], p)
    out = 2.0 * np.einsum("mn,mnt->t", s, prob)
    return out.reshape(tau.shape) if tau.ndim else float(out[0])


def delta_U_q(pL, pq, pR, tau, p: EffectiveParams):
    """Qubit energy change after ``tau`` for an uncorrelated diagonal input."""
    pL = _check_populations(pL, "left")
    pR = _check_populations(pR, "right")
    return delta_U_joint(np.outer(pL, pR), pq, tau, p)
