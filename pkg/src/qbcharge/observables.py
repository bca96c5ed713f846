"""Scalar diagnostics: qubit energy, populations, purity, entropies."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .hilbert import E, G, I, partial_trace

EIG_FLOOR = -1e-6


def qubit_energy(rho_q: np.ndarray) -> float:
    """``p_e - p_g`` in units of ``hbar omega_eg``; level ``i`` counts as zero."""
    rho_q = np.asarray(rho_q)
    if rho_q.shape not in ((2, 2), (3, 3)):
        raise ValueError(f"expected a 2- or 3-level state, got shape {rho_q.shape}")
    return float(rho_q[E, E].real - rho_q[G, G].real)


def mean_number(rho_mode: np.ndarray) -> float:
    """``<a^dag a>`` of a single-mode state."""
    return float(np.real(np.arange(rho_mode.shape[0]) @ np.diag(rho_mode)))


def purity(rho: np.ndarray) -> float:
    rho = np.asarray(rho)
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(rho) ** 2))


def _spectrum(rho: np.ndarray) -> np.ndarray:
    w = np.linalg.eigvalsh(np.asarray(rho))
    if w[0] < EIG_FLOOR:
        raise ValueError(f"state has eigenvalue {w[0]!r} below {EIG_FLOOR}")
    return np.clip(w, 0.0, None)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy in nats, with ``0 ln 0 = 0``."""
    w = _spectrum(rho)
    w = w[w > 0]
    return float(-np.sum(w * np.log(w)))


def mutual_information(rho_ab: np.ndarray, dims: Sequence[int]) -> float:
    """``S(rho_A) + S(rho_B) - S(rho_AB)`` for a bipartite state."""
    s_a = von_neumann_entropy(partial_trace(rho_ab, 0, dims))
    s_b = von_neumann_entropy(partial_trace(rho_ab, 1, dims))
    return s_a + s_b - von_neumann_entropy(rho_ab)


@dataclass(frozen=True)
class EnergyReport:
    U_q: float
    p_g: float
    p_e: float
    p_i: float
    n_L: float
    n_R: float


def energy_report(rho: np.ndarray, dims: Sequence[int]) -> EnergyReport:
    """Populations and mode occupations of a state on ``L x q x R``.

    ``dims = (n_left, levels, n_right)``.
    """
    rho_q = partial_trace(rho, 1, dims)
    p = np.real(np.diag(rho_q))
    p_i = float(p[I]) if len(p) > 2 else 0.0
    return EnergyReport(
        U_q=qubit_energy(rho_q),
        p_g=float(p[G]),
        p_e=float(p[E]),
        p_i=p_i,
        n_L=mean_number(partial_trace(rho, 0, dims)),
        n_R=mean_number(partial_trace(rho, 2, dims)),
    )
