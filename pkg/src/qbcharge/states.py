"""
Initial-state preparation: oscillator Gibbs states, N-photon-added thermal
states (NPATS), displaced thermal states (DTS), inefficient single-photon
mixtures and thermal qutrits.

Temperatures are dimensionless, ``Tbar = k_B T / (hbar omega_ig)``, and
frequencies are given in units of ``omega_ig``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .errors import DimensionError, TruncationError

log = logging.getLogger(__name__)

GIBBS_TAIL = 1e-8
DISPLACEMENT_TOL = 1e-6


def _boltzmann_ratio(omega_bar: float, Tbar: float) -> float:
    """``exp(-omega_bar / Tbar)``, zero at ``Tbar == 0``."""
    if Tbar == 0:
        return 0.0
    return math.exp(-omega_bar / Tbar)


def gibbs_partition(omega_bar: float, Tbar: float) -> float:
    """Untruncated single-mode partition function ``Z0 = 1 / (1 - e^{-omega/T})``."""
    return 1.0 / (1.0 - _boltzmann_ratio(omega_bar, Tbar))


@dataclass(frozen=True)
class ThermalSpec:
    """Temperature, mode frequency and Fock cutoff of a single oscillator.

    The cutoff is checked at construction: the Gibbs weight beyond it must
    be below 1e-8.
    """

    Tbar: float
    omega_bar: float = 1.0
    cutoff: int = 25

    def __post_init__(self):
        if self.Tbar < 0:
            raise ValueError(f"Tbar must be >= 0, got {self.Tbar}")
        if self.omega_bar <= 0:
            raise ValueError(f"omega_bar must be > 0, got {self.omega_bar}")
        if self.cutoff < 2:
            raise DimensionError(f"cutoff must be >= 2, got {self.cutoff}")
        tail = self.ratio ** self.cutoff
        if tail >= GIBBS_TAIL:
            raise TruncationError(
                f"Gibbs tail {tail:.3e} beyond cutoff {self.cutoff} exceeds {GIBBS_TAIL} "
                f"(Tbar={self.Tbar}, omega_bar={self.omega_bar})"
            )

    @property
    def ratio(self) -> float:
        return _boltzmann_ratio(self.omega_bar, self.Tbar)

    @property
    def beta(self) -> float:
        return math.inf if self.Tbar == 0 else 1.0 / self.Tbar

    @property
    def Z0(self) -> float:
        return gibbs_partition(self.omega_bar, self.Tbar)

    @property
    def mean_occupation(self) -> float:
        """Untruncated thermal occupation ``Z0 - 1``."""
        return self.Z0 - 1.0


@dataclass(frozen=True)
class PhotonAddition:
    """Partition functions of an N-photon-added thermal state."""

    N: int
    Z0: float
    ZN: float

    @classmethod
    def from_spec(cls, N: int, spec: ThermalSpec) -> "PhotonAddition":
        return cls(N, spec.Z0, npats_partition(N, spec.omega_bar, spec.Tbar))

    @property
    def mean_number(self) -> float:
        return (self.N + 1) * self.Z0 - 1.0


def npats_partition(N: int, omega_bar: float, Tbar: float) -> float:
    """Closed form ``Z_N = N! Z0^(N+1)``."""
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    return math.factorial(N) * gibbs_partition(omega_bar, Tbar) ** (N + 1)


def npats_partition_sum(N: int, omega_bar: float, Tbar: float, tail: float = 1e-12) -> float:
    """``Z_N`` by direct summation of ``(n+N)!/n! x^n`` until terms drop below ``tail``.

    Independent of the recursion behind :func:`npats_partition`.
    """
    x = _boltzmann_ratio(omega_bar, Tbar)
    terms = []
    n = 0
    term = float(math.factorial(N))
    while True:
        terms.append(term)
        # ratio of consecutive terms: (n+N+1)/(n+1) * x
        n += 1
        term *= (n + N) / n * x
        if term < tail * terms[0] and (n + N + 1) / (n + 1) * x < 1.0:
            break
    return math.fsum(terms)


def gibbs_oscillator(spec: ThermalSpec) -> np.ndarray:
    """Diagonal Gibbs state normalized on the truncated space."""
    p = spec.ratio ** np.arange(spec.cutoff, dtype=float)
    return np.diag(p / p.sum()).astype(complex)


def npats(N: int, spec: ThermalSpec) -> np.ndarray:
    """``a^dag^N exp(-beta H) a^N / Z_N`` on the truncated space."""
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    if spec.cutoff <= N:
        raise TruncationError(f"cutoff {spec.cutoff} cannot hold {N} added photons")
    k = np.arange(spec.cutoff)
    p = np.zeros(spec.cutoff)
    above = k[N:]
    if spec.Tbar == 0:
        p[N] = 1.0
    else:
        logw = gammaln(above + 1) - gammaln(above - N + 1) - (above - N) * (spec.omega_bar / spec.Tbar)
        p[N:] = np.exp(logw)
        deficit = 1.0 - p.sum() / npats_partition(N, spec.omega_bar, spec.Tbar)
        if deficit >= GIBBS_TAIL:
            raise TruncationError(f"NPATS(N={N}) tail {deficit:.3e} beyond cutoff {spec.cutoff}")
    return np.diag(p / p.sum()).astype(complex)


def _displacement_elements(alpha: complex, cutoff: int) -> np.ndarray:
    """Matrix elements ``<n|D(alpha)|m>`` from associated Laguerre polynomials.

    ``<n|D|m> = sqrt(m!/n!) alpha^(n-m) exp(-|alpha|^2/2) L_m^(n-m)(|alpha|^2)``
    for ``n >= m``, and ``<n|D|m> = (-1)^(m-n) conj(<m|D|n>)``. The polynomials
    come from a stable three-term recurrence; unlike the alternating binomial
    sum, high-index elements keep full precision.
    """
    alpha = complex(alpha)
    if alpha == 0:
        return np.eye(cutoff, dtype=complex)
    r = abs(alpha)
    phase = alpha / r
    n = np.arange(cutoff)[:, None]
    m = np.arange(cutoff)[None, :]
    lo = np.minimum(n, m)
    k = np.abs(n - m)
    mag = np.exp(0.5 * (gammaln(lo + 1.0) - gammaln(lo + k + 1.0)) - 0.5 * r * r + k * math.log(r))
    mag = mag * eval_genlaguerre(lo, k, r * r)
    ph = np.where(n >= m, phase ** (n - m), (-np.conj(phase)) ** (m - n))
    return mag * ph


def displacement_matrix(alpha: complex, cutoff: int) -> np.ndarray:
    """Truncated displacement operator ``D(alpha)``.

    Raises
    ------
    TruncationError
        If any column with index <= cutoff/2 loses more than 1e-6 of its
        norm to the truncation.
    """
    if cutoff < 2:
        raise DimensionError(f"cutoff must be >= 2, got {cutoff}")
    d = _displacement_elements(alpha, cutoff)
    norms = np.sum(np.abs(d[:, : cutoff // 2 + 1]) ** 2, axis=0)
    worst = float(np.max(np.abs(1.0 - norms)))
    if worst > DISPLACEMENT_TOL:
        raise TruncationError(
            f"displacement |alpha|={abs(alpha):.4g} not converged at cutoff {cutoff} (norm defect {worst:.3e})"
        )
    return d


def dts(alpha: complex, spec: ThermalSpec) -> np.ndarray:
    """Displaced thermal state ``D rho_T D^dag``, renormalized after truncation.

    Only the columns of ``D`` that carry thermal weight need to be
    converged; the weighted norm loss must stay below 1e-6.
    """
    p = np.diag(gibbs_oscillator(spec)).real
    d = _displacement_elements(alpha, spec.cutoff)
    rho = (d * p) @ d.conj().T
    kept = float(np.trace(rho).real)
    if abs(1.0 - kept) > DISPLACEMENT_TOL:
        raise TruncationError(
            f"DTS with |alpha|={abs(alpha):.4g} loses {1.0 - kept:.3e} of its trace at cutoff {spec.cutoff}"
        )
    log.info("DTS renormalization factor %.12f (alpha=%s, cutoff=%d)", kept, alpha, spec.cutoff)
    rho = rho / kept
    return 0.5 * (rho + rho.conj().T)


def alpha_opt(N: int, spec: ThermalSpec) -> float:
    """Displacement whose DTS has the same mean photon number as NPATS(N)."""
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    return math.sqrt(N * spec.Z0)


def inefficient_spats(eta: float, spec: ThermalSpec) -> np.ndarray:
    """Mixture ``eta * SPATS + (1 - eta) * Gibbs``."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    return eta * npats(1, spec) + (1.0 - eta) * gibbs_oscillator(spec)


def qutrit_thermal(Tbar: float, omega_g: float = 0.0, omega_e: float = 0.05, omega_i: float = 1.0) -> np.ndarray:
    """Gibbs state over the qutrit levels ``(g, e, i)``."""
    if not omega_g < omega_e < omega_i:
        raise ValueError("qutrit levels must satisfy omega_g < omega_e < omega_i")
    if Tbar < 0:
        raise ValueError(f"Tbar must be >= 0, got {Tbar}")
    p = np.zeros(3)
    if Tbar == 0:
        p[0] = 1.0
    else:
        p = np.exp(-(np.array([omega_g, omega_e, omega_i]) - omega_g) / Tbar)
    return np.diag(p / p.sum()).astype(complex)


def qubit_state(p_g: float) -> np.ndarray:
    """Diagonal two-level state ``diag(p_g, 1 - p_g)``."""
    if not 0.0 <= p_g <= 1.0:
        raise ValueError(f"p_g must lie in [0, 1], got {p_g}")
    return np.diag([p_g, 1.0 - p_g]).astype(complex)


def qubit_thermal(Tbar: float, omega_eg: float = 0.05) -> np.ndarray:
    """Thermal state of the {g, e} subspace alone (level i dropped)."""
    if Tbar == 0:
        return qubit_state(1.0)
    x = math.exp(-omega_eg / Tbar)
    return qubit_state(1.0 / (1.0 + x))
