"""
Thermal Lindblad dynamics of the full qutrit + two-mode model.

Dissipation acts on the transitions ``ig``, ``ie`` and on both modes, with
rates ``gamma+ = gamma0 nbar(omega)`` and ``gamma- = gamma0 (nbar(omega) + 1)``.
The ``e <-> g`` channel is off unless ``include_eg`` is set.

:func:`integrate` propagates the vectorized master equation with a
fixed-step classical Runge-Kutta scheme. The generator conserves
``K_row - K_col`` for ``K = n_L + n_R + sigma_ii``, so only the sectors
present in the initial state are propagated.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DimensionError, IntegratorError
from .fulldyn import SystemSpec, build_full_hamiltonian
from .hilbert import E, G, I, annihilation, transition

log = logging.getLogger(__name__)

TRACE_DRIFT = 1e-8
EIG_FLOOR = -1e-6
MAX_DIM = 1000


def bose_einstein(omega_bar: float, Tbar: float) -> float:
    """Thermal occupation ``1 / (exp(omega/T) - 1)``; zero at ``Tbar == 0``."""
    if omega_bar <= 0:
        raise ValueError(f"omega_bar must be positive, got {omega_bar}")
    if Tbar == 0:
        return 0.0
    x = omega_bar / Tbar
    if x > 700:
        return 0.0
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class DissipationSpec:
    """Bare rate, bath temperature and transition frequencies.

    ``gamma0`` is an absolute rate in the units of the Hamiltonian;
    :meth:`for_system` accepts it in units of ``lambda_eff``.
    """

    gamma0: float
    Tbar: float
    transition_freqs: dict = field(default_factory=dict)
    include_eg: bool = False

    def __post_init__(self):
        if self.gamma0 < 0:
            raise ValueError(f"gamma0 must be >= 0, got {self.gamma0}")
        if self.Tbar < 0:
            raise ValueError(f"Tbar must be >= 0, got {self.Tbar}")

    @classmethod
    def for_system(cls, spec: SystemSpec, gamma0_over_lambda: float, Tbar: float,
                   include_eg: bool = False) -> "DissipationSpec":
        freqs = {
            "ig": spec.omega_i - spec.omega_g,
            "ie": spec.omega_i - spec.omega_e,
            "L": spec.omega_L,
            "R": spec.omega_R,
        }
        if include_eg:
            freqs["eg"] = spec.omega_eg
        return cls(gamma0_over_lambda * spec.lambda_eff, Tbar, freqs, include_eg)

    def rates(self) -> dict:
        """``{channel: (gamma_plus, gamma_minus)}``."""
        out = {}
        for mu, w in self.transition_freqs.items():
            if mu == "eg" and not self.include_eg:
                continue
            nbar = bose_einstein(w, self.Tbar)
            out[mu] = (self.gamma0 * nbar, self.gamma0 * (nbar + 1.0))
        return out


def _lowering_operators(spec: SystemSpec) -> dict:
    n_left, _, n_right = spec.dims
    il = sp.identity(n_left, format="csr")
    ir = sp.identity(n_right, format="csr")
    iq = sp.identity(3, format="csr")

    def qutrit(j, k):
        return sp.kron(sp.kron(il, sp.csr_matrix(transition(j, k, 3))), ir, format="csr")

    return {
        "ig": qutrit(G, I),
        "ie": qutrit(E, I),
        "L": sp.kron(sp.kron(sp.csr_matrix(annihilation(n_left)), iq), ir, format="csr"),
        "R": sp.kron(sp.kron(il, iq), sp.csr_matrix(annihilation(n_right)), format="csr"),
        "eg": qutrit(G, E),
    }


def jump_operators(spec: SystemSpec, diss: DissipationSpec) -> list:
    """``[(rate, L), ...]`` with the raising and lowering operator of every channel."""
    ops = _lowering_operators(spec)
    out = []
    for mu, (g_plus, g_minus) in diss.rates().items():
        low = ops[mu]
        if g_minus > 0:
            out.append((g_minus, low))
        if g_plus > 0:
            out.append((g_plus, low.conj().T.tocsr()))
    return out


def lindblad_rhs(rho: np.ndarray, spec: SystemSpec, diss: DissipationSpec, frame: str = "interaction") -> np.ndarray:
    """Time derivative of ``rho`` under the master equation (dense evaluation)."""
    rho = np.asarray(rho, dtype=complex)
    h = build_full_hamiltonian(spec, frame)
    out = -1j * (h @ rho - rho @ h)
    for rate, op in jump_operators(spec, diss):
        l = op.toarray()
        ld = l.conj().T
        ldl = ld @ l
        out += rate * (l @ rho @ ld - 0.5 * (ldl @ rho + rho @ ldl))
    return out


def liouvillian(spec: SystemSpec, diss: DissipationSpec, frame: str = "interaction") -> sp.csr_matrix:
    """Sparse generator acting on row-major ``vec(rho)``."""
    h = sp.csr_matrix(build_full_hamiltonian(spec, frame))
    d = h.shape[0]
    ident = sp.identity(d, format="csr")
    gen = -1j * (sp.kron(h, ident) - sp.kron(ident, h.T))
    for rate, l in jump_operators(spec, diss):
        ldl = (l.conj().T @ l).tocsr()
        gen = gen + rate * (sp.kron(l, l.conj()) - 0.5 * sp.kron(ldl, ident) - 0.5 * sp.kron(ident, ldl.T))
    return gen.tocsr()


def _excitations(spec: SystemSpec) -> np.ndarray:
    n_left, levels, n_right = spec.dims
    m, j, n = np.meshgrid(np.arange(n_left), np.arange(levels), np.arange(n_right), indexing="ij")
    return (m + n + (j == I)).ravel()


@dataclass
class Trajectory:
    """Output of :func:`integrate`: times, per-time results and the step used."""

    t: np.ndarray
    values: list
    step: float
    max_trace_drift: float
    min_eigenvalue: float


def _rk4(gen, y, h, nsteps, perm):
    for _ in range(nsteps):
        k1 = gen @ y
        k2 = gen @ (y + 0.5 * h * k1)
        k3 = gen @ (y + 0.5 * h * k2)
        k4 = gen @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        y = 0.5 * (y + y[perm].conj())
    return y


def integrate(rho0: np.ndarray, t_grid: Sequence[float], spec: SystemSpec, diss: DissipationSpec,
              observe: Optional[Callable[[np.ndarray], object]] = None, step: Optional[float] = None,
              frame: str = "interaction", max_halvings: int = 4) -> Trajectory:
    """Integrate the master equation from ``rho0`` at ``t_grid[0]``.

    Parameters
    ----------
    observe : callable, optional
        Applied to the density matrix at every grid time; the trajectory
        stores its results. Defaults to storing the density matrices.
    step : float, optional
        Maximum Runge-Kutta step. By default it is set from the 1-norm of
        the generator and ``0.01 / lambda_eff``.

    Raises
    ------
    IntegratorError
        If the trace drifts by more than 1e-8 or an eigenvalue drops below
        -1e-6 even after ``max_halvings`` step halvings.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 1 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be a strictly increasing 1-D sequence")
    rho0 = np.asarray(rho0, dtype=complex)
    d = int(np.prod(spec.dims))
    if rho0.shape != (d, d):
        raise DimensionError(f"state shape {rho0.shape} does not match spec dims {spec.dims}")
    if d > MAX_DIM:
        raise DimensionError(f"state dimension {d} exceeds {MAX_DIM}; reduce the cutoffs")
    observe = observe or (lambda r: r.copy())

    k = _excitations(spec)
    kdiff = k[:, None] - k[None, :]
    sectors = np.unique(kdiff[np.abs(rho0) > 0])
    mask = np.isin(kdiff, sectors).ravel()
    idx = np.flatnonzero(mask)
    gen = liouvillian(spec, diss, frame)[idx][:, idx].tocsr()

    rows, cols = np.divmod(idx, d)
    pos = np.full(d * d, -1)
    pos[idx] = np.arange(idx.size)
    perm = pos[cols * d + rows]
    diag = pos[np.arange(d) * (d + 1)]

    if step is None:
        norm = spla.norm(gen, 1)
        step = 0.05 / norm if norm > 0 else np.inf
        if spec.lambda_eff > 0:
            step = min(step, 0.01 / spec.lambda_eff)
        if not np.isfinite(step):
            step = float(t_grid[-1] - t_grid[0]) or 1.0

    def unvec(y):
        r = np.zeros(d * d, dtype=complex)
        r[idx] = y
        return r.reshape(d, d)

    h_try = step
    for attempt in range(max_halvings + 1):
        y = rho0.ravel()[idx].copy()
        values = [observe(rho0)]
        drift = abs(np.trace(rho0).real - 1.0)
        lo = np.linalg.eigvalsh(rho0)[0]
        ok = True
        for t0, t1 in zip(t_grid[:-1], t_grid[1:]):
            nsteps = max(1, math.ceil((t1 - t0) / h_try))
            y = _rk4(gen, y, (t1 - t0) / nsteps, nsteps, perm)
            drift = max(drift, abs(y[diag].real.sum() - np.trace(rho0).real))
            rho = unvec(y)
            lo = min(lo, np.linalg.eigvalsh(rho)[0])
            if drift > TRACE_DRIFT or lo < EIG_FLOOR:
                ok = False
                break
            values.append(observe(rho))
        if ok:
            return Trajectory(t_grid, values, h_try, drift, lo)
        log.warning("integrator bounds violated (drift %.2e, min eig %.2e); halving step %.3e", drift, lo, h_try)
        h_try /= 2.0
    raise IntegratorError(f"trace drift {drift:.2e} / min eigenvalue {lo:.2e} out of bounds after {max_halvings} halvings")
