"""
Collisional multi-battery protocol.

A persistent two-mode charger ``rho_LR`` meets a string of fresh two-level
batteries one at a time. Each collision picks the Stark-drive integers
``(M, N)``, tunes the interaction time to maximize the energy handed to the
battery, evolves ``charger x battery`` under the effective dynamics and
discards the battery.

The charger is stored on ``L x R`` with the left mode slowest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .effective import EffectiveParams, delta_U_joint, doublet_rabi, evolve_effective, raw_energy_joint
from .errors import DimensionError
from .hilbert import check_density_matrix, partial_trace
from .observables import mean_number, mutual_information, purity, qubit_energy

POP_EPS = 1e-10
DRAINED_EPS = 1e-9
TAIL_AUDIT = 1e-6


@dataclass
class ChargerState:
    """Joint state of the two charger modes."""

    rho: np.ndarray
    dims: tuple

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        d = self.dims[0] * self.dims[1]
        self.rho = np.asarray(self.rho, dtype=complex)
        if self.rho.shape != (d, d):
            raise DimensionError(f"charger state shape {self.rho.shape} does not match dims {self.dims}")

    @classmethod
    def product(cls, rho_L: np.ndarray, rho_R: np.ndarray) -> "ChargerState":
        return cls(np.kron(rho_L, rho_R), (rho_L.shape[0], rho_R.shape[0]))

    def joint(self, m: int, m2: int, n: int, n2: int) -> complex:
        """``p(m, m', n, n') = <m, n| rho |m', n'>``."""
        n_right = self.dims[1]
        return complex(self.rho[m * n_right + n, m2 * n_right + n2])

    @property
    def populations(self) -> np.ndarray:
        """Diagonal ``p(m, m, n, n)`` as an ``(n_left, n_right)`` array."""
        return np.real(np.diag(self.rho)).reshape(self.dims)

    @property
    def rho_L(self) -> np.ndarray:
        return partial_trace(self.rho, 0, self.dims)

    @property
    def rho_R(self) -> np.ndarray:
        return partial_trace(self.rho, 1, self.dims)

    def tail_population(self) -> float:
        """Largest population on the top two Fock levels of either mode."""
        p = self.populations
        return float(max(p[-2:, :].sum(), p[:, -2:].sum()))

    def validate(self) -> "ChargerState":
        check_density_matrix(self.rho, trace_atol=1e-9)
        return self


@dataclass(frozen=True)
class CollisionRecord:
    k: int
    selected_MN: Optional[tuple]
    tau: float
    qubit_final_populations: tuple
    delta_U: float
    raw_energy_sum: float
    mutual_info: float


@dataclass(frozen=True)
class ChainConfig:
    """Knobs of the interaction-time search and termination."""

    grid_points: int = 400
    rel_tol: float = 1e-4
    drained_eps: float = DRAINED_EPS


@dataclass
class ChainResult:
    records: list
    charger: ChargerState
    tail_ok: bool
    terminated_at: Optional[int] = None
    initial_raw_energy: float = field(default=0.0)


def raw_energy_sum_k(charger: ChargerState, pq) -> float:
    """Closed form ``p_g (1 - p^L_00) - p_e (1 - p^R_00)`` from the vacuum marginals."""
    p = charger.populations
    return float(pq[0] * (1.0 - p[0, :].sum()) - pq[1] * (1.0 - p[:, 0].sum()))


def raw_energy_brute(charger: ChargerState, pq) -> float:
    """Raw energy total by summing every ``S^(k)_mn``."""
    return float(raw_energy_joint(charger.populations, pq).sum())


def optimal_collision_tau(charger: ChargerState, pq, MN, p: EffectiveParams,
                          config: ChainConfig = ChainConfig()) -> tuple[float, float]:
    """Interaction time maximizing the battery energy gain, and that gain.

    The gain is scanned on ``config.grid_points`` times over
    ``[0, 2 pi / Omega_min]``, where ``Omega_min`` is the slowest Rabi
    frequency among doublets with non-zero raw energy, then refined by a
    bounded scalar search (golden section with parabolic steps) around
    the best grid point.
    """
    ps = p.with_drive(*MN)
    P = charger.populations
    n_left, n_right = P.shape
    s = raw_energy_joint(P, pq)[1:n_left, : n_right - 1]
    active = np.abs(s) > 1e-14
    if not active.any():
        return 0.0, 0.0
    m, n = np.nonzero(active)
    omega_min = float(np.min(doublet_rabi(m + 1, n, ps)))
    grid = np.linspace(0.0, 2.0 * math.pi / omega_min, config.grid_points)
    vals = delta_U_joint(P, pq, grid, ps)
    i = int(np.argmax(vals))
    best_t, best_v = float(grid[i]), float(vals[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda t: -delta_U_joint(P, pq, t, ps), bounds=(lo, hi), method="bounded",
                              options={"xatol": config.rel_tol * max(best_t, hi - lo)})
        if -res.fun > best_v:
            best_t, best_v = float(res.x), float(-res.fun)
    return best_t, best_v


def _scan(charger: ChargerState, pq, p: EffectiveParams, config: ChainConfig):
    """Best ``((M, N), tau, gain)`` over the candidate families, or ``None`` if drained."""
    if raw_energy_sum_k(charger, pq) <= config.drained_eps:
        return None
    if abs(p.chi - 1.0) < 1e-12:
        candidates = [(0, -1)]
    else:
        pl = np.real(np.diag(charger.rho_L))
        pr = np.real(np.diag(charger.rho_R))
        if p.chi < 1.0:
            N = int(round(mean_number(charger.rho_R)))
            fams = [m for m in range(1, len(pl)) if pl[m] > POP_EPS or pl[m - 1] > POP_EPS]
            candidates = [(m, N) for m in fams]
        else:
            M = int(round(mean_number(charger.rho_L)))
            fams = [n for n in range(len(pr) - 1) if pr[n] > POP_EPS or pr[n + 1] > POP_EPS]
            candidates = [(M, n) for n in fams]
        candidates.sort(key=lambda mn: abs(mn[0]) + abs(mn[1]))
    if not candidates:
        return None
    best = None
    for mn in candidates:
        tau, gain = optimal_collision_tau(charger, pq, mn, p, config)
        if best is None or gain > best[2] + 1e-12:
            best = (mn, tau, gain)
    return best


def select_MN(charger: ChargerState, pq, p: EffectiveParams, config: ChainConfig = ChainConfig()):
    """Drive integers selecting the doublet family with the largest energy gain.

    ``chi == 1`` always gives ``(0, -1)``. For ``chi < 1`` the left family
    index ``M`` is scanned and ``N`` is the rounded right-mode occupation;
    ``chi > 1`` mirrors this. Returns ``None`` when the charger is drained.
    """
    best = _scan(charger, pq, p, config)
    return None if best is None else best[0]


def _join(charger: ChargerState, qubit: np.ndarray) -> np.ndarray:
    n_left, n_right = charger.dims
    r = charger.rho.reshape(n_left, n_right, n_left, n_right)
    joint = np.einsum("abcd,jk->ajbckd", r, qubit)
    d = n_left * qubit.shape[0] * n_right
    return joint.reshape(d, d)


def collide_one(charger: ChargerState, qubit: np.ndarray, p: EffectiveParams, k: int = 1,
                config: ChainConfig = ChainConfig()):
    """One collision of a fresh diagonal two-level battery with the charger.

    Returns the new charger, the battery's final state and a
    :class:`CollisionRecord`.
    """
    qubit = np.asarray(qubit, dtype=complex)
    if qubit.shape != (2, 2):
        raise DimensionError("batteries are two-level states")
    pq = (qubit[0, 0].real, qubit[1, 1].real)
    raw = raw_energy_sum_k(charger, pq)
    best = _scan(charger, pq, p, config)
    if best is None:
        mi = mutual_information(charger.rho, charger.dims)
        rec = CollisionRecord(k, None, 0.0, pq, 0.0, raw, mi)
        return charger, qubit, rec
    mn, tau, _ = best
    joint = _join(charger, qubit)
    out = evolve_effective(joint, tau, p.with_drive(*mn), charger.dims)
    drift = abs(np.trace(out).real - np.trace(joint).real)
    if drift > 1e-9:
        raise RuntimeError(f"collision changed the global trace by {drift:.2e}")
    if abs(purity(out) - purity(joint)) > 1e-9:
        raise RuntimeError("collision changed the global purity")
    n_left, n_right = charger.dims
    jdims = (n_left, 2, n_right)
    new = ChargerState(partial_trace(out, [0, 2], jdims), charger.dims)
    q_out = partial_trace(out, 1, jdims)
    rec = CollisionRecord(
        k=k,
        selected_MN=mn,
        tau=tau,
        qubit_final_populations=(float(q_out[0, 0].real), float(q_out[1, 1].real)),
        delta_U=qubit_energy(q_out) - qubit_energy(qubit),
        raw_energy_sum=raw,
        mutual_info=mutual_information(new.rho, new.dims),
    )
    return new, q_out, rec


def run_chain(K: int, initial_charger: ChargerState, qubit_template: np.ndarray, p: EffectiveParams,
              config: ChainConfig = ChainConfig()) -> ChainResult:
    """Run ``K`` sequential collisions with identical fresh batteries.

    A drained charger does not stop the chain: the remaining batteries pass
    through untouched and ``terminated_at`` marks the first such collision.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    charger = initial_charger
    pq = (qubit_template[0, 0].real, qubit_template[1, 1].real)
    result = ChainResult([], charger, True, None, raw_energy_sum_k(charger, pq))
    for k in range(1, K + 1):
        charger, _, rec = collide_one(charger, qubit_template, p, k, config)
        if rec.selected_MN is None and result.terminated_at is None:
            result.terminated_at = k
        result.records.append(rec)
    result.charger = charger
    result.tail_ok = charger.tail_population() < TAIL_AUDIT
    return result
