"""Cross-mode charging and resetting of a qutrit-based quantum battery."""

from .collisions import ChargerState, CollisionRecord, collide_one, optimal_collision_tau, run_chain, select_MN
from .effective import EffectiveParams, amplitudes, delta_U_q, evolve_effective, raw_energy_matrix, raw_energy_sum
from .errors import DimensionError, IntegratorError, TruncationError
from .fulldyn import SystemSpec, build_full_hamiltonian, dispersive_residual, evolve_full
from .lindblad import DissipationSpec, integrate, liouvillian
from .states import ThermalSpec, alpha_opt, dts, gibbs_oscillator, inefficient_spats, npats

__version__ = "0.1.0"
