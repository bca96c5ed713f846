"""
Truncated Fock-space linear algebra.

All composite states use a single flat ordering: left mode slowest, qutrit
in the middle, right mode fastest, i.e. ``|m, j, n> = |m>_L (x) |j> (x) |n>_R``
maps to ``(m * levels + j) * n_right + n``. Use :func:`product_index` rather
than recomputing this by hand.

Matrices are plain dense ``numpy`` arrays of dtype ``complex128``.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence, Union

import numpy as np

from .errors import DimensionError

G, E, I = 0, 1, 2
LEVELS = {"g": G, "e": E, "i": I}

HERMITIAN_ATOL = 1e-12


def annihilation(cutoff: int) -> np.ndarray:
    """Bosonic lowering operator on ``cutoff`` Fock levels."""
    if cutoff < 2:
        raise DimensionError(f"cutoff must be >= 2, got {cutoff}")
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), 1).astype(complex)


def number(cutoff: int) -> np.ndarray:
    return np.diag(np.arange(cutoff, dtype=float)).astype(complex)


def projector(level: int, dim: int) -> np.ndarray:
    """``|level><level|`` on a ``dim``-dimensional space."""
    p = np.zeros((dim, dim), dtype=complex)
    p[level, level] = 1.0
    return p


def transition(j: int, k: int, dim: int = 3) -> np.ndarray:
    """``sigma_jk = |j><k|``."""
    s = np.zeros((dim, dim), dtype=complex)
    s[j, k] = 1.0
    return s


def kron(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices, leftmost factor slowest."""
    if not ops:
        raise DimensionError("kron needs at least one matrix")
    for op in ops:
        if np.asarray(op).size == 0:
            raise DimensionError("kron of an empty matrix")
    return reduce(np.kron, (np.asarray(op, dtype=complex) for op in ops))


def product_index(m: int, j: Union[int, str], n: int, dims: Sequence[int]) -> int:
    """Flat index of ``|m, j, n>`` for ``dims = (n_left, levels, n_right)``."""
    n_left, levels, n_right = dims
    if isinstance(j, str):
        j = LEVELS[j]
    if not (0 <= m < n_left and 0 <= j < levels and 0 <= n < n_right):
        raise DimensionError(f"|{m},{j},{n}> outside dims {tuple(dims)}")
    return (m * levels + j) * n_right + n


def split_index(index: int, dims: Sequence[int]) -> tuple[int, int, int]:
    """Inverse of :func:`product_index`."""
    n_left, levels, n_right = dims
    if not 0 <= index < n_left * levels * n_right:
        raise DimensionError(f"index {index} outside dims {tuple(dims)}")
    mj, n = divmod(index, n_right)
    m, j = divmod(mj, levels)
    return m, j, n


def basis_state(m: int, j: Union[int, str], n: int, dims: Sequence[int]) -> np.ndarray:
    """Projector ``|m,j,n><m,j,n|`` on the product space."""
    dim = int(np.prod(dims))
    return projector(product_index(m, j, n, dims), dim)


def is_hermitian(a: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.max(np.abs(a - a.conj().T), initial=0.0) <= atol


def check_density_matrix(rho: np.ndarray, trace_atol: float = 1e-10, eig_floor: float = -1e-8) -> np.ndarray:
    """Validate ``rho`` as a density matrix and return it as complex array.

    Raises ``ValueError`` if ``rho`` is not Hermitian within 1e-12, its
    trace is off by more than ``trace_atol`` or an eigenvalue falls below
    ``eig_floor``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"density matrix must be square, got shape {rho.shape}")
    if not is_hermitian(rho):
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_atol:
        raise ValueError(f"density matrix trace {tr!r} differs from 1")
    lo = np.linalg.eigvalsh(rho)[0]
    if lo < eig_floor:
        raise ValueError(f"density matrix has eigenvalue {lo!r} below {eig_floor}")
    return rho


def partial_trace(rho: np.ndarray, keep: Union[int, Sequence[int]], dims: Sequence[int]) -> np.ndarray:
    """Reduced density matrix over the subsystems listed in ``keep``.

    Parameters
    ----------
    rho : ndarray
        Square matrix on the product space ``dims[0] x dims[1] x ...``.
    keep : int or sequence of int
        Subsystem positions to keep, in any order; the result is ordered
        as the subsystems appear in ``dims``.
    dims : sequence of int
        Subsystem dimensions, slowest first.
    """
    rho = np.asarray(rho)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise DimensionError(f"rho shape {rho.shape} does not match dims {dims}")
    keep = sorted({keep} if isinstance(keep, (int, np.integer)) else set(keep))
    if not keep or keep[0] < 0 or keep[-1] >= len(dims):
        raise DimensionError(f"invalid subsystem selection {keep} for {len(dims)} subsystems")

    t = rho.reshape(dims + dims)
    nsub = len(dims)
    # trace the highest axes first so remaining axis numbers stay valid
    for ax in sorted(set(range(nsub)) - set(keep), reverse=True):
        t = np.trace(t, axis1=ax, axis2=ax + t.ndim // 2)
    d = int(np.prod([dims[k] for k in keep]))
    return t.reshape(d, d)


def expm(h: np.ndarray, t: float) -> np.ndarray:
    """Unitary ``exp(-i h t)`` for Hermitian ``h``, via eigendecomposition."""
    h = np.asarray(h, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(h), initial=0.0)))
    if not is_hermitian(h, HERMITIAN_ATOL * scale):
        raise ValueError("expm requires a Hermitian generator")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def propagate(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    """``u rho u^dagger``."""
    return u @ rho @ u.conj().T
