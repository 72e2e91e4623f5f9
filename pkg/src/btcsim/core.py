"""Dicke-basis representations and collective spin operators.

A cloud of N spin-1/2 particles driven and damped collectively never leaves
the maximal-spin sector S = N/2, so every state lives in the (N+1)-dimensional
Dicke ladder. Throughout the package the basis index is

    k = number of up spins,  k = 0 .. N,   i.e. |S, m> with m = k - S,

so k = 0 is the all-down (dark) state and k = N the all-up state. Pure states
are plain 1-D complex arrays of length N+1 ("Dicke vectors"), density matrices
are (N+1) x (N+1) complex arrays in the same basis. All logarithms in this
package are natural logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class StateError(ValueError):
    """A state array violates a required invariant (norm, trace, shape)."""


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the driven-dissipative collective spin model.

    The Hamiltonian is H = omega0 * Sx and the collective decay channel is
    L = sqrt(kappa / S) * S_minus with S = n_spins / 2. kappa sets the unit
    of time; the single dimensionless control parameter is
    Omega = omega0 / kappa.
    """

    n_spins: int
    omega0: float
    kappa: float = 1.0

    def __post_init__(self):
        if self.n_spins < 1:
            raise ValueError(f"n_spins must be >= 1, got {self.n_spins}")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if self.omega0 < 0:
            raise ValueError(f"omega0 must be >= 0, got {self.omega0}")

    @property
    def spin(self) -> float:
        """Total spin S = N/2."""
        return self.n_spins / 2.0

    @property
    def Omega(self) -> float:
        """Dimensionless drive omega0 / kappa."""
        return self.omega0 / self.kappa

    @property
    def dim(self) -> int:
        """Dimension N + 1 of the maximal-spin sector."""
        return self.n_spins + 1


@dataclass(frozen=True)
class CollectiveOps:
    """Dense matrices of the collective spin operators in the Dicke basis.

    ``jump`` is the collective decay operator L = sqrt(kappa/S) S_minus.
    ``lower_coef`` holds the ladder amplitudes c_k = sqrt(k (N - k + 1)) with
    S_minus |k> = c_k |k-1>; hot loops use it instead of the dense matrices.
    """

    n_spins: int
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    s_plus: np.ndarray
    s_minus: np.ndarray
    jump: np.ndarray
    lower_coef: np.ndarray
    jump_scale: float


def binomial_row(n: int) -> np.ndarray:
    """[C(n,0), ..., C(n,n)] as floats (exact up to n ~ 1000 in double)."""
    return np.array([math.comb(n, k) for k in range(n + 1)], dtype=float)


def build_collective_ops(params: ModelParams) -> CollectiveOps:
    """Construct Sx, Sy, Sz, S+/- and the jump operator for N spins.

    Matrix elements follow the ladder rule S_- |S,m> =
    sqrt(S(S+1) - m(m-1)) |S,m-1>, which in the k index reads
    S_- |k> = sqrt(k (N-k+1)) |k-1>.
    """
    n = params.n_spins
    spin = params.spin
    k = np.arange(n + 1)
    # c[k]: amplitude for lowering out of |k>; c[0] = 0
    c = np.sqrt(k * (n - k + 1.0))
    s_minus = np.zeros((n + 1, n + 1), dtype=complex)
    s_minus[k[:-1], k[1:]] = c[1:]
    s_plus = s_minus.conj().T.copy()
    sx = 0.5 * (s_plus + s_minus)
    sy = -0.5j * (s_plus - s_minus)
    sz = np.diag((k - spin).astype(complex))
    jump_scale = math.sqrt(params.kappa / spin)
    return CollectiveOps(
        n_spins=n,
        sx=sx,
        sy=sy,
        sz=sz,
        s_plus=s_plus,
        s_minus=s_minus,
        jump=jump_scale * s_minus,
        lower_coef=c,
        jump_scale=jump_scale,
    )


def fully_polarized(n_spins: int, direction: str = "up") -> np.ndarray:
    """Product state with all spins up (k = N) or all down (k = 0).

    The all-down state is the dark state: it is annihilated by S_minus and
    is the unique steady state of the undriven dynamics.
    """
    if n_spins < 1:
        raise ValueError("n_spins must be >= 1")
    psi = np.zeros(n_spins + 1, dtype=complex)
    if direction == "up":
        psi[-1] = 1.0
    elif direction == "down":
        psi[0] = 1.0
    else:
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
    return psi


def _is_vector(state: np.ndarray) -> bool:
    return state.ndim == 1


def check_dicke_vector(psi: np.ndarray, tol: float = 1e-6):
    """Raise StateError unless psi is a normalized 1-D complex amplitude array."""
    if psi.ndim != 1:
        raise StateError(f"expected a 1-D amplitude array, got shape {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise StateError(f"state norm deviates from 1 by {abs(norm - 1.0):.3e}")


def check_density_matrix(rho: np.ndarray, tol: float = 1e-6, psd_tol: float = 1e-8):
    """Raise StateError unless rho is Hermitian, unit trace and PSD (to tolerance)."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise StateError(f"expected a square matrix, got shape {rho.shape}")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > tol:
        raise StateError(f"Hermiticity violated by {herm:.3e}")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise StateError(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
    lo = np.linalg.eigvalsh(rho).min()
    if lo < -psd_tol:
        raise StateError(f"negative eigenvalue {lo:.3e}")


def magnetization(state: np.ndarray, ops: CollectiveOps) -> np.ndarray:
    """Bloch vector (m_x, m_y, m_z) = (<Sx>, <Sy>, <Sz>) / S of a normalized state.

    Accepts a Dicke vector (1-D) or a density matrix (2-D). Rejects states
    whose norm (or trace) deviates from 1 by more than 1e-6.
    """
    spin = ops.n_spins / 2.0
    if _is_vector(state):
        check_dicke_vector(state)
        m = np.array(
            [np.vdot(state, op @ state) for op in (ops.sx, ops.sy, ops.sz)]
        )
    else:
        if abs(np.trace(state).real - 1.0) > 1e-6:
            raise StateError("density matrix trace deviates from 1 by more than 1e-6")
        m = np.array(
            [np.trace(op @ state) for op in (ops.sx, ops.sy, ops.sz)]
        )
    return m.real / spin


def purity(rho: np.ndarray) -> float:
    """Tr(rho^2) of a Hermitian density matrix; 1 iff the state is pure."""
    # for Hermitian rho, Tr(rho^2) equals the squared Frobenius norm
    return float(np.vdot(rho, rho).real)


def pure_to_density(psi: np.ndarray) -> np.ndarray:
    """Rank-1 projector |psi><psi| of a normalized Dicke vector."""
    check_dicke_vector(psi, tol=1e-6)
    return np.outer(psi, psi.conj())
