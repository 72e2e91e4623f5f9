"""Half-cut von Neumann entanglement entropy of Dicke-sector pure states.

A symmetric state splits over a bipartition A|B (N_A + N_B = N) as

    |N; k> = sum_{k_A} sqrt( C(N_A,k_A) C(N_B,k-k_A) / C(N,k) ) |N_A;k_A>|N_B;k-k_A>,

so the amplitude matrix of a Dicke vector is (N_A+1) x (N_B+1) and the
reduced state of A has rank at most min(N_A, N_B)+1. The entanglement entropy
is therefore bounded by log(min(N_A, N_B)+1), far below the generic
(N/2) log 2 bound; natural logarithm throughout.
"""

from __future__ import annotations

import math

import numpy as np

from .core import binomial_row


class PSDViolationError(ArithmeticError):
    """Reduced density matrix has a significantly negative eigenvalue."""


def _split_sizes(n_spins: int) -> tuple[int, int]:
    # odd N splits floor/ceil; A is the smaller half
    na = n_spins // 2
    return na, n_spins - na


def _amplitude_matrix(psi: np.ndarray, n_spins: int) -> np.ndarray:
    """Schmidt amplitude matrix W with rho_A = W W^dagger; batched on axis 0."""
    na, nb = _split_sizes(n_spins)
    ca, cb, cn = binomial_row(na), binomial_row(nb), binomial_row(n_spins)
    ka = np.arange(na + 1)[:, None]
    kb = np.arange(nb + 1)[None, :]
    k = ka + kb
    coef = np.sqrt(ca[:, None] * cb[None, :] / cn[k])
    return psi[..., k] * coef


def reduced_half(psi: np.ndarray, n_spins: int) -> np.ndarray:
    """Reduced density matrix of half the spins, (N_A+1) x (N_A+1).

    For odd N the subsystem holds floor(N/2) spins.
    """
    W = _amplitude_matrix(psi, n_spins)
    return W @ W.conj().T


def _entropy_from_eigs(lam: np.ndarray, psd_tol: float = 1e-8) -> np.ndarray:
    if lam.min() < -psd_tol:
        raise PSDViolationError(f"reduced state eigenvalue {lam.min():.3e}")
    lam = np.clip(lam, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > 0.0, -lam * np.log(np.where(lam > 0.0, lam, 1.0)), 0.0)
    return terms.sum(axis=-1)


def entanglement_entropy(psi: np.ndarray, n_spins: int) -> float:
    """-Tr(rho_A log rho_A) across the half cut of a pure Dicke vector."""
    rho_a = reduced_half(psi, n_spins)
    lam = np.linalg.eigvalsh(rho_a)
    ent = float(_entropy_from_eigs(lam))
    na, nb = _split_sizes(n_spins)
    bound = math.log(min(na, nb) + 1) + 1e-9
    if ent > bound:
        raise PSDViolationError(f"entropy {ent} exceeds Schmidt bound {bound}")
    return ent


def entanglement_entropy_many(psis: np.ndarray, n_spins: int) -> np.ndarray:
    """Half-cut entropies of a batch of pure Dicke vectors, shape (n_states, N+1)."""
    W = _amplitude_matrix(psis, n_spins)
    rho_a = W @ np.conj(np.swapaxes(W, -1, -2))
    lam = np.linalg.eigvalsh(rho_a)
    return _entropy_from_eigs(lam)
