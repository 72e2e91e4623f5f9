"""Stabilizer 2-Renyi entropy for permutationally invariant states.

For a state rho of N qubits the 2-Renyi stabilizer entropy is

    M2 = -log( sum_P Tr(P rho)^4 / 2^N ) + log Tr(rho^2),

the sum running over all 4^N Pauli strings. M2 vanishes exactly on stabilizer
states and obeys 0 <= M2 < N log 2 for pure states; m2 = M2 / N is the density.

Permutational invariance collapses the exponential sum: strings with the same
gate counts (n_x, n_y, n_z) share a single expectation value, so only
C(N+3, 3) ~ N^3 "Pauli classes" need to be evaluated, each with an exact
multinomial multiplicity g.

The class expectation itself is combinatorial. Fix the representative string
X^nx Y^ny Z^nz I^nid and write a Dicke ket |N;k> as the uniform superposition
of bitstrings with k up spins. A string flips the bits under its X and Y
sites, multiplies (+/-i) per Y site and (+/-1) per Z site, so the matrix
element <N;k'|P|N;k> reduces to counting how many up spins land on each gate
type. Summing the binomial counts gives two generating polynomials

    A(t) = (1+t)^nx (1-t)^ny          (flip sites, s = ups among them)
    B(t) = (t-1)^nz (1+t)^nid         (diagonal sites, u = ups among them)

and the exact contraction, with w-normalization 1/sqrt(C(N,k) C(N,k')),

    Tr(P rho) = (-i)^ny  sum_{s,u} A_s B_u  rho[u+s, u+delta-s]
                         / sqrt(C(N,u+s) C(N,u+delta-s)),

where delta = nx + ny. Grouping classes by delta turns the whole Pauli-class
sweep into a handful of small dense matrix products per delta, so a full SRE
evaluation costs O(N^4) flops. The brute-force routines in this module embed
states in the full 2^N space and are the independent oracle for all of this.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import binomial_row, purity

LN2 = math.log(2.0)


class ConsistencyError(ArithmeticError):
    """An internally computed quantity violated an exact property."""


@dataclass(frozen=True)
class PauliClass:
    """Permutation class of Pauli strings with fixed gate counts.

    ``multiplicity`` is the exact number of strings in the class,
    N! / (n_x! n_y! n_z! n_id!), kept as a Python int so it never overflows.
    """

    n_spins: int
    n_x: int
    n_y: int
    n_z: int

    def __post_init__(self):
        if min(self.n_x, self.n_y, self.n_z) < 0:
            raise ValueError("gate counts must be nonnegative")
        if self.n_x + self.n_y + self.n_z > self.n_spins:
            raise ValueError("gate counts exceed the number of spins")

    @property
    def n_id(self) -> int:
        return self.n_spins - self.n_x - self.n_y - self.n_z

    @property
    def multiplicity(self) -> int:
        n = self.n_spins
        return (
            math.comb(n, self.n_x)
            * math.comb(n - self.n_x, self.n_y)
            * math.comb(n - self.n_x - self.n_y, self.n_z)
        )


@dataclass(frozen=True)
class MagicValue:
    """Stabilizer entropy of one state: total, density and purity correction."""

    m2_total: float
    m2_density: float
    purity_term: float
    floored: bool = False


def n_pauli_classes(n_spins: int) -> int:
    """Number of permutation classes, C(N+3, 3)."""
    return math.comb(n_spins + 3, 3)


def enumerate_pauli_classes(n_spins: int) -> list[PauliClass]:
    """All Pauli classes of N qubits; sum of multiplicities is exactly 4^N."""
    if n_spins < 1:
        raise ValueError("n_spins must be >= 1")
    out = []
    for nx in range(n_spins + 1):
        for ny in range(n_spins + 1 - nx):
            for nz in range(n_spins + 1 - nx - ny):
                out.append(PauliClass(n_spins, nx, ny, nz))
    return out


def _poly_flip(nx: int, ny: int) -> np.ndarray:
    """Coefficients of (1+t)^nx (1-t)^ny (signed counts over flip sites)."""
    a = binomial_row(nx)
    b = binomial_row(ny) * ((-1.0) ** np.arange(ny + 1))
    return np.convolve(a, b)


def _poly_diag(nz: int, nid: int) -> np.ndarray:
    """Coefficients of (t-1)^nz (1+t)^nid (signed counts over diagonal sites)."""
    a = binomial_row(nz) * ((-1.0) ** (nz - np.arange(nz + 1)))
    b = binomial_row(nid)
    return np.convolve(a, b)


class ClassTable:
    """Precomputed per-N tables for evaluating all Pauli classes at once.

    Classes are grouped by delta = n_x + n_y. Group ``delta`` holds

    - ``A``: (delta+1, delta+1) flip polynomials, row n_y,
    - ``B``: (N-delta+1, N-delta+1) diagonal polynomials, row n_z,
    - ``g``: float multiplicities, shape (delta+1, N-delta+1),
    - ``idx_row/idx_col``: index grids picking rho[u+s, u+delta-s],
    - ``phase``: (-i)^n_y per row.

    The weighted state matrix W = rho / sqrt(outer(C, C)) is gathered through
    the index grids and contracted as A @ G @ B.T, yielding every class
    expectation of the group in three small matrix products.
    """

    def __init__(self, n_spins: int):
        self.n_spins = n_spins
        self.sqrt_binom = np.sqrt(binomial_row(n_spins))
        self.groups = []
        for delta in range(n_spins + 1):
            m = n_spins - delta
            A = np.zeros((delta + 1, delta + 1))
            for ny in range(delta + 1):
                A[ny] = _poly_flip(delta - ny, ny)
            B = np.zeros((m + 1, m + 1))
            for nz in range(m + 1):
                B[nz] = _poly_diag(nz, m - nz)
            g = np.empty((delta + 1, m + 1))
            for ny in range(delta + 1):
                for nz in range(m + 1):
                    g[ny, nz] = float(
                        PauliClass(n_spins, delta - ny, ny, nz).multiplicity
                    )
            s = np.arange(delta + 1)[:, None]
            u = np.arange(m + 1)[None, :]
            self.groups.append(
                {
                    "A": A,
                    "B": B,
                    "g": g,
                    "idx_row": u + s,
                    "idx_col": u + delta - s,
                    "phase": (-1j) ** np.arange(delta + 1),
                }
            )


@lru_cache(maxsize=None)
def class_table(n_spins: int) -> ClassTable:
    return ClassTable(n_spins)


def _weighted_pure(psis: np.ndarray, n_spins: int) -> np.ndarray:
    """W[b, k, k'] = psi_k conj(psi_k') / sqrt(C(N,k) C(N,k')) per batch row."""
    sq = class_table(n_spins).sqrt_binom
    w = psis / sq[None, :]
    return w[:, :, None] * w.conj()[:, None, :]


def _weighted_mixed(rho: np.ndarray, n_spins: int) -> np.ndarray:
    sq = class_table(n_spins).sqrt_binom
    return (rho / np.outer(sq, sq))[None]


def _weighted_state(state: np.ndarray, n_spins: int) -> np.ndarray:
    """Weighted matrix batch for one state: 1-D input is pure, 2-D a density matrix."""
    if state.ndim == 1:
        return _weighted_pure(state[None, :], n_spins)
    return _weighted_mixed(state, n_spins)


def _pauli_fourth_moment(W: np.ndarray, n_spins: int, imag_tol: float = 1e-8):
    """sum_P Tr(P rho)^4 / 2^N for a batch of weighted state matrices.

    Per delta group the contraction is exact; the per-group partial sums are
    combined with math.fsum (the partials span many orders of magnitude,
    while within a group all terms are nonnegative so pairwise summation is
    already accurate).
    """
    table = class_table(n_spins)
    nb = W.shape[0]
    partials = np.empty((nb, n_spins + 1))
    for j, grp in enumerate(table.groups):
        G = W[:, grp["idx_row"], grp["idx_col"]]
        T = np.matmul(np.matmul(grp["A"], G), grp["B"].T)
        T *= grp["phase"][None, :, None]
        bad = np.abs(T.imag).max()
        if bad > imag_tol:
            raise ConsistencyError(
                f"Pauli expectation has imaginary part {bad:.3e} (N={n_spins})"
            )
        partials[:, j] = (T.real**4 * grp["g"][None]).sum(axis=(1, 2))
    scale = 2.0**n_spins
    return np.array([math.fsum(p) / scale for p in partials])


def class_expectation(state: np.ndarray, cls: PauliClass, n_spins: int) -> float:
    """Tr(P rho) for one Pauli class on a Dicke-sector state (vector or matrix)."""
    if cls.n_spins != n_spins:
        raise ValueError("class was built for a different N")
    W = _weighted_state(state, n_spins)[0]
    delta = cls.n_x + cls.n_y
    A = _poly_flip(cls.n_x, cls.n_y)
    B = _poly_diag(cls.n_z, cls.n_id)
    s = np.arange(delta + 1)[:, None]
    u = np.arange(n_spins - delta + 1)[None, :]
    val = ((-1j) ** cls.n_y) * np.einsum(
        "s,u,su->", A, B, W[u + s, u + delta - s]
    )
    if abs(val.imag) > 1e-8:
        raise ConsistencyError(f"imaginary Pauli expectation {val.imag:.3e}")
    return float(val.real)


def sre(state: np.ndarray, n_spins: int | None = None) -> MagicValue:
    """Stabilizer 2-Renyi entropy of a Dicke-sector state.

    Pure input (1-D amplitudes) gets purity term exactly 0; a density matrix
    contributes log Tr(rho^2). The Pauli sum uses the class decomposition, so
    the cost is polynomial in N.
    """
    if n_spins is None:
        n_spins = state.shape[-1] - 1
    W = _weighted_state(state, n_spins)
    moment = _pauli_fourth_moment(W, n_spins)[0]
    floored = False
    if moment <= 0.0:
        moment = 1e-300
        floored = True
    if state.ndim == 1:
        pterm = 0.0
    else:
        pterm = math.log(purity(state))
    m2 = -math.log(moment) + pterm
    if m2 < -1e-9:
        raise ConsistencyError(f"negative stabilizer entropy {m2:.3e}")
    m2 = max(m2, 0.0)
    return MagicValue(
        m2_total=m2, m2_density=m2 / n_spins, purity_term=pterm, floored=floored
    )


def sre_many(psis: np.ndarray, n_spins: int | None = None) -> np.ndarray:
    """m2 densities of a batch of pure Dicke vectors, shape (n_states, N+1).

    Vectorized across the batch; used for trajectory ensembles where the
    stabilizer entropy is sampled at many times. Memory is kept bounded by
    chunking the batch.
    """
    if n_spins is None:
        n_spins = psis.shape[-1] - 1
    out = np.empty(psis.shape[0])
    chunk = 256
    for i in range(0, psis.shape[0], chunk):
        W = _weighted_pure(psis[i : i + chunk], n_spins)
        moment = _pauli_fourth_moment(W, n_spins)
        out[i : i + chunk] = -np.log(np.maximum(moment, 1e-300))
    out = np.where(out > -1e-9, np.maximum(out, 0.0), out)
    if out.min() < -1e-9:
        raise ConsistencyError(f"negative stabilizer entropy {out.min():.3e}")
    return out / n_spins


# ----------------------------------------------------------------------
# brute-force oracles (full 2^N space)
# ----------------------------------------------------------------------

_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

_BRUTE_MAX_N = 12


def dicke_embedding(n_spins: int) -> np.ndarray:
    """Isometry (2^N, N+1): column k is the symmetric state with k up spins.

    Bit value 0 in the computational index means spin up, so the all-up state
    is index 0 and matches Z = diag(1, -1) on each site.
    """
    V = np.zeros((2**n_spins, n_spins + 1))
    for b in range(2**n_spins):
        ups = n_spins - bin(b).count("1")
        V[b, ups] = 1.0
    V /= np.sqrt(binomial_row(n_spins))[None, :]
    return V


def _embed_full(state: np.ndarray, n_spins: int) -> np.ndarray:
    if n_spins > _BRUTE_MAX_N:
        raise ValueError(f"brute force limited to N <= {_BRUTE_MAX_N}")
    V = dicke_embedding(n_spins)
    if state.ndim == 1:
        psi = V @ state
        return np.outer(psi, psi.conj())
    return V @ state @ V.conj().T


def _kron_chain(labels) -> np.ndarray:
    P = np.array([[1.0 + 0.0j]])
    for lab in labels:
        P = np.kron(P, _PAULI_1Q[lab])
    return P


def class_expectation_bruteforce(
    state: np.ndarray, cls: PauliClass, n_spins: int
) -> float:
    """Tr(P rho) via an explicit tensor-product representative in 2^N space."""
    rho_full = _embed_full(state, n_spins)
    labels = "X" * cls.n_x + "Y" * cls.n_y + "Z" * cls.n_z + "I" * cls.n_id
    P = _kron_chain(labels)
    val = np.einsum("ij,ji->", P, rho_full)
    if abs(val.imag) > 1e-8:
        raise ConsistencyError(f"imaginary Pauli expectation {val.imag:.3e}")
    return float(val.real)


def sre_bruteforce(state: np.ndarray, n_spins: int) -> MagicValue:
    """Naive 4^N Pauli-sum stabilizer entropy; independent oracle for sre()."""
    rho_full = _embed_full(state, n_spins)
    total = 0.0
    for labels in itertools.product("IXYZ", repeat=n_spins):
        P = _kron_chain(labels)
        total += np.einsum("ij,ji->", P, rho_full).real ** 4
    moment = total / 2.0**n_spins
    pterm = 0.0 if state.ndim == 1 else math.log(purity(state))
    m2 = -math.log(moment) + pterm
    return MagicValue(m2_total=m2, m2_density=m2 / n_spins, purity_term=pterm)
