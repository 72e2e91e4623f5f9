"""Stochastic pure-state unravelings of the collective decay channel.

Conditioned on a perfect continuous measurement record, the state stays pure
and follows one of a family of stochastic processes whose ensemble average
reproduces the master equation:

* quantum jumps (photodetection): between detection events the state drifts
  under the non-Hermitian H_nH = H - (i/2) L^dag L to first order in dt and is
  renormalized; with probability dp = <L^dag L> dt it jumps to L psi / |L psi|.
* general local-oscillator detection with offset mu: the same jump rule after
  shifting L -> L + mu and H -> H - (i/2)(mu* L - mu L^dag). mu = 0 reproduces
  the plain jump scheme step for step.
* quantum state diffusion (heterodyne): the Ito step
      d psi = [ -iH dt - 1/2 (L^dag L + |l|^2 - 2 l* L) dt + (L - l) dW ] psi,
  l = <L>, dW = sqrt(dt/2) (X + iY) with X, Y independent standard normals,
  followed by explicit renormalization.

Reproducibility: trajectory i of an ensemble draws from
numpy.random.default_rng([seed, i]) (PCG64 seeded through SeedSequence
entropy pooling), one uniform per candidate jump step and one (X, Y) normal
pair per diffusive step, so ensembles are bit-reproducible for any worker
count. The BTC_THREADS environment variable caps the process pool (0 = one
worker per CPU); it never affects the numbers, only the wall time.

All one-step updates are assembled from shifted array slices: the jump
operator is bidiagonal, L^dag L is diagonal, and so is every operator entering
the drifts, so a step costs O(N).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import CollectiveOps, ModelParams, build_collective_ops
from .entanglement import entanglement_entropy_many
from .lindblad import StepSizeError
from .magic import sre_many

MAX_JUMP_PROB = 0.1


class ImpossibleEventError(RuntimeError):
    """A jump fired on a state annihilated by the jump operator."""


@dataclass(frozen=True)
class UnravelingSpec:
    """Which unraveling to run and how: scheme, step, horizon, ensemble size.

    ``kind`` is "qj", "mu" (general local-oscillator offset, uses ``mu``) or
    "qsd". "mu" with mu = 0 is the jump scheme. ``seed`` is the ensemble
    master seed; trajectory i derives its own stream from (seed, i).
    """

    kind: str
    dt: float = 1e-3
    t_max: float = 10.0
    seed: int = 0
    n_traj: int = 1
    mu: complex = 0.0
    sample_stride: int = 100

    def __post_init__(self):
        if self.kind not in ("qj", "mu", "qsd"):
            raise ValueError(f"kind must be 'qj', 'mu' or 'qsd', got {self.kind!r}")
        if self.dt <= 0 or self.t_max < self.dt:
            raise ValueError("need dt > 0 and t_max >= dt")
        if self.n_traj < 1:
            raise ValueError("n_traj must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")


@dataclass
class TrajectoryRecord:
    """Per-trajectory time series on the fixed sampling grid.

    ``jump_count`` counts detection events for the jump-type schemes and is
    None for diffusion. ``states`` holds the sampled state vectors when the
    ensemble was run with keep_states=True.
    """

    traj_index: int
    times: np.ndarray
    m_z: np.ndarray
    sre_density: np.ndarray | None = None
    entanglement: np.ndarray | None = None
    jump_count: int | None = None
    states: np.ndarray | None = field(default=None, repr=False)


# ----------------------------------------------------------------------
# elementary steps
# ----------------------------------------------------------------------


def _lower(psi: np.ndarray, c: np.ndarray) -> np.ndarray:
    """S- psi in ladder amplitudes: (S- psi)[k] = c[k+1] psi[k+1]."""
    out = np.zeros_like(psi)
    out[:-1] = c[1:] * psi[1:]
    return out


def _sx(psi: np.ndarray, c: np.ndarray) -> np.ndarray:
    out = np.zeros_like(psi)
    out[:-1] = c[1:] * psi[1:]
    out[1:] += c[1:] * psi[:-1]
    return 0.5 * out


def _jump_structure(ops: CollectiveOps, params: ModelParams, mu: complex):
    """State-independent pieces of the shifted jump scheme.

    With L_mu = L + mu the non-Hermitian drift generator collapses to
    H_nH = omega0 Sx - i mu* L - (i/2) L^dag L - (i/2)|mu|^2, every term
    bidiagonal or diagonal.
    """
    js = ops.jump_scale
    c = ops.lower_coef
    ldl_diag = (js * js) * (c * c)  # diagonal of L^dag L
    return c, js, ldl_diag, params.omega0, mu


def _jump_dp(psi, c, js, ldl_diag, mu, dt):
    """dp = <(L+mu)^dag (L+mu)> dt and L psi (reused by drift and jump)."""
    lpsi = js * _lower(psi, c)
    exp_ldl = float(np.vdot(psi, ldl_diag * psi).real)
    exp_l = complex(np.vdot(psi, lpsi))
    dp = dt * (exp_ldl + 2.0 * (np.conj(mu) * exp_l).real + abs(mu) ** 2)
    return dp, lpsi


def _jump_drift(psi, lpsi, c, js, ldl_diag, omega0, mu, dt):
    """First-order no-detection update (1 - i dt H_nH) psi, unnormalized."""
    hpsi = omega0 * _sx(psi, c)
    hpsi = hpsi - 1j * np.conj(mu) * lpsi
    hpsi = hpsi - 0.5j * (ldl_diag * psi)
    hpsi = hpsi - (0.5j * abs(mu) ** 2) * psi
    return psi - 1j * dt * hpsi


def general_mu_step(psi, ops, params, mu, dt, rng):
    """One step of the shifted jump unraveling; returns (psi', jumped).

    Consumes exactly one uniform from rng. Raises StepSizeError when the jump
    probability leaves the first-order regime (dp >= 0.1).
    """
    c, js, ldl_diag, omega0, mu = _jump_structure(ops, params, mu)
    dp, lpsi = _jump_dp(psi, c, js, ldl_diag, mu, dt)
    if dp >= MAX_JUMP_PROB:
        raise StepSizeError(f"jump probability {dp:.3f} >= {MAX_JUMP_PROB}; reduce dt")
    if rng.random() < dp:
        new = lpsi + mu * psi
        norm = np.linalg.norm(new)
        if norm == 0.0:
            raise ImpossibleEventError("jump drawn on a dark state")
        return new / norm, True
    new = _jump_drift(psi, lpsi, c, js, ldl_diag, omega0, mu, dt)
    return new / np.linalg.norm(new), False


def qj_step(psi, ops, params, dt, rng):
    """One photodetection step; identical to general_mu_step with mu = 0."""
    return general_mu_step(psi, ops, params, 0.0, dt, rng)


def qsd_step(psi, ops, params, dt, rng):
    """One Euler-Maruyama step of quantum state diffusion, renormalized.

    Consumes exactly two standard normals (X then Y) from rng.
    """
    c = ops.lower_coef
    js = ops.jump_scale
    ldl_diag = (js * js) * (c * c)
    lpsi = js * _lower(psi, c)
    ell = complex(np.vdot(psi, lpsi))
    x = rng.standard_normal()
    y = rng.standard_normal()
    dw = math.sqrt(dt / 2.0) * (x + 1j * y)
    drift = -1j * params.omega0 * _sx(psi, c)
    drift = drift - 0.5 * (ldl_diag * psi + (abs(ell) ** 2) * psi - 2.0 * np.conj(ell) * lpsi)
    new = psi + dt * drift + dw * (lpsi - ell * psi)
    return new / np.linalg.norm(new)


# ----------------------------------------------------------------------
# ensembles
# ----------------------------------------------------------------------


def resolve_workers() -> int:
    """Worker count from BTC_THREADS (0 or unset = one per CPU)."""
    raw = os.environ.get("BTC_THREADS", "0")
    try:
        val = int(raw)
    except ValueError as exc:
        raise ValueError(f"BTC_THREADS must be an integer, got {raw!r}") from exc
    if val < 0:
        raise ValueError("BTC_THREADS must be >= 0")
    return val if val > 0 else (os.cpu_count() or 1)


def _sample_grid(spec: UnravelingSpec):
    n_steps = int(round(spec.t_max / spec.dt))
    sample_at = np.arange(0, n_steps + 1, spec.sample_stride)
    if sample_at[-1] != n_steps:
        sample_at = np.append(sample_at, n_steps)
    return n_steps, sample_at


def _run_one(spec: UnravelingSpec, params: ModelParams, ops: CollectiveOps,
             psi0: np.ndarray, traj_index: int):
    """Integrate a single trajectory; returns sampled states and jump count."""
    rng = np.random.default_rng([spec.seed, traj_index])
    n_steps, sample_at = _sample_grid(spec)
    snaps = np.empty((len(sample_at), psi0.size), dtype=complex)
    psi = psi0.astype(complex)
    snaps[0] = psi
    jumps = 0
    next_slot = 1
    if spec.kind == "qsd":
        for i in range(1, n_steps + 1):
            psi = qsd_step(psi, ops, params, spec.dt, rng)
            if next_slot < len(sample_at) and i == sample_at[next_slot]:
                snaps[next_slot] = psi
                next_slot += 1
        return snaps, None
    mu = 0.0 if spec.kind == "qj" else complex(spec.mu)
    c, js, ldl_diag, omega0, mu = _jump_structure(ops, params, mu)

    def advance(psi, dt, depth=0):
        # adaptive halving keeps the jump probability in the first-order regime
        nonlocal jumps
        dp, lpsi = _jump_dp(psi, c, js, ldl_diag, mu, dt)
        if dp >= MAX_JUMP_PROB:
            if depth > 40:
                raise StepSizeError("jump probability stays >= 0.1 under halving")
            psi = advance(psi, dt / 2.0, depth + 1)
            return advance(psi, dt / 2.0, depth + 1)
        if rng.random() < dp:
            new = lpsi + mu * psi
            norm = np.linalg.norm(new)
            if norm == 0.0:
                raise ImpossibleEventError("jump drawn on a dark state")
            jumps += 1
            return new / norm
        new = _jump_drift(psi, lpsi, c, js, ldl_diag, omega0, mu, dt)
        return new / np.linalg.norm(new)

    for i in range(1, n_steps + 1):
        psi = advance(psi, spec.dt)
        if next_slot < len(sample_at) and i == sample_at[next_slot]:
            snaps[next_slot] = psi
            next_slot += 1
    return snaps, jumps


def _make_record(spec, params, snaps, jumps, traj_index, record_sre,
                 record_entanglement, keep_states):
    n = params.n_spins
    _, sample_at = _sample_grid(spec)
    times = sample_at * spec.dt
    k = np.arange(n + 1)
    weights = (k - params.spin) / params.spin
    m_z = (np.abs(snaps) ** 2 * weights[None, :]).sum(axis=1)
    sre_density = sre_many(snaps, n) if record_sre else None
    ent = entanglement_entropy_many(snaps, n) if record_entanglement else None
    return TrajectoryRecord(
        traj_index=traj_index,
        times=times,
        m_z=m_z,
        sre_density=sre_density,
        entanglement=ent,
        jump_count=jumps,
        states=snaps if keep_states else None,
    )


def _run_chunk(args):
    (spec, params, psi0, indices, record_sre, record_entanglement,
     keep_states) = args
    ops = build_collective_ops(params)
    out = []
    for idx in indices:
        try:
            snaps, jumps = _run_one(spec, params, ops, psi0, idx)
        except Exception as exc:
            raise RuntimeError(f"trajectory {idx} failed: {exc}") from exc
        out.append(_make_record(spec, params, snaps, jumps, idx, record_sre,
                                record_entanglement, keep_states))
    return out


def run_ensemble(spec: UnravelingSpec, params: ModelParams, psi0: np.ndarray,
                 record_sre: bool = True, record_entanglement: bool = True,
                 keep_states: bool = False) -> list[TrajectoryRecord]:
    """Run the full ensemble; returns records ordered by trajectory index.

    Trajectories are independent and deterministic given (seed, index), so
    the result does not depend on how they are distributed over workers.
    """
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-6:
        raise ValueError("psi0 must be normalized")
    workers = min(resolve_workers(), spec.n_traj)
    indices = list(range(spec.n_traj))
    if workers <= 1:
        records = _run_chunk((spec, params, psi0, indices, record_sre,
                              record_entanglement, keep_states))
    else:
        chunks = [indices[i::workers] for i in range(workers)]
        jobs = [(spec, params, psi0, ch, record_sre, record_entanglement,
                 keep_states) for ch in chunks if ch]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
        records = [rec for part in parts for rec in part]
        records.sort(key=lambda r: r.traj_index)
    return records


def ensemble_mean_projector(records: list[TrajectoryRecord], time_index: int) -> np.ndarray:
    """(1/M) sum_i |psi_i><psi_i| at one sampling slot (needs keep_states)."""
    if any(r.states is None for r in records):
        raise ValueError("records were collected without keep_states=True")
    dim = records[0].states.shape[1]
    acc = np.zeros((dim, dim), dtype=complex)
    for rec in records:
        psi = rec.states[time_index]
        acc += np.outer(psi, psi.conj())
    return acc / len(records)
