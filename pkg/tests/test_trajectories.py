import math
import os

import numpy as np
import pytest

from btcsim import (
    LindbladRun,
    ModelParams,
    StepSizeError,
    UnravelingSpec,
    build_collective_ops,
    ensemble_mean_projector,
    evolve_lindblad,
    fully_polarized,
    general_mu_step,
    magnetization,
    pure_to_density,
    qj_step,
    qsd_step,
    run_ensemble,
    trace_distance,
)


class ZeroNoise:
    """rng stub: no jumps, no diffusion."""

    def random(self):
        return 1.0  # never below dp

    def standard_normal(self):
        return 0.0


def params_for(n, omega=0.0):
    return ModelParams(n_spins=n, omega0=omega)


# ----------------------------------------------------------------------
# single steps
# ----------------------------------------------------------------------


def test_qj_dark_state_stationary():
    params = params_for(5)
    ops = build_collective_ops(params)
    dark = fully_polarized(5, "down")
    rng = np.random.default_rng(0)
    for _ in range(50):
        psi, jumped = qj_step(dark, ops, params, 1e-3, rng)
        assert not jumped
        assert np.allclose(psi, dark)


def test_qj_jump_probability_fully_up():
    # <L^dag L> on the fully polarized state is 2 kappa, so dp = 2 kappa dt
    n, dt = 8, 1e-3
    params = params_for(n)
    ops = build_collective_ops(params)
    psi = fully_polarized(n, "up")
    draws = 200_000
    rng = np.random.default_rng(1)
    jumps = sum(qj_step(psi, ops, params, dt, rng)[1] for _ in range(draws))
    dp = 2 * params.kappa * dt
    sigma = math.sqrt(draws * dp * (1 - dp))
    assert abs(jumps - draws * dp) < 4 * sigma


def test_qj_step_size_error():
    # the half-filled Dicke state has <L^dag L> ~ kappa S
    n = 40
    params = params_for(n)
    ops = build_collective_ops(params)
    psi = np.zeros(n + 1, dtype=complex)
    psi[n // 2] = 1.0
    with pytest.raises(StepSizeError):
        qj_step(psi, ops, params, 0.01, np.random.default_rng(0))


def test_two_level_jump_statistics():
    # N=1, omega0=0: survival of the up state is exp(-2 kappa t)
    n, dt, t_max = 1, 1e-3, 1.5
    spec = UnravelingSpec(kind="qj", dt=dt, t_max=t_max, seed=7, n_traj=600,
                          sample_stride=300)
    records = run_ensemble(spec, params_for(1), fully_polarized(1, "up"),
                           record_sre=False, record_entanglement=False)
    mz = np.stack([r.m_z for r in records])
    times = records[0].times
    expected = 2 * np.exp(-2 * times) - 1
    mean = mz.mean(axis=0)
    stderr = mz.std(axis=0, ddof=0) / math.sqrt(len(records))
    assert np.all(np.abs(mean - expected) <= 3 * stderr + 5e-3)


def test_general_mu_zero_is_qj_bit_identical():
    n = 6
    params = params_for(n, omega=2.0)
    ops = build_collective_ops(params)
    psi1 = fully_polarized(n, "up")
    psi2 = psi1.copy()
    r1 = np.random.default_rng(123)
    r2 = np.random.default_rng(123)
    jumps = 0
    for _ in range(2000):
        psi1, j1 = qj_step(psi1, ops, params, 1e-3, r1)
        psi2, j2 = general_mu_step(psi2, ops, params, 0.0, 1e-3, r2)
        assert j1 == j2
        assert np.array_equal(psi1, psi2)
        jumps += j1
    assert jumps > 0  # both branches exercised


def test_mu_jump_probability_on_dark_state():
    # only the offset contributes: dp = |mu|^2 dt
    n, dt, mu = 5, 1e-3, 2.0
    params = params_for(n)
    ops = build_collective_ops(params)
    dark = fully_polarized(n, "down")
    draws = 100_000
    rng = np.random.default_rng(3)
    jumps = 0
    for _ in range(draws):
        psi, jumped = general_mu_step(dark, ops, params, mu, dt, rng)
        jumps += jumped
        if jumped:  # jump through the offset leaves the dark state unchanged
            assert np.allclose(psi, dark)
    dp = abs(mu) ** 2 * dt
    sigma = math.sqrt(draws * dp * (1 - dp))
    assert abs(jumps - draws * dp) < 4 * sigma


def test_qsd_dark_state_stationary():
    params = params_for(4)
    ops = build_collective_ops(params)
    dark = fully_polarized(4, "down")
    psi = qsd_step(dark, ops, params, 1e-3, np.random.default_rng(0))
    assert np.allclose(psi, dark, atol=1e-15)


def test_qsd_zero_noise_is_deterministic_drift():
    n, dt = 6, 1e-3
    params = params_for(n, omega=1.5)
    ops = build_collective_ops(params)
    rng = np.random.default_rng(9)
    psi = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
    psi /= np.linalg.norm(psi)
    got = qsd_step(psi, ops, params, dt, ZeroNoise())
    # hand-built drift of the diffusive scheme
    L = ops.jump
    lpsi = L @ psi
    ell = np.vdot(psi, lpsi)
    drift = (-1j * params.omega0 * (ops.sx @ psi)
             - 0.5 * ((L.conj().T @ L) @ psi + abs(ell) ** 2 * psi - 2 * np.conj(ell) * lpsi))
    expected = psi + dt * drift
    expected /= np.linalg.norm(expected)
    assert np.allclose(got, expected, atol=1e-13)


def test_qsd_zero_noise_norm_drift_on_jump_eigenstate():
    # on a state annihilated by L the noise-free norm change is second order
    params = params_for(4, omega=2.0)
    ops = build_collective_ops(params)
    dark = fully_polarized(4, "down")
    for dt in (1e-2, 1e-3):
        lpsi = ops.jump @ dark
        ell = np.vdot(dark, lpsi)
        drift = (-1j * params.omega0 * (ops.sx @ dark)
                 - 0.5 * ((ops.jump.conj().T @ ops.jump) @ dark
                          + abs(ell) ** 2 * dark - 2 * np.conj(ell) * lpsi))
        norm = np.linalg.norm(dark + dt * drift)
        assert abs(norm - 1.0) < 2 * (params.omega0 * dt) ** 2


def test_steps_preserve_norm():
    n = 10
    params = params_for(n, omega=2.0)
    ops = build_collective_ops(params)
    rng = np.random.default_rng(11)
    psi = fully_polarized(n, "up")
    for _ in range(200):
        psi, _ = qj_step(psi, ops, params, 1e-3, rng)
        assert abs(np.linalg.norm(psi) - 1.0) < 1e-10
    for _ in range(200):
        psi = qsd_step(psi, ops, params, 1e-3, rng)
        assert abs(np.linalg.norm(psi) - 1.0) < 1e-10


# ----------------------------------------------------------------------
# ensembles
# ----------------------------------------------------------------------


def test_single_trajectory_ensemble():
    spec = UnravelingSpec(kind="qj", dt=1e-3, t_max=0.5, seed=5, n_traj=1,
                          sample_stride=100)
    records = run_ensemble(spec, params_for(4, 2.0), fully_polarized(4, "up"))
    assert len(records) == 1
    rec = records[0]
    assert rec.traj_index == 0
    assert rec.times[0] == 0.0 and rec.times[-1] == pytest.approx(0.5)
    assert len(rec.times) == len(rec.m_z) == len(rec.sre_density) == len(rec.entanglement)
    assert rec.jump_count is not None


def test_ensemble_deterministic_and_worker_independent():
    spec = UnravelingSpec(kind="qsd", dt=1e-3, t_max=0.3, seed=21, n_traj=6,
                          sample_stride=100)
    psi0 = fully_polarized(5, "up")
    env = os.environ
    old = env.get("BTC_THREADS")
    try:
        env["BTC_THREADS"] = "1"
        serial = run_ensemble(spec, params_for(5, 2.0), psi0, keep_states=True)
        env["BTC_THREADS"] = "2"
        parallel = run_ensemble(spec, params_for(5, 2.0), psi0, keep_states=True)
    finally:
        if old is None:
            env.pop("BTC_THREADS", None)
        else:
            env["BTC_THREADS"] = old
    assert [r.traj_index for r in serial] == [r.traj_index for r in parallel] == list(range(6))
    for a, b in zip(serial, parallel):
        assert np.array_equal(a.states, b.states)
        assert np.array_equal(a.m_z, b.m_z)


def test_qj_ensemble_mu0_identical():
    base = dict(dt=1e-3, t_max=0.4, seed=17, n_traj=4, sample_stride=100)
    psi0 = fully_polarized(6, "up")
    qj = run_ensemble(UnravelingSpec(kind="qj", **base), params_for(6, 2.0), psi0,
                      keep_states=True)
    mu0 = run_ensemble(UnravelingSpec(kind="mu", mu=0.0, **base), params_for(6, 2.0),
                       psi0, keep_states=True)
    for a, b in zip(qj, mu0):
        assert np.array_equal(a.states, b.states)
        assert a.jump_count == b.jump_count


@pytest.mark.parametrize("kind,mu", [("qj", 0.0), ("mu", 2.0), ("qsd", 0.0)])
def test_ensemble_mean_tracks_lindblad(kind, mu):
    n, omega, t_max, m = 6, 2.0, 2.0, 400
    params = params_for(n, omega)
    spec = UnravelingSpec(kind=kind, mu=mu, dt=1e-3, t_max=t_max, seed=33,
                          n_traj=m, sample_stride=500)
    psi0 = fully_polarized(n, "up")
    records = run_ensemble(spec, params, psi0, record_sre=False,
                           record_entanglement=False, keep_states=True)
    run = LindbladRun(params=params, dt=1e-3, t_max=t_max, sample_stride=500)
    times, rhos = evolve_lindblad(run, pure_to_density(psi0))
    ops = build_collective_ops(params)
    mz_lind = np.array([magnetization(r, ops)[2] for r in rhos])
    mz = np.stack([r.m_z for r in records])
    mean = mz.mean(axis=0)
    stderr = mz.std(axis=0, ddof=0) / math.sqrt(m)
    assert np.all(np.abs(mean - mz_lind) <= 3 * stderr + 5e-3)
    # ensemble-averaged projector approximates the density matrix
    for j in (len(times) // 2, len(times) - 1):
        proj = ensemble_mean_projector(records, j)
        assert trace_distance(proj, rhos[j]) <= 5 / math.sqrt(m)


def test_jump_counter_matches_lindblad_rate():
    # mean number of detections over [0, T] is the integral of <L^dag L>
    n, t_max, m = 10, 3.0, 300
    params = params_for(n, 2.0)
    spec = UnravelingSpec(kind="qj", dt=1e-3, t_max=t_max, seed=2, n_traj=m,
                          sample_stride=50)
    records = run_ensemble(spec, params, fully_polarized(n, "up"),
                           record_sre=False, record_entanglement=False)
    counts = np.array([r.jump_count for r in records], dtype=float)
    run = LindbladRun(params=params, dt=1e-3, t_max=t_max, sample_stride=50)
    times, rhos = evolve_lindblad(run, pure_to_density(fully_polarized(n, "up")))
    ops = build_collective_ops(params)
    ldl = ops.jump.conj().T @ ops.jump
    rate = np.array([np.trace(ldl @ r).real for r in rhos])
    expected = np.trapezoid(rate, times)
    assert abs(counts.mean() - expected) / expected < 0.05


def test_spec_validation():
    with pytest.raises(ValueError):
        UnravelingSpec(kind="homodyne")
    with pytest.raises(ValueError):
        UnravelingSpec(kind="qj", n_traj=0)
    with pytest.raises(ValueError):
        UnravelingSpec(kind="qj", seed=-1)
    with pytest.raises(ValueError):
        run_ensemble(UnravelingSpec(kind="qj"), params_for(2),
                     2.0 * fully_polarized(2, "up"))
