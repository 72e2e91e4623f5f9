import math

import numpy as np
import pytest

from btcsim import (
    ModelParams,
    evolve_mf,
    fit_saturation,
    mf_fixed_point,
    mf_fixed_point_magic,
    mf_magic_density,
    mf_rhs,
    orbit_average_magic,
    orbit_average_sweep,
    sample_initial_bloch,
    saturation_law,
    solid_angle_limit,
)
from btcsim.meanfield import _rk4_step

T_STATE_M2 = 2 * math.log(2) - math.log(3)


def params(omega, kappa=1.0):
    return ModelParams(n_spins=1, omega0=omega * kappa, kappa=kappa)


# ----------------------------------------------------------------------
# flow and fixed points
# ----------------------------------------------------------------------


def test_rhs_fixed_points():
    assert np.allclose(mf_rhs(np.array([0.0, 0.0, -1.0]), params(0.0)), 0.0)
    om = 0.5
    fp = np.array([0.0, om, -math.sqrt(1 - om**2)])
    assert np.abs(mf_rhs(fp, params(om))).max() < 1e-15
    om = 2.0
    fp = np.array([math.sqrt(1 - om**-2), 1 / om, 0.0])
    assert np.abs(mf_rhs(fp, params(om))).max() < 1e-15


def test_norm_is_conserved_algebraically():
    rng = np.random.default_rng(0)
    for _ in range(20):
        m = rng.normal(size=3)
        d = mf_rhs(m, params(rng.uniform(0, 3)))
        assert abs(2 * m @ d) < 1e-12 * max(1.0, (m @ m) ** 1.5)


def test_fixed_point_constructor():
    fp = mf_fixed_point(params(0.5), branch=+1)
    assert np.allclose(fp, [0.0, 0.5, math.sqrt(0.75)])
    fp = mf_fixed_point(params(0.5), branch=-1)
    assert fp[2] == pytest.approx(-0.8660254, abs=1e-7)
    fp = mf_fixed_point(params(2.0), branch=+1)
    assert np.allclose(fp, [math.sqrt(0.75), 0.5, 0.0])
    assert fp[0] == pytest.approx(0.8660254, abs=1e-7)
    # branch formulas meet continuously at the critical drive
    lo = mf_fixed_point(params(1.0 - 1e-12), branch=+1)
    hi = mf_fixed_point(params(1.0), branch=+1)
    assert np.allclose(lo, hi, atol=1e-5)
    assert np.allclose(hi, [0.0, 1.0, 0.0])
    for om in (0.2, 0.9, 1.0, 1.7, 4.0):
        for branch in (+1, -1):
            assert np.abs(mf_rhs(mf_fixed_point(params(om), branch), params(om))).max() < 1e-14


def test_evolve_to_magnetized_fixed_point():
    t, traj = evolve_mf([0.0, 0.0, 1.0], params(0.5), t_max=60.0)
    assert np.allclose(traj[-1], [0.0, 0.5, -math.sqrt(0.75)], atol=1e-8)


def test_evolve_oscillates_above_threshold():
    t, traj = evolve_mf([0.0, 0.0, 1.0], params(2.0), t_max=200.0, sample_stride=10)
    late = traj[t > 100.0]
    assert late[:, 2].max() - late[:, 2].min() > 0.5  # persistent oscillations
    norms = np.linalg.norm(traj, axis=1)
    assert np.abs(norms - 1.0).max() < 1e-8


def test_norm_drift_long_run():
    # worst case: fast oscillations at strong drive over kappa t = 1000
    m = sample_initial_bloch(4, np.random.default_rng(8))
    m0 = m.copy()
    for _ in range(1_000_000):
        m = _rk4_step(m, 8.0, 1.0, 1e-3)
    drift = np.abs(np.linalg.norm(m, axis=1) - np.linalg.norm(m0, axis=1)).max()
    assert drift < 1e-8


def test_bdf_agrees_with_rk4_on_smooth_case():
    t1, a = evolve_mf([0.6, 0.0, 0.8], params(0.5), t_max=50.0, method="rk4")
    t2, b = evolve_mf([0.6, 0.0, 0.8], params(0.5), t_max=50.0, method="bdf")
    assert np.allclose(t1, t2)
    assert np.abs(a - b).max() < 1e-6


def test_evolve_rejects_bad_input():
    with pytest.raises(ValueError):
        evolve_mf([1.1, 0.0, 0.3], params(1.0), t_max=1.0)
    with pytest.raises(ValueError):
        evolve_mf([0.0, 0.0, 1.0], params(1.0), t_max=1.0, method="rk5")


# ----------------------------------------------------------------------
# entropy density formulas
# ----------------------------------------------------------------------


def test_magic_density_values():
    assert mf_magic_density([0.0, 0.0, 1.0]) == pytest.approx(0.0, abs=1e-15)
    assert mf_magic_density([math.sqrt(0.5), math.sqrt(0.5), 0.0]) == pytest.approx(
        T_STATE_M2, abs=1e-12
    )
    with pytest.warns(UserWarning):
        mf_magic_density([0.5, 0.0, 0.0])


def test_fixed_point_magic_values():
    assert mf_fixed_point_magic(1 / math.sqrt(2)) == pytest.approx(T_STATE_M2, abs=1e-12)
    assert mf_fixed_point_magic(math.sqrt(2)) == pytest.approx(T_STATE_M2, abs=1e-12)
    assert mf_fixed_point_magic(0.0) == 0.0
    assert mf_fixed_point_magic(1.0) == pytest.approx(0.0, abs=1e-15)


def test_fixed_point_magic_matches_density_formula():
    for om in np.linspace(0.01, 4.0, 100):
        direct = mf_magic_density(mf_fixed_point(params(om)))
        assert direct == pytest.approx(mf_fixed_point_magic(om), abs=1e-12)


def test_cusp_derivative_jump():
    eps = 1e-6
    left = (mf_fixed_point_magic(1.0) - mf_fixed_point_magic(1.0 - eps)) / eps
    right = (mf_fixed_point_magic(1.0 + eps) - mf_fixed_point_magic(1.0)) / eps
    assert right - left == pytest.approx(4.0, abs=1e-3)


# ----------------------------------------------------------------------
# orbit averages and the large-drive limit
# ----------------------------------------------------------------------


def test_orbit_average_magnetized_phase():
    mean, err = orbit_average_magic(params(0.5), n_avg=50, tau=120.0, rng=1)
    assert mean == pytest.approx(mf_fixed_point_magic(0.5), abs=max(3 * err, 1e-6))


def test_orbit_average_btc_phase_exceeds_fixed_point():
    mean, err = orbit_average_magic(params(3.0), n_avg=60, tau=150.0, rng=2)
    assert mean > mf_fixed_point_magic(3.0) + 3 * err


def test_orbit_average_large_drive_approaches_sphere_average():
    mean, err = orbit_average_magic(params(50.0), n_avg=80, tau=120.0, rng=3)
    assert mean == pytest.approx(0.229, abs=0.005)


def test_orbit_sweep_matches_pointwise():
    means, errs = orbit_average_sweep([0.5, 2.0], n_avg=40, tau=110.0, seed=5)
    m0, _ = orbit_average_magic(params(0.5), n_avg=40, tau=110.0, rng=np.random.default_rng([5, 0]))
    assert means[0] == pytest.approx(m0, abs=1e-12)
    assert means.shape == errs.shape == (2,)


def test_samplers():
    rng = np.random.default_rng(0)
    m = sample_initial_bloch(500, rng, "solid-angle")
    assert np.abs(np.linalg.norm(m, axis=1) - 1).max() < 1e-12
    assert abs(m[:, 2].mean()) < 0.15  # symmetric about the equator
    with pytest.raises(ValueError):
        sample_initial_bloch(5, rng, "surface")


def test_solid_angle_limit():
    val = solid_angle_limit(128)
    assert val == pytest.approx(0.229, abs=1e-3)
    assert solid_angle_limit(64) == pytest.approx(val, abs=1e-6)
    with pytest.raises(ValueError):
        solid_angle_limit(32)
    # integrand endpoints: pole is a stabilizer direction, diagonal is the
    # T-state direction
    assert mf_magic_density([0.0, 0.0, 1.0]) == 0.0
    assert mf_magic_density([math.sqrt(0.5), math.sqrt(0.5), 0.0]) == pytest.approx(
        T_STATE_M2, abs=1e-12
    )


# ----------------------------------------------------------------------
# saturation fit
# ----------------------------------------------------------------------


def test_fit_exact_model_recovery():
    om = np.linspace(1.2, 10.0, 25)
    m2 = saturation_law(om - 1.0, 0.232, 0.77, 0.11)
    fit = fit_saturation(np.stack([om, m2], axis=1))
    assert fit.m2_sat == pytest.approx(0.232, abs=1e-6)
    assert fit.alpha == pytest.approx(0.77, abs=1e-6)
    assert fit.a == pytest.approx(0.11, abs=1e-6)
    assert fit.residual < 1e-12


def test_fit_validation():
    with pytest.raises(ValueError):
        fit_saturation([[2.0, 0.1]] * 4)
    pts = np.stack([np.linspace(0.5, 5, 10), np.full(10, 0.2)], axis=1)
    with pytest.raises(ValueError):
        fit_saturation(pts)
