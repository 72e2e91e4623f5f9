import numpy as np
import pytest

from btcsim import ensemble_statistics, histogram_density
from btcsim.trajectories import TrajectoryRecord


def make_record(idx, values, times=None):
    times = np.array([0.0, 1.0, 2.0]) if times is None else times
    return TrajectoryRecord(
        traj_index=idx,
        times=times,
        m_z=np.asarray(values, dtype=float),
        sre_density=None,
        entanglement=None,
    )


def test_identical_records_degenerate():
    records = [make_record(i, [0.5, 0.25, -0.125]) for i in range(10)]
    mean, stderr, hist = ensemble_statistics(records, "m_z", 1.0, bins=10)
    assert mean == 0.25
    assert stderr == 0.0
    occupied = hist.densities > 0
    assert occupied.sum() == 1  # single occupied bin
    widths = np.diff(hist.bin_edges)
    assert (hist.densities * widths).sum() == pytest.approx(1.0, abs=1e-9)


def test_histogram_normalization():
    rng = np.random.default_rng(0)
    vals = rng.normal(size=5000)
    hist = histogram_density(vals, bins=100)
    widths = np.diff(hist.bin_edges)
    assert (hist.densities * widths).sum() == pytest.approx(1.0, abs=1e-9)
    assert len(hist.bin_edges) == 101
    assert len(hist.densities) == 100


def test_shared_edges():
    rng = np.random.default_rng(1)
    a = rng.normal(size=1000)
    b = rng.normal(size=1000) + 0.1
    edges = np.linspace(-5, 5, 51)
    ha = histogram_density(a, edges=edges)
    hb = histogram_density(b, edges=edges)
    assert np.array_equal(ha.bin_edges, hb.bin_edges)


def test_statistics_mean_and_error():
    rng = np.random.default_rng(2)
    vals = rng.normal(size=400)
    records = [make_record(i, [v, v, v]) for i, v in enumerate(vals)]
    mean, stderr, _ = ensemble_statistics(records, "m_z", 2.0)
    assert mean == pytest.approx(vals.mean())
    assert stderr == pytest.approx(vals.std(ddof=0) / 20.0)


def test_statistics_errors():
    records = [make_record(0, [1, 2, 3])]
    with pytest.raises(ValueError):
        ensemble_statistics(records, "m_z", 1.0)
    records.append(make_record(1, [1, 2, 3]))
    with pytest.raises(ValueError):
        ensemble_statistics(records, "m_z", 0.5)  # off the grid
    with pytest.raises(ValueError):
        ensemble_statistics(records, "energy", 1.0)
    with pytest.raises(ValueError):
        ensemble_statistics(records, "sre_density", 1.0)  # not recorded
