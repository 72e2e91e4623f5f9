"""Ensemble statistics over trajectory records: means, standard errors,
probability-density histograms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .trajectories import TrajectoryRecord

QUANTITIES = ("m_z", "sre_density", "entanglement")


@dataclass(frozen=True)
class HistogramResult:
    """Probability-density histogram: edges (bins+1) and densities (bins),
    normalized so that sum(density * width) = 1."""

    bin_edges: np.ndarray
    densities: np.ndarray


def collect_at_time(records: list[TrajectoryRecord], quantity: str, time: float) -> np.ndarray:
    """Per-trajectory values of one recorded quantity at a grid time."""
    if quantity not in QUANTITIES:
        raise ValueError(f"quantity must be one of {QUANTITIES}, got {quantity!r}")
    times = records[0].times
    hits = np.flatnonzero(np.isclose(times, time, rtol=0.0, atol=1e-9))
    if hits.size == 0:
        raise ValueError(f"time {time} is not on the sampling grid")
    idx = int(hits[0])
    vals = []
    for rec in records:
        arr = getattr(rec, quantity)
        if arr is None:
            raise ValueError(f"records do not carry {quantity!r}")
        vals.append(arr[idx])
    return np.asarray(vals, dtype=float)


def histogram_density(values: np.ndarray, bins: int = 100,
                      edges: np.ndarray | None = None) -> HistogramResult:
    """Probability-density histogram; shared ``edges`` may be passed to make
    several ensembles comparable bin by bin."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if edges is None:
        lo, hi = float(values.min()), float(values.max())
        if lo == hi:  # single occupied bin of unit mass
            lo, hi = lo - 0.5, hi + 0.5
        edges = np.linspace(lo, hi, bins + 1)
    dens, edges = np.histogram(values, bins=edges, density=True)
    return HistogramResult(bin_edges=edges, densities=dens)


def ensemble_statistics(records: list[TrajectoryRecord], quantity: str,
                        time: float, bins: int = 100):
    """(mean, standard error, histogram) of a quantity across the ensemble
    at one sampled time. Standard error is std / sqrt(M)."""
    if len(records) < 2:
        raise ValueError("need at least 2 trajectories")
    vals = collect_at_time(records, quantity, time)
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=0) / math.sqrt(vals.size))
    return mean, stderr, histogram_density(vals, bins=bins)
