"""Monitored trajectories against the averaged master equation.

    python demos/03_trajectories_vs_lindblad.py [outdir]

A small ensemble in the oscillatory phase: single trajectories keep
oscillating (and keep a finite stabilizer entropy density) while the
Lindblad-averaged state damps out and loses purity; the ensemble mean of any
observable still reproduces the master equation. Entanglement depends on the
measurement scheme, the entropy density essentially does not.
"""

import math
import sys
from pathlib import Path

import numpy as np

from btcsim import (
    LindbladRun,
    ModelParams,
    UnravelingSpec,
    build_collective_ops,
    evolve_lindblad,
    fully_polarized,
    magnetization,
    pure_to_density,
    purity,
    run_ensemble,
    sre,
)

outdir = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
outdir.mkdir(parents=True, exist_ok=True)

n, omega, t_max, m_traj = 16, 2.0, 10.0, 64
params = ModelParams(n_spins=n, omega0=omega)
psi0 = fully_polarized(n, "up")

# master equation reference
run = LindbladRun(params=params, dt=1e-3, t_max=t_max, sample_stride=100)
times, rhos = evolve_lindblad(run, pure_to_density(psi0))
ops = build_collective_ops(params)
mz_avg = np.array([magnetization(r, ops)[2] for r in rhos])
m2_avg = np.array([sre(r, n).m2_density for r in rhos])
pur = np.array([purity(r) for r in rhos])
print(f"Lindblad at kt={t_max}: m_z={mz_avg[-1]:+.3f}, purity={pur[-1]:.3f}, "
      f"m2 density={m2_avg[-1]:.4f}")

rows = [times, mz_avg, m2_avg, pur]
header = ["t", "lindblad_m_z", "lindblad_m2", "lindblad_purity"]

for kind in ("qj", "qsd"):
    spec = UnravelingSpec(kind=kind, dt=1e-3, t_max=t_max, seed=11,
                          n_traj=m_traj, sample_stride=100)
    records = run_ensemble(spec, params, psi0)
    mz = np.stack([r.m_z for r in records])
    m2 = np.stack([r.sre_density for r in records])
    ent = np.stack([r.entanglement for r in records])
    err = mz.std(axis=0, ddof=0) / math.sqrt(m_traj)
    worst = np.abs(mz.mean(axis=0) - mz_avg)[1:] / np.maximum(err[1:], 1e-12)
    print(f"{kind}: ensemble m_z within {worst.max():.1f} standard errors of the "
          f"master equation; mean m2={m2.mean(axis=0)[-1]:.4f}, "
          f"mean entanglement={ent.mean(axis=0)[-1]:.4f}")
    rows += [mz.mean(axis=0), m2.mean(axis=0), ent.mean(axis=0), mz[0], m2[0]]
    header += [f"{kind}_mz_mean", f"{kind}_m2_mean", f"{kind}_ent_mean",
               f"{kind}_mz_traj0", f"{kind}_m2_traj0"]

np.savetxt(outdir / "trajectories_vs_lindblad.csv", np.column_stack(rows),
           delimiter=",", header=",".join(header), comments="")
print(f"wrote {outdir / 'trajectories_vs_lindblad.csv'}")
