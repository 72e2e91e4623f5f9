"""Command-line driver: every simulation pipeline behind one executable.

Each subcommand runs one experiment and writes CSV artifacts (header row,
numeric cells with 17 significant digits, LF line endings) plus a metadata
sidecar ``<output>.meta`` with key=value lines recording the full resolved
configuration, the seed and the package version. Re-running with the same
configuration and seed reproduces the CSV byte for byte, whatever the value
of BTC_THREADS; only the sidecar timestamp changes.

Options may come from flags or from a plain key=value file passed with
--config; flags override the file. Exit codes: 1 for configuration errors,
2 for computation errors, 3 for I/O errors.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .core import ModelParams, build_collective_ops, fully_polarized, magnetization, purity, pure_to_density
from .lindblad import LindbladRun, evolve_lindblad, steady_state
from .magic import sre
from .meanfield import (
    evolve_mf,
    fit_saturation,
    mf_fixed_point_magic,
    orbit_average_sweep,
    solid_angle_limit,
)
from .stats import collect_at_time, histogram_density
from .trajectories import TrajectoryRecord, UnravelingSpec, run_ensemble

EXPERIMENTS = (
    "meanfield-dynamics",
    "meanfield-sweep",
    "lindblad-dynamics",
    "lindblad-sweep",
    "trajectory-ensemble",
    "unraveling-compare",
    "histogram",
    "fit-saturation",
    "solid-angle",
)


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    """One fully resolved experiment: name plus validated option values."""

    experiment: str
    options: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.options[key]


# ----------------------------------------------------------------------
# option plumbing
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class _Opt:
    name: str
    type: type
    default: object = None
    required: bool = False
    help: str = ""


_MODEL_OPTS = [
    _Opt("n", int, required=True, help="number of spins N"),
    _Opt("omega", float, required=True, help="drive omega0 in units of kappa"),
    _Opt("kappa", float, 1.0, help="decay rate (time unit)"),
]

_TRAJ_OPTS = [
    _Opt("traj", int, 500, help="ensemble size M"),
    _Opt("seed", int, 0, help="master seed"),
    _Opt("dt", float, 1e-3, help="integration step"),
    _Opt("t-max", float, 10.0, help="final time"),
    _Opt("stride", int, 100, help="steps between recorded samples"),
    _Opt("initial", str, "up", help="initial polarization, up or down"),
]

_COMMAND_OPTS = {
    "meanfield-dynamics": [
        _Opt("omega", float, required=True),
        _Opt("kappa", float, 1.0),
        _Opt("t-max", float, 50.0),
        _Opt("dt", float, 1e-3),
        _Opt("stride", int, 100),
        _Opt("m0", str, "0,0,1", help="initial Bloch vector"),
    ],
    "meanfield-sweep": [
        _Opt("omega-grid", str, required=True, help="comma list or start:stop:n"),
        _Opt("kappa", float, 1.0),
        _Opt("n-avg", int, 200, help="initial conditions per drive"),
        _Opt("tau", float, 400.0, help="orbit horizon"),
        _Opt("seed", int, 0),
        _Opt("dt", float, 1e-3),
        _Opt("sampler", str, "solid-angle"),
    ],
    "lindblad-dynamics": _MODEL_OPTS + [
        _Opt("t-max", float, 20.0),
        _Opt("dt", float, 1e-3),
        _Opt("stride", int, 100),
        _Opt("initial", str, "up"),
    ],
    "lindblad-sweep": [
        _Opt("n", int, required=True),
        _Opt("omega-grid", str, required=True),
        _Opt("kappa", float, 1.0),
        _Opt("t-max", float, 400.0),
        _Opt("dt", float, 1e-3),
        _Opt("initial", str, "up"),
    ],
    "trajectory-ensemble": _MODEL_OPTS + _TRAJ_OPTS + [
        _Opt("unraveling", str, "qj", help="qj, mu or qsd"),
        _Opt("mu", float, 2.0, help="local-oscillator offset for kind mu"),
    ],
    "unraveling-compare": _MODEL_OPTS + _TRAJ_OPTS + [
        _Opt("mu", float, 2.0),
    ],
    "histogram": _MODEL_OPTS + [
        _Opt("traj", int, 500),
        _Opt("seed", int, 0),
        _Opt("dt", float, 1e-3),
        _Opt("time", float, 8.0, help="sampling time"),
        _Opt("bins", int, 100),
        _Opt("unravelings", str, "qj,qsd"),
        _Opt("mu", float, 2.0),
        _Opt("initial", str, "up"),
    ],
    "fit-saturation": [
        _Opt("input", str, required=True, help="CSV from meanfield-sweep"),
    ],
    "solid-angle": [
        _Opt("resolution", int, 128),
    ],
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); keep exit codes ours
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="btcsim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"btcsim {__version__}")
    sub = parser.add_subparsers(dest="experiment", metavar="EXPERIMENT")
    for name in EXPERIMENTS:
        p = sub.add_parser(name, description=f"run the {name} pipeline")
        p.add_argument("--config", type=str, default=None,
                       help="key=value file with defaults for this command")
        p.add_argument("--output", type=str, default=None, help="output CSV path")
        for opt in _COMMAND_OPTS[name]:
            p.add_argument(f"--{opt.name}", type=str, default=None, help=opt.help)
    return parser


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path) as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{line_no}: expected key=value")
                key, _, val = line.partition("=")
                values[key.strip().replace("-", "_")] = val.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


def _coerce(opt: _Opt, raw: str):
    try:
        if opt.type is int:
            return int(raw)
        if opt.type is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"--{opt.name}: {exc}") from exc


def build_config(argv) -> ExperimentConfig:
    """Parse flags (and optional config file) into a validated config."""
    args = _build_parser().parse_args(argv)
    if args.experiment is None:
        raise ConfigError("an experiment subcommand is required")
    file_vals = _read_config_file(args.config) if args.config else {}
    options = {}
    for opt in _COMMAND_OPTS[args.experiment]:
        attr = opt.name.replace("-", "_")
        raw = getattr(args, attr)
        if raw is None:
            raw = file_vals.get(attr)
        if raw is None:
            if opt.required:
                raise ConfigError(f"--{opt.name} is required for {args.experiment}")
            options[attr] = opt.default
        else:
            options[attr] = _coerce(opt, str(raw))
    output = args.output if args.output is not None else file_vals.get("output")
    if output is None:
        raise ConfigError("--output is required")
    options["output"] = output
    cfg = ExperimentConfig(experiment=args.experiment, options=options)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig):
    o = cfg.options
    if o.get("bins") is not None and o["bins"] < 1:
        raise ConfigError("--bins must be >= 1")
    for key in ("n", "traj", "stride", "n_avg"):
        if o.get(key) is not None and o[key] < 1:
            raise ConfigError(f"--{key.replace('_', '-')} must be >= 1")
    for key in ("dt", "t_max", "kappa", "tau"):
        if o.get(key) is not None and o[key] <= 0:
            raise ConfigError(f"--{key.replace('_', '-')} must be > 0")
    if o.get("initial") is not None and o["initial"] not in ("up", "down"):
        raise ConfigError("--initial must be 'up' or 'down'")
    if o.get("unraveling") is not None and o["unraveling"] not in ("qj", "mu", "qsd"):
        raise ConfigError("--unraveling must be qj, mu or qsd")
    if o.get("sampler") is not None and o["sampler"] not in ("uniform-angles", "solid-angle"):
        raise ConfigError("--sampler must be uniform-angles or solid-angle")
    if o.get("omega_grid") is not None:
        _parse_grid(o["omega_grid"])


def _parse_grid(text: str) -> np.ndarray:
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return np.linspace(float(a), float(b), int(n))
        return np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from exc


# ----------------------------------------------------------------------
# serialization
# ----------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: str, header: list[str], columns: list[np.ndarray]):
    rows = len(columns[0])
    for col in columns:
        if len(col) != rows:
            raise ValueError("column lengths differ")
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(rows):
            fh.write(",".join(_fmt(col[i]) for col in columns) + "\n")


def write_meta(path: str, cfg: ExperimentConfig):
    with open(path, "w", newline="\n") as fh:
        fh.write(f"experiment={cfg.experiment}\n")
        for key in sorted(cfg.options):
            fh.write(f"{key}={cfg.options[key]}\n")
        fh.write(f"version={__version__}\n")
        fh.write(f"timestamp={time.strftime('%Y-%m-%dT%H:%M:%S%z')}\n")


# ----------------------------------------------------------------------
# experiment implementations
# ----------------------------------------------------------------------


def _m2_density_of_rows(traj: np.ndarray) -> np.ndarray:
    return -np.log((1.0 + (traj**4).sum(axis=1)) / 2.0)


def _run_meanfield_dynamics(cfg):
    o = cfg.options
    try:
        m0 = np.array([float(x) for x in o["m0"].split(",")])
        if m0.shape != (3,):
            raise ValueError("need three components")
    except ValueError as exc:
        raise ConfigError(f"bad --m0 {o['m0']!r}: {exc}") from exc
    params = ModelParams(n_spins=1, omega0=o["omega"] * o["kappa"], kappa=o["kappa"])
    times, traj = evolve_mf(m0, params, o["t_max"], dt=o["dt"], sample_stride=o["stride"])
    write_csv(o["output"], ["t", "m_x", "m_y", "m_z", "m2"],
              [times, traj[:, 0], traj[:, 1], traj[:, 2], _m2_density_of_rows(traj)])


def _run_meanfield_sweep(cfg):
    o = cfg.options
    omegas = _parse_grid(o["omega_grid"])
    means, errs = orbit_average_sweep(
        omegas, n_avg=o["n_avg"], tau=o["tau"], seed=o["seed"], dt=o["dt"],
        kappa=o["kappa"], sampler=o["sampler"])
    fixed = np.array([mf_fixed_point_magic(om) for om in omegas])
    write_csv(o["output"], ["omega", "m2_fixed_point", "m2_orbit_mean", "m2_orbit_stderr"],
              [omegas, fixed, means, errs])


def _model(o) -> ModelParams:
    return ModelParams(n_spins=o["n"], omega0=o["omega"] * o["kappa"], kappa=o["kappa"])


def _run_lindblad_dynamics(cfg):
    o = cfg.options
    params = _model(o)
    run = LindbladRun(params=params, dt=o["dt"], t_max=o["t_max"], sample_stride=o["stride"])
    rho0 = pure_to_density(fully_polarized(o["n"], o["initial"]))
    times, rhos = evolve_lindblad(run, rho0)
    ops = build_collective_ops(params)
    mags = np.array([magnetization(r, ops) for r in rhos])
    m2 = np.array([sre(r, o["n"]).m2_density for r in rhos])
    pur = np.array([purity(r) for r in rhos])
    write_csv(o["output"], ["t", "m_x", "m_y", "m_z", "m2", "purity"],
              [times, mags[:, 0], mags[:, 1], mags[:, 2], m2, pur])


def _run_lindblad_sweep(cfg):
    o = cfg.options
    omegas = _parse_grid(o["omega_grid"])
    rho0 = pure_to_density(fully_polarized(o["n"], o["initial"]))
    rows = {"omega": omegas, "m2": [], "purity": [], "converged": [], "t_stop": []}
    for om in omegas:
        params = ModelParams(n_spins=o["n"], omega0=om * o["kappa"], kappa=o["kappa"])
        run = LindbladRun(params=params, dt=o["dt"], t_max=o["t_max"])
        res = steady_state(run, rho0)
        rows["m2"].append(sre(res.rho, o["n"]).m2_density)
        rows["purity"].append(purity(res.rho))
        rows["converged"].append(int(res.converged))
        rows["t_stop"].append(res.t_stop)
    write_csv(o["output"], list(rows), [np.asarray(rows[k]) for k in rows])


def _ensemble(o, kind: str, mu: float = 0.0) -> list[TrajectoryRecord]:
    spec = UnravelingSpec(kind=kind, dt=o["dt"], t_max=o["t_max"], seed=o["seed"],
                          n_traj=o["traj"], mu=mu, sample_stride=o["stride"])
    psi0 = fully_polarized(o["n"], o["initial"])
    return run_ensemble(spec, _model(o), psi0)


def _ensemble_columns(records):
    times = records[0].times
    cols = {"t": times}
    for label, attr in (("mz", "m_z"), ("m2", "sre_density"), ("ent", "entanglement")):
        data = np.stack([getattr(r, attr) for r in records])
        cols[f"{label}_mean"] = data.mean(axis=0)
        cols[f"{label}_stderr"] = data.std(axis=0, ddof=0) / math.sqrt(len(records))
    return cols


def _run_trajectory_ensemble(cfg):
    o = cfg.options
    records = _ensemble(o, o["unraveling"], o["mu"])
    cols = _ensemble_columns(records)
    write_csv(o["output"], list(cols), list(cols.values()))


def _run_unraveling_compare(cfg):
    o = cfg.options
    cols = {}
    for kind in ("qj", "mu", "qsd"):
        records = _ensemble(o, kind, o["mu"])
        sub = _ensemble_columns(records)
        cols.setdefault("t", sub["t"])
        for key, val in sub.items():
            if key != "t":
                cols[f"{kind}_{key}"] = val
    write_csv(o["output"], list(cols), list(cols.values()))


def _run_histogram(cfg):
    o = cfg.options
    kinds = [k.strip() for k in o["unravelings"].split(",") if k.strip()]
    for kind in kinds:
        if kind not in ("qj", "mu", "qsd"):
            raise ConfigError(f"unknown unraveling {kind!r} in --unravelings")
    n_steps = int(round(o["time"] / o["dt"]))
    o = dict(o, t_max=o["time"], stride=n_steps)
    values = {}
    for kind in kinds:
        records = _ensemble(o, kind, o["mu"])
        for quantity in ("sre_density", "entanglement", "m_z"):
            values[(kind, quantity)] = collect_at_time(records, quantity, o["time"])
    base = o["output"]
    stem = base[:-4] if base.endswith(".csv") else base
    for quantity, tag in (("sre_density", "m2"), ("entanglement", "snhalf"), ("m_z", "mz")):
        allv = np.concatenate([values[(k, quantity)] for k in kinds])
        lo, hi = float(allv.min()), float(allv.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        edges = np.linspace(lo, hi, o["bins"] + 1)
        header = ["bin_left", "bin_right"]
        cols = [edges[:-1], edges[1:]]
        for kind in kinds:
            hist = histogram_density(values[(kind, quantity)], bins=o["bins"], edges=edges)
            header.append(f"density_{kind}")
            cols.append(hist.densities)
        write_csv(f"{stem}_{tag}.csv", header, cols)


def _run_fit_saturation(cfg):
    o = cfg.options
    try:
        data = np.genfromtxt(o["input"], delimiter=",", names=True)
    except OSError:
        raise
    except Exception as exc:
        raise ConfigError(f"cannot parse {o['input']}: {exc}") from exc
    for col in ("omega", "m2_orbit_mean"):
        if data.dtype.names is None or col not in data.dtype.names:
            raise ConfigError(f"{o['input']}: missing column {col!r}")
    mask = data["omega"] > 1.0
    pts = np.stack([data["omega"][mask], data["m2_orbit_mean"][mask]], axis=1)
    fit = fit_saturation(pts)
    write_csv(o["output"], ["m2_sat", "alpha", "a", "residual", "n_points"],
              [[fit.m2_sat], [fit.alpha], [fit.a], [fit.residual], [int(mask.sum())]])


def _run_solid_angle(cfg):
    o = cfg.options
    val = solid_angle_limit(o["resolution"])
    write_csv(o["output"], ["resolution", "value"], [[o["resolution"]], [val]])


_RUNNERS = {
    "meanfield-dynamics": _run_meanfield_dynamics,
    "meanfield-sweep": _run_meanfield_sweep,
    "lindblad-dynamics": _run_lindblad_dynamics,
    "lindblad-sweep": _run_lindblad_sweep,
    "trajectory-ensemble": _run_trajectory_ensemble,
    "unraveling-compare": _run_unraveling_compare,
    "histogram": _run_histogram,
    "fit-saturation": _run_fit_saturation,
    "solid-angle": _run_solid_angle,
}


def run_experiment(cfg: ExperimentConfig):
    """Execute one experiment and write its CSV artifacts plus sidecar."""
    _RUNNERS[cfg.experiment](cfg)
    write_meta(cfg.options["output"] + ".meta", cfg)


def main(argv=None) -> int:
    try:
        cfg = build_config(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"btcsim: configuration error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        run_experiment(cfg)
    except OSError as exc:
        print(f"btcsim: i/o error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"btcsim: configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"btcsim: computation error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
