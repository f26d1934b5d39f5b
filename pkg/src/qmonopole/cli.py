"""Command-line front end.

    python -m qmonopole.cli chern --delta1-mhz 30 --omega-mhz 10 --delta2-mhz 0
    python -m qmonopole.cli transition --delta2-over-delta1 -2:2:41 --out t.csv

Every subcommand accepts ``--config FILE`` with flat ``key = value`` lines;
flags given on the command line override file entries.  Exit codes: 0 on
success, 2 on usage errors, 3 when the computation fails.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import __version__
from . import qubit_core as qc
from .errors import QMonopoleError, UsageError
from .results import FORMATS, SweepResult, write_output

log = logging.getLogger("qmonopole")

COMMANDS = ("curvature", "chern", "transition", "quench", "fidelity", "geometry", "monopole")
ROUTES = {"plaquette": "plaquette", "spectral": "spectral_quadrature", "dynamical": "dynamical", "two_patch": "two_patch"}
BOUNDARY_NUDGE = 1e-6

DEFAULT_GRID = {"curvature": (16, 16), "plaquette": (48, 48), "spectral": (128, 128), "geometry": (256, 256)}
MIN_GRID = {"curvature": (2, 2), "plaquette": (24, 24), "spectral": (24, 24), "geometry": (64, 64)}

SCHEMAS = {
    "curvature": ["theta", "phi", "f_spectral", "f_qgt", "metric_theta_theta", "metric_phi_phi"],
    "chern": ["value", "rounded", "residual"],
    "transition": ["delta2_over_delta1", "chern_{band}"],
    "quench": ["t_us", "theta", "sigma_y", "f_theta_phi"],
    "fidelity": ["theta_meas", "delta2_over_delta1", "fidelity", "target"],
    "geometry": ["theta_cap", "bulk", "boundary", "total", "euler_estimate"],
    "monopole": ["r", "flux", "chern_two_patch"],
}


def schema(command: str, band: str = "ground") -> list:
    return [c.format(band=band) for c in SCHEMAS[command]]


@dataclass(frozen=True)
class Sweep:
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class RunConfig:
    command: str
    delta1_mhz: float = 30.0
    delta2_mhz: float = 0.0
    omega_mhz: float = 10.0
    band: str = "ground"
    route: str = "plaquette"
    grid: Optional[tuple] = None
    t_ramp_us: Optional[float] = None
    dt_us: Optional[float] = None
    delta2_over_delta1: Optional[Sweep] = None
    theta_meas_over_pi: Optional[Sweep] = None
    target: str = "bare_e"
    initial: str = "g"
    g_charge: float = 0.5
    theta_cap: float = math.pi
    radii: tuple = (0.5, 1.0, 2.0)
    shots: Optional[int] = None
    seed: int = 0
    out: Optional[str] = None
    format: str = "csv"

    @property
    def params(self) -> qc.DriveParams:
        return qc.DriveParams.from_mhz(self.delta1_mhz, self.delta2_mhz, self.omega_mhz)


# --------------------------------------------------------------------------
# parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _grid(text: str) -> tuple:
    try:
        n, m = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"--grid expects NxM, got {text!r}") from None
    return n, m


def _sweep(text: str) -> Sweep:
    parts = text.split(":")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            return Sweep(v, v, 1)
        start, stop, count = parts
        sweep = Sweep(float(start), float(stop), int(count))
    except ValueError:
        raise UsageError(f"sweep expects start:stop:count, got {text!r}") from None
    if sweep.count < 1:
        raise UsageError("sweep count must be >= 1")
    return sweep


def _radii(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--radii expects comma-separated numbers, got {text!r}") from None


# option name -> (converter, help)
OPTIONS = {
    "delta1_mhz": (float, "delta1 / 2pi in MHz"),
    "delta2_mhz": (float, "delta2 / 2pi in MHz"),
    "omega_mhz": (float, "omega_n / 2pi in MHz"),
    "band": (str, "ground | excited"),
    "route": (str, "plaquette | spectral | dynamical | two_patch"),
    "grid": (_grid, "NxM grid"),
    "t_ramp_us": (float, "ramp duration in us"),
    "dt_us": (float, "integrator step in us (default t_ramp/4000)"),
    "delta2_over_delta1": (_sweep, "start:stop:count"),
    "theta_meas_over_pi": (_sweep, "measurement angles / pi, start:stop:count"),
    "target": (str, "bare_e | bare_g | degenerate_s"),
    "initial": (str, "g | e"),
    "g_charge": (float, "monopole charge g"),
    "theta_cap": (float, "patch boundary in rad (pi = closed sphere)"),
    "radii": (_radii, "comma-separated sphere radii"),
    "shots": (int, "projective-measurement shots per point (quench)"),
    "seed": (int, "RNG seed for shot noise"),
    "out": (str, "output path (default stdout)"),
    "format": (str, "csv | json"),
}

COMMAND_OPTIONS = {
    "curvature": ["grid"],
    "chern": ["route", "grid", "t_ramp_us", "dt_us", "g_charge"],
    "transition": ["route", "grid", "t_ramp_us", "dt_us", "delta2_over_delta1"],
    "quench": ["t_ramp_us", "dt_us", "shots", "seed"],
    "fidelity": ["t_ramp_us", "dt_us", "delta2_over_delta1", "theta_meas_over_pi", "target", "initial"],
    "geometry": ["grid", "theta_cap"],
    "monopole": ["g_charge", "radii"],
}
COMMON = ["delta1_mhz", "delta2_mhz", "omega_mhz", "band", "out", "format"]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmonopole", description="Driven-qubit Berry curvature and Chern-number tools")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd)
        p.add_argument("--config", help="flat key = value file; flags override")
        for name in COMMON + COMMAND_OPTIONS[cmd]:
            # keep raw strings; conversion happens after merging with the config file
            p.add_argument("--" + name.replace("_", "-"), dest=name, default=None, help=OPTIONS[name][1])
    return parser


def read_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    out = {}
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _join_negative_values(argv) -> list:
    """'--flag -2:2:41' -> '--flag=-2:2:41' so argparse does not read the value as an option."""
    out, argv = [], list(argv)
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok.startswith("--") and "=" not in tok and nxt and len(nxt) > 1 and nxt[0] == "-" and (nxt[1].isdigit() or nxt[1] == "."):
            out.append(f"{tok}={nxt}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def parse_config(argv) -> RunConfig:
    """argv (without the program name) -> validated RunConfig."""
    args = build_parser().parse_args(_join_negative_values(argv))
    if args.command is None:
        raise UsageError(f"a command is required: one of {', '.join(COMMANDS)}")
    allowed = COMMON + COMMAND_OPTIONS[args.command]
    raw = read_config_file(args.config) if args.config else {}
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise UsageError(f"unknown config key(s) for {args.command}: {', '.join(unknown)}")
    for name in allowed:
        value = getattr(args, name)
        if value is not None:
            raw[name] = value
    values = {}
    for name, text in raw.items():
        conv = OPTIONS[name][0]
        try:
            values[name] = conv(text)
        except (TypeError, ValueError):
            raise UsageError(f"--{name.replace('_', '-')}: invalid value {text!r}") from None
    return _validate(RunConfig(command=args.command, **values))


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.band not in ("ground", "excited"):
        raise UsageError("--band must be ground or excited")
    if cfg.format not in FORMATS:
        raise UsageError("--format must be csv or json")
    if cfg.omega_mhz < 0:
        raise UsageError("--omega-mhz must be >= 0")
    if cfg.command in ("chern", "transition"):
        if cfg.route not in ROUTES:
            raise UsageError(f"--route must be one of {', '.join(ROUTES)}")
        if cfg.command == "transition" and cfg.route == "two_patch":
            raise UsageError("--route two_patch applies to the chern command only")
        if cfg.route != "two_patch" and cfg.delta1_mhz == 0:
            raise UsageError("--delta1-mhz must be nonzero")
    needs_ramp = cfg.command in ("quench",) or (cfg.command in ("chern", "transition") and cfg.route == "dynamical")
    if needs_ramp and cfg.t_ramp_us is None:
        raise UsageError(f"{cfg.command} requires --t-ramp-us")
    if cfg.t_ramp_us is not None and cfg.t_ramp_us <= 0:
        raise UsageError("--t-ramp-us must be positive")
    if cfg.dt_us is not None:
        t_ramp = cfg.t_ramp_us if cfg.t_ramp_us is not None else 20.0
        if not 0 < cfg.dt_us <= t_ramp / 200:
            raise UsageError("--dt-us must lie in (0, t_ramp/200]")
    grid_key = {"curvature": "curvature", "geometry": "geometry"}.get(cfg.command)
    if cfg.command in ("chern", "transition") and cfg.route in MIN_GRID:
        grid_key = cfg.route
    if cfg.grid is not None and grid_key is not None:
        lo = MIN_GRID[grid_key]
        if cfg.grid[0] < lo[0] or cfg.grid[1] < lo[1]:
            raise UsageError(f"--grid must be at least {lo[0]}x{lo[1]} for {grid_key}")
    if cfg.command == "fidelity":
        from .dynamics import TARGETS

        if cfg.target not in TARGETS:
            raise UsageError(f"--target must be one of {', '.join(sorted(TARGETS))}")
        if cfg.initial not in ("g", "e"):
            raise UsageError("--initial must be g or e")
    if cfg.command == "geometry" and not 0 < cfg.theta_cap <= math.pi:
        raise UsageError("--theta-cap must lie in (0, pi]")
    if cfg.command == "monopole" and any(r <= 0 for r in cfg.radii):
        raise UsageError("--radii must be positive")
    if cfg.shots is not None and cfg.shots < 1:
        raise UsageError("--shots must be >= 1")
    return cfg


# --------------------------------------------------------------------------
# execution


def resolved_metadata(cfg: RunConfig) -> dict:
    p = cfg.params
    meta = {
        "command": cfg.command,
        "engine_version": __version__,
        "delta1_rad_per_us": p.delta1,
        "delta2_rad_per_us": p.delta2,
        "omega_n_rad_per_us": p.omega_n,
        "band": cfg.band,
    }
    for key, value in asdict(cfg).items():
        if key in ("command", "out", "format"):
            continue
        if key in COMMON or key in COMMAND_OPTIONS[cfg.command]:
            meta["input_" + key] = value
    return meta


def _ratios(cfg: RunConfig, nudge: bool):
    sweep = cfg.delta2_over_delta1 or Sweep(-2.0, 2.0, 41)
    ratios = sweep.values()
    notes = {}
    if nudge:
        on_boundary = np.isclose(np.abs(ratios), 1.0, rtol=0, atol=1e-12)
        if np.any(on_boundary):
            ratios = np.where(on_boundary, np.sign(ratios) * (1.0 + BOUNDARY_NUDGE), ratios)
            notes["boundary_nudge"] = f"|delta2/delta1| = 1 moved outward by {BOUNDARY_NUDGE:g}"
    return ratios, notes


def _run_curvature(cfg):
    from .geometry import StateMap, berry_curvature_qgt, berry_curvature_spectral, fubini_study_metric, midpoints, qgt_finite_difference

    n, m = cfg.grid or DEFAULT_GRID["curvature"]
    params = cfg.params
    smap = StateMap.band(params, cfg.band)
    rows, notes = [], {}
    for th in midpoints(0.0, math.pi, n):
        for ph in midpoints(0.0, 2 * math.pi, m):
            try:
                q = qgt_finite_difference(smap, th, ph)
                g = fubini_study_metric(q)
                row = [float(berry_curvature_spectral(params, th, ph, cfg.band)), float(berry_curvature_qgt(q)), float(g.e), float(g.g)]
            except QMonopoleError as exc:
                row = [math.nan] * 4
                notes[f"{th:.17g},{ph:.17g}"] = f"{type(exc).__name__}: {exc}"
            rows.append([float(th), float(ph)] + row)
    return SweepResult(schema("curvature"), rows, notes=notes)


def _run_chern(cfg):
    from .topology import chern_number, wu_yang_chern

    meta = {"route": cfg.route}
    if cfg.route == "two_patch":
        res = wu_yang_chern(cfg.g_charge)
        meta["g_charge"] = cfg.g_charge
    else:
        kwargs = {}
        if cfg.route == "dynamical":
            kwargs = {"t_ramp": cfg.t_ramp_us, "dt": cfg.dt_us}
        grid = cfg.grid or DEFAULT_GRID.get(cfg.route)
        res = chern_number(cfg.params, cfg.band, ROUTES[cfg.route], grid, **kwargs)
        meta["grid"] = list(res.grid)
    return SweepResult(schema("chern"), [[res.value, res.rounded, res.residual]], meta)


def _run_transition(cfg):
    from .topology import transition_sweep

    ratios, notes = _ratios(cfg, nudge=True)
    kwargs = {"t_ramp": cfg.t_ramp_us, "dt": cfg.dt_us} if cfg.route == "dynamical" else {}
    grid = cfg.grid or DEFAULT_GRID.get(cfg.route)
    curve = transition_sweep(cfg.params, ratios, cfg.band, ROUTES[cfg.route], grid, **kwargs)
    rows = [[float(r), float(c)] for r, c in zip(curve.ratios, curve.chern)]
    notes.update(curve.notes)
    return SweepResult(schema("transition", cfg.band), rows, {"route": cfg.route, "grid": list(grid or ())}, notes)


def _run_quench(cfg):
    from .dynamics import CONVENTIONS, RampProtocol, evolve, extract_curvature

    initial = "ground" if cfg.band == "ground" else "excited"
    protocol = RampProtocol(cfg.params, cfg.t_ramp_us, dt=cfg.dt_us, initial=initial)
    traj = evolve(protocol)
    rng = np.random.default_rng(cfg.seed) if cfg.shots else None
    curv = extract_curvature(traj, protocol, shots=cfg.shots, rng=rng)
    chern = float(np.trapezoid(curv.f_theta_phi, curv.theta))
    rows = [[float(t), float(th), float(s), float(f)] for t, th, s, f in zip(traj.times, curv.theta, curv.sigma_phi, curv.f_theta_phi)]
    meta = {
        "quench_velocity_rad_per_us": protocol.velocity,
        "dt_us": protocol.dt,
        "dynamical_chern": chern,
        "max_norm_drift": traj.max_norm_drift,
        "convention": CONVENTIONS["curvature"],
    }
    return SweepResult(schema("quench"), rows, meta)


def _run_fidelity(cfg):
    from .dynamics import RampProtocol, fidelity_map

    ratios, notes = _ratios(cfg, nudge=False)
    t_ramp = cfg.t_ramp_us if cfg.t_ramp_us is not None else 20.0
    thetas = math.pi * (cfg.theta_meas_over_pi or Sweep(0.0, 1.0, 21)).values()
    protocol = RampProtocol(cfg.params, t_ramp, dt=cfg.dt_us, initial=cfg.initial)
    res = fidelity_map(cfg.params, ratios, thetas, protocol, cfg.target, cfg.initial)
    res.notes.update(notes)
    return res


def _run_geometry(cfg):
    from .geometry import StateMap, gauss_bonnet_check

    grid = cfg.grid or DEFAULT_GRID["geometry"]
    gb = gauss_bonnet_check(StateMap.band(cfg.params, cfg.band), cfg.theta_cap, grid)
    meta = {
        "grid": list(grid),
        "north_bulk": gb.north_bulk,
        "north_boundary": gb.north_boundary,
        "south_bulk": gb.south_bulk,
        "south_boundary": gb.south_boundary,
    }
    return SweepResult(schema("geometry"), [[gb.theta_cap, gb.bulk, gb.boundary, gb.total, gb.euler_estimate]], meta)


def _run_monopole(cfg):
    from .monopole_fields import MonopoleConfig, monopole_flux
    from .topology import wu_yang_chern

    mono = MonopoleConfig(cfg.g_charge)
    chern = wu_yang_chern(cfg.g_charge).value
    rows = [[r, monopole_flux(mono, r), chern] for r in sorted(cfg.radii)]
    return SweepResult(schema("monopole"), rows, {"g_charge": cfg.g_charge})


RUNNERS = {
    "curvature": _run_curvature,
    "chern": _run_chern,
    "transition": _run_transition,
    "quench": _run_quench,
    "fidelity": _run_fidelity,
    "geometry": _run_geometry,
    "monopole": _run_monopole,
}


def run(cfg: RunConfig) -> SweepResult:
    result = RUNNERS[cfg.command](cfg)
    result.metadata = {**resolved_metadata(cfg), **result.metadata}
    return result


def total_failure(result: SweepResult) -> bool:
    """True when no row carries a finite number in its last numeric column."""
    numeric = [i for i, c in enumerate(result.columns) if c != "target"]
    if not result.rows:
        return True
    j = numeric[-1]
    return all(isinstance(row[j], float) and math.isnan(row[j]) for row in result.rows)


# --------------------------------------------------------------------------
# entry point


class _Formatter(logging.Formatter):
    COLORS = {"WARNING": "\033[33m", "ERROR": "\033[31m", "INFO": "\033[36m"}

    def __init__(self, color: bool):
        super().__init__("%(levelname)s %(message)s")
        self.color = color

    def format(self, record):
        text = super().format(record)
        if self.color and record.levelname in self.COLORS:
            text = f"{self.COLORS[record.levelname]}{text}\033[0m"
        return text


def _setup_logging():
    if log.handlers:
        return
    color = "NO_COLOR" not in os.environ and sys.stderr.isatty()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_Formatter(color))
    log.addHandler(handler)
    log.setLevel(logging.INFO)
    log.propagate = False


def main(argv=None) -> int:
    _setup_logging()
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        log.error("usage: %s", exc)
        return 2
    start = time.perf_counter()
    try:
        result = run(cfg)
    except QMonopoleError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 3
    if total_failure(result):
        log.error("every sweep point failed")
        write_output(result, cfg.out, cfg.format)
        return 3
    try:
        write_output(result, cfg.out, cfg.format)
    except QMonopoleError as exc:
        log.error("%s", exc)
        return 3
    log.info("%s: %d rows in %.2f s", cfg.command, len(result.rows), time.perf_counter() - start)
    return 0


if __name__ == "__main__":
    sys.exit(main())
