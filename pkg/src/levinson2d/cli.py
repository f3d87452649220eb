"""
Command-line front end.

    levinson2d phase    --config run.ini --out results/
    levinson2d spectrum --config run.ini
    levinson2d levinson --config run.ini --tol 0.15
    levinson2d sweep    --config run.ini --jobs 4
    levinson2d critical-scan --config run.ini

The configuration is an INI file. A minimal one:

    [potential]
    shape = square_well
    x0 = 3.0
    r0 = 1.0

    [run]
    channels = 0, 1, 2, 3

See README.md for every section and key. Exit codes: 0 success, 1 a Levinson
verdict failed, 2 configuration error, 3 solver non-convergence, 4 channel
not supported (m^2 + b <= 0 for an inverse-square tail).
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import potential as pot
from . import scattering, spectrum
from .errors import ConvergenceError, DomainError, UnsupportedChannelError
from .radial import StepControl

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_UNSUPPORTED = 4

CUTOFF_SHAPES = ("square_well", "truncated_gaussian", "step_stack")
TAIL_SHAPES = ("core_plus_inverse_square", "inverse_power_tail")
SWEEP_PARAMETERS = ("depth", "x0", "b", "lambda")


class ConfigError(ValueError):
    pass


# -- configuration -----------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    steps: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class RunConfig:
    potential: Dict[str, str]
    core: Dict[str, str]
    channels: Tuple[int, ...]
    control: StepControl
    momenta: Tuple[float, ...]
    lambda_steps: int = 16
    sweep: Optional[SweepSpec] = None
    out_dir: Path = Path("out")
    formats: Tuple[str, ...] = ("csv", "json")
    scan_tol: float = 1e-9


def _float(section: Dict[str, str], key: str, default: Optional[float] = None) -> float:
    if key not in section:
        if default is None:
            raise ConfigError(f"missing key {key!r}")
        return default
    try:
        value = float(section[key])
    except ValueError:
        raise ConfigError(f"{key} = {section[key]!r} is not a number") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key} must be finite")
    return value


def _int(section, key, default=None) -> int:
    value = _float(section, key, None if default is None else float(default))
    if value != int(value):
        raise ConfigError(f"{key} must be an integer")
    return int(value)


def _float_list(text: str, key: str) -> List[float]:
    try:
        return [float(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"{key} must be a comma-separated list of numbers") from None


def _formats(text: str) -> Tuple[str, ...]:
    text = text.strip().lower()
    if text == "both":
        return ("csv", "json")
    if text in ("csv", "json"):
        return (text,)
    raise ConfigError(f"format must be csv, json or both, got {text!r}")


def _momenta(section: Dict[str, str]) -> Tuple[float, ...]:
    if "momenta" in section:
        ks = _float_list(section["momenta"], "momenta")
    else:
        k_min = _float(section, "k_min", 0.01)
        k_max = _float(section, "k_max", 2.0)
        n = _int(section, "k_points", 40)
        spacing = section.get("spacing", "log").strip().lower()
        if not (0 < k_min < k_max) or n < 1:
            raise ConfigError("need 0 < k_min < k_max and k_points >= 1")
        if spacing == "log":
            ks = list(np.geomspace(k_min, k_max, n))
        elif spacing == "linear":
            ks = list(np.linspace(k_min, k_max, n))
        else:
            raise ConfigError(f"spacing must be log or linear, got {spacing!r}")
    if not ks or any(k <= 0 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
        raise ConfigError("momenta must be positive and strictly ascending")
    return tuple(float(k) for k in ks)


def load_config(path: Path) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    if not parser.has_section("potential"):
        raise ConfigError("missing [potential] section")

    def sect(name):
        return dict(parser.items(name)) if parser.has_section(name) else {}

    run = sect("run")
    channels_text = run.get("channels", sect("potential").get("channels", "0"))
    try:
        channels = tuple(int(tok) for tok in channels_text.replace(";", ",").split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"channels must be integers, got {channels_text!r}") from None
    if not channels or any(m < 0 for m in channels):
        raise ConfigError("channels must be a non-empty list of m >= 0")

    solver = sect("solver")
    base = StepControl()
    try:
        control = StepControl(
            phase_step=_float(solver, "phase_step", base.phase_step),
            tol=_float(solver, "tol", base.tol),
            max_steps=_int(solver, "max_steps", base.max_steps),
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from None

    sweep = None
    if parser.has_section("sweep"):
        s = sect("sweep")
        parameter = s.get("parameter", "").strip().lower()
        if parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"sweep parameter must be one of {SWEEP_PARAMETERS}, got {parameter!r}")
        sweep = SweepSpec(parameter, _float(s, "start"), _float(s, "stop"), _int(s, "steps", 25))
        if sweep.steps < 1:
            raise ConfigError("sweep steps must be >= 1")

    out = sect("output")
    phase = sect("phase")
    cfg = RunConfig(
        potential=sect("potential"),
        core=sect("core"),
        channels=channels,
        control=control,
        momenta=_momenta(phase),
        lambda_steps=_int(phase, "lambda_steps", _int(run, "lambda_steps", 16)),
        sweep=sweep,
        out_dir=Path(out.get("dir", "out")),
        formats=_formats(out.get("format", "both")),
        scan_tol=_float(sect("critical_scan"), "tol", 1e-9),
    )
    build_potential(cfg.potential, cfg.core)  # validate early
    return cfg


def _cutoff_shape(section: Dict[str, str], r0_default: Optional[float] = None, coupling: float = 1.0):
    shape = section.get("shape", "").strip().lower()
    if shape == "square_well":
        r0 = _float(section, "r0", r0_default if r0_default is not None else 1.0)
        if "x0" in section:
            return pot.SquareWell.from_x0(_float(section, "x0"), r0, coupling)
        return pot.square_well(_float(section, "depth"), r0, coupling)
    if shape == "truncated_gaussian":
        r0 = _float(section, "r0", r0_default)
        return pot.truncated_gaussian(_float(section, "amplitude"), _float(section, "width"), r0, coupling)
    if shape == "step_stack":
        shells = []
        for item in section.get("shells", "").split(","):
            if not item.strip():
                continue
            try:
                r, v = item.split(":")
                shells.append((float(r), float(v)))
            except ValueError:
                raise ConfigError(f"bad shell {item.strip()!r}; use radius:value") from None
        if not shells:
            raise ConfigError("step_stack needs shells = r1:v1, r2:v2, ...")
        if "r0" in section and not math.isclose(_float(section, "r0"), shells[-1][0]):
            raise ConfigError("r0 must equal the outermost shell radius")
        return pot.step_stack(shells, coupling)
    raise ConfigError(f"unknown shape {shape!r}")


def build_potential(section: Dict[str, str], core: Dict[str, str]) -> pot.PotentialModel:
    """Potential model from the [potential] (and, for tails, [core]) sections."""
    try:
        coupling = _float(section, "coupling", 1.0)
        shape = section.get("shape", "").strip().lower()
        if shape in CUTOFF_SHAPES:
            return _cutoff_shape(section, coupling=coupling)
        if shape in TAIL_SHAPES:
            if not core:
                raise ConfigError(f"{shape} needs a [core] section")
            r0 = _float(section, "r0", _float(core, "r0", 1.0))
            base = _cutoff_shape(core, r0_default=r0).with_coupling(coupling)
            b = _float(section, "b")
            if b == 0.0:
                return base
            if shape == "core_plus_inverse_square":
                return pot.core_plus_inverse_square(base, b)
            return pot.inverse_power_tail(base, b, _float(section, "n"))
        raise ConfigError(f"unknown shape {shape!r}")
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def _with_parameter(cfg: RunConfig, name: str, value: float) -> pot.PotentialModel:
    """The configured potential with one sweep parameter replaced."""
    section = dict(cfg.potential)
    core = dict(cfg.core)
    shape = section.get("shape", "").strip().lower()
    if name == "lambda":
        section["coupling"] = repr(float(value))
    elif name == "b":
        if shape not in TAIL_SHAPES:
            raise ConfigError("a b sweep needs a tail shape")
        section["b"] = repr(float(value))
    else:
        target = section if shape == "square_well" else core
        if target.get("shape", "").strip().lower() != "square_well":
            raise ConfigError(f"a {name} sweep needs a square-well (core) shape")
        target.pop("x0", None)
        target.pop("depth", None)
        if name == "x0":
            target["x0"] = repr(float(value))
        else:
            target["depth"] = repr(float(value))
        if (name == "x0" and value == 0.0) or (name == "depth" and value == 0.0):
            # the zero-depth well is the free problem
            target["depth"] = "1.0"
            target.pop("x0", None)
            section["coupling"] = "0.0"
    return build_potential(section, core)


def apply_env(cfg: RunConfig) -> RunConfig:
    try:
        return replace(cfg, control=StepControl.from_env(cfg.control))
    except (ValueError, DomainError) as exc:
        raise ConfigError(f"bad solver override in environment: {exc}") from None


# -- output ------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _json_clean(obj):
    if isinstance(obj, dict):
        return {k: _json_clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def json_text(obj) -> str:
    return json.dumps(_json_clean(obj), indent=2) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_all(out_dir: Path, files: Dict[str, str]) -> None:
    # everything is computed before the first write
    for name, text in files.items():
        write_atomic(out_dir / name, text)


def _pmap(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# -- commands ----------------------------------------------------------------


def cmd_phase(cfg: RunConfig, jobs: int = 1) -> Dict[str, str]:
    p = build_potential(cfg.potential, cfg.core)

    def one(m):
        try:
            return scattering.phase_curve(p, m, cfg.momenta, cfg.lambda_steps, cfg.control)
        except ConvergenceError as exc:
            raise ConvergenceError(f"channel m={m}: {exc}") from exc

    files = {}
    for curve in _pmap(one, cfg.channels, jobs):
        if "csv" in cfg.formats:
            files[f"phase_m{curve.m}.csv"] = curve.to_csv()
        if "json" in cfg.formats:
            files[f"phase_m{curve.m}.json"] = json_text(
                {
                    "m": curve.m,
                    "nu": curve.nu,
                    "k": list(curve.momenta),
                    "eta_rad": list(curve.phases),
                    "lambda_steps": [t.steps for t in curve.lambda_trace],
                }
            )
    return files


def cmd_spectrum(cfg: RunConfig, jobs: int = 1) -> Dict[str, str]:
    p = build_potential(cfg.potential, cfg.core)

    def one(m):
        spec = spectrum.find_bound_states(p, m, cfg.control)
        return spec, spectrum.count_via_nodes(p, m, cfg.control)

    files = {}
    for spec, n_nodes in _pmap(one, cfg.channels, jobs):
        if "csv" in cfg.formats:
            rows = [(j, E, n) for j, (E, n) in enumerate(zip(spec.levels, spec.level_nodes))]
            files[f"spectrum_m{spec.m}.csv"] = csv_text(("index", "energy", "nodes"), rows)
        if "json" in cfg.formats:
            files[f"spectrum_m{spec.m}.json"] = json_text(
                {
                    "m": spec.m,
                    "nu": spec.nu,
                    "count": spec.count,
                    "count_via_nodes": n_nodes,
                    "levels": list(spec.levels),
                    "level_nodes": list(spec.level_nodes),
                    "unresolved": [list(b) for b in spec.unresolved],
                    "threshold_class": spec.threshold_class,
                    "A0_r0": spec.A0_r,
                }
            )
    return files


def cmd_levinson(cfg: RunConfig, tol: float, jobs: int = 1) -> Tuple[Dict[str, str], bool]:
    p = build_potential(cfg.potential, cfg.core)

    def one(m):
        return spectrum.levinson_verdict(p, m, tol, cfg.control, cfg.lambda_steps)

    reports = _pmap(one, cfg.channels, jobs)
    files = {}
    if "json" in cfg.formats:
        for r in reports:
            files[f"levinson_m{r.m}.json"] = json_text(r.to_dict())
    if "csv" in cfg.formats:
        header = ("m", "nu", "n_m", "eta0_rad", "expected_rad", "residual_rad", "regime", "critical", "verdict")
        rows = [tuple(getattr(r, h) for h in header) for r in reports]
        files["levinson.csv"] = csv_text(header, rows)
    ok = all(r.verdict in ("pass", "informational") for r in reports)
    return files, ok


def _sweep_point(cfg: RunConfig, m: int, value: float):
    p = _with_parameter(cfg, cfg.sweep.parameter, value)
    try:
        nu = pot.effective_order(m, p)
    except UnsupportedChannelError:
        return (value, math.nan, math.nan, -1, "unsupported", math.nan)
    lim = scattering.zero_momentum_limit(p, m, cfg.lambda_steps, cfg.control)
    spec = spectrum.find_bound_states(p, m, cfg.control)
    flag = spec.threshold_class if lim.critical else ("near_critical" if lim.near_critical else "none")
    return (value, lim.A0_r, lim.eta0 / math.pi, spec.count, flag, nu)


def cmd_sweep(cfg: RunConfig, jobs: int = 1) -> Dict[str, str]:
    if cfg.sweep is None:
        raise ConfigError("sweep needs a [sweep] section")
    values = cfg.sweep.values()
    tasks = [(m, float(v)) for m in cfg.channels for v in values]
    results = _pmap(lambda t: _sweep_point(cfg, *t), tasks, jobs)
    files = {}
    header = ("param", "A0_r0", "eta0_over_pi", "n_m", "critical_flag", "nu", "jump")
    for m in cfg.channels:
        rows = [r for (mm, _), r in zip(tasks, results) if mm == m]
        marked = []
        for i, r in enumerate(rows):
            jump = i > 0 and r[3] >= 0 and rows[i - 1][3] >= 0 and r[3] != rows[i - 1][3]
            marked.append(r + (bool(jump),))
        if "csv" in cfg.formats:
            files[f"sweep_m{m}.csv"] = csv_text(header, marked)
        if "json" in cfg.formats:
            files[f"sweep_m{m}.json"] = json_text(
                {"m": m, "parameter": cfg.sweep.parameter, "rows": [dict(zip(header, r)) for r in marked]}
            )
    return files


def _threshold_index(cfg, m, value):
    p = _with_parameter(cfg, cfg.sweep.parameter, value)
    try:
        return spectrum.threshold_index(p, m, cfg.control)
    except UnsupportedChannelError:
        return None


def _event(cfg, m, lo, hi, n_before, n_after):
    param = 0.5 * (lo + hi)
    nu = pot.effective_order(m, _with_parameter(cfg, cfg.sweep.parameter, param))
    return {
        "param_lo": lo,
        "param_hi": hi,
        "param": param,
        "n_before": n_before,
        "n_after": n_after,
        "nu": nu,
        "threshold_class": spectrum._threshold_class(nu),
    }


def critical_scan(cfg: RunConfig, m: int) -> List[dict]:
    """Locate parameter values where channel m crosses a zero-energy threshold."""
    values = [float(v) for v in cfg.sweep.values()]
    qs = [_threshold_index(cfg, m, v) for v in values]
    levels = [None if q is None else math.floor(q) for q in qs]
    events = []
    # a sweep starting exactly at a threshold (the free S-wave) binds immediately
    if len(qs) > 1 and qs[0] is not None and qs[1] is not None:
        j = round(qs[0])
        if abs(qs[0] - j) <= 1e-12 and qs[1] > qs[0] and levels[1] == j:
            events.append(_event(cfg, m, values[0], values[0], j, j + 1))
    for (a, la), (b, lb) in zip(zip(values, levels), zip(values[1:], levels[1:])):
        if la is None or lb is None or la == lb:
            continue
        lo, hi = a, b
        while abs(hi - lo) > cfg.scan_tol * max(1.0, abs(lo)):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if math.floor(_threshold_index(cfg, m, mid)) == la:
                lo = mid
            else:
                hi = mid
        events.append(_event(cfg, m, lo, hi, la + 1, lb + 1))
    return events


def cmd_critical_scan(cfg: RunConfig, jobs: int = 1) -> Dict[str, str]:
    if cfg.sweep is None:
        raise ConfigError("critical-scan needs a [sweep] section")
    scans = _pmap(lambda m: critical_scan(cfg, m), cfg.channels, jobs)
    files = {}
    header = ("param_lo", "param_hi", "param", "n_before", "n_after", "nu", "threshold_class")
    for m, events in zip(cfg.channels, scans):
        if "csv" in cfg.formats:
            files[f"critical_scan_m{m}.csv"] = csv_text(header, [tuple(e[h] for h in header) for e in events])
        if "json" in cfg.formats:
            files[f"critical_scan_m{m}.json"] = json_text(
                {"m": m, "parameter": cfg.sweep.parameter, "events": events}
            )
    return files


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levinson2d",
        description="2D partial-wave phase shifts, bound states and Levinson's theorem checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("phase", "phase shift curves eta_m(k), one CSV per channel"),
        ("spectrum", "bound-state levels and node counts per channel"),
        ("levinson", "Levinson verdict per channel (JSON reports)"),
        ("sweep", "zero-energy quantities along a parameter sweep"),
        ("critical-scan", "locate parameter values where a bound state appears"),
    ):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, type=Path, help="INI run configuration")
        sp.add_argument("--out", type=Path, help="output directory (overrides [output] dir)")
        sp.add_argument("--format", choices=("csv", "json", "both"), help="output format(s)")
        sp.add_argument(
            "--tol", type=float, default=scattering.SNAP_TOL,
            help="Levinson tolerance in radians (default 0.05*pi)",
        )
        sp.add_argument("--jobs", type=int, default=1, help="worker threads")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = apply_env(load_config(args.config))
        if args.out is not None:
            cfg = replace(cfg, out_dir=args.out)
        if args.format is not None:
            cfg = replace(cfg, formats=_formats(args.format))
        if not args.tol > 0:
            raise ConfigError("--tol must be positive")
        jobs = max(1, args.jobs)
        for m in cfg.channels:
            pot.effective_order(m, build_potential(cfg.potential, cfg.core))

        ok = True
        if args.command == "phase":
            files = cmd_phase(cfg, jobs)
        elif args.command == "spectrum":
            files = cmd_spectrum(cfg, jobs)
        elif args.command == "levinson":
            files, ok = cmd_levinson(cfg, args.tol, jobs)
        elif args.command == "sweep":
            files = cmd_sweep(cfg, jobs)
        else:
            files = cmd_critical_scan(cfg, jobs)
        _write_all(cfg.out_dir, files)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnsupportedChannelError as exc:
        print(f"unsupported channel: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except ConvergenceError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    for name in sorted(files):
        print(cfg.out_dir / name)
    if not ok:
        print("one or more Levinson verdicts failed", file=sys.stderr)
        return EXIT_VERDICT
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
