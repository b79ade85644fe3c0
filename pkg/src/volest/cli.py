"""Command-line front end.

Subcommands: simulate, estimate, scale, check, table1, curve.  Model and run
settings come from a flat key=value config file plus repeated --set key=value
overrides (applied after the file, unknown keys rejected); --seed overrides
last.  Every output file echoes the fully resolved configuration as
'# key=value' header lines, so a result is reproducible from the file alone.

Exit codes: 0 success, 2 configuration error, 3 numeric failure, 4 failed
validation in `check`.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys

import numpy as np

from .errors import (
    ConfigError,
    DegenerateCorrelationError,
    DegenerateVolatilityError,
    DomainError,
    ExperimentError,
    NoInformationError,
    QuadratureError,
    SimulationError,
    UnsupportedDataError,
)
from .estimate import ESTIMATE_CSV_HEADER, estimate_theta
from .harness import (
    DEFAULT_HORIZONS,
    DEFAULT_N_PATHS,
    DEFAULT_SEED,
    DEFAULT_STEP,
    DEFAULT_THETA,
    EXPERIMENT_CONFIG_KEYS,
    ExperimentConfig,
    consistency_curve,
    curve_csv_lines,
    experiment_from_config,
    experiment_to_config,
    sweep_csv_lines,
    table1_sweep,
)
from .models import (
    CoefFn,
    TimeGrid,
    VolatilityModel,
    _fmt,
    spec_from_config,
    validate_spec,
)
from .scale import classify_a6, default_c, ellipticity_margin, scale_density, scale_function
from .simulate import NoiseStream, dump_path_csv, load_path_csv, simulate_pair

# note lines in output headers use ':' so they never parse as config keys
_DISCRETIZATION_NOTE = "discretization: left-point euler sums"

_NUMERIC_ERRORS = (
    SimulationError,
    DegenerateVolatilityError,
    NoInformationError,
    UnsupportedDataError,
    ExperimentError,
    DegenerateCorrelationError,
    QuadratureError,
)

# keys the built-in benchmark sweep accepts; its models are not overridable
_TABLE1_KEYS = ("theta", "y0", "x0", "rho", "T", "h", "n_paths", "seed", "horizons")


# ---------------------------------------------------------------------------
# config plumbing

def read_config_file(path: str) -> dict[str, str]:
    """Parse a flat key=value file; blank lines and '#' comments skipped."""
    cfg: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, value = line.split("=", 1)
                key = key.strip()
                if key not in EXPERIMENT_CONFIG_KEYS:
                    raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
                cfg[key] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    return cfg


def parse_header_config(lines) -> dict[str, str]:
    """Recover the key=value pairs echoed into an output header."""
    cfg: dict[str, str] = {}
    for raw in lines:
        line = raw.strip()
        if not line.startswith("#"):
            break
        body = line.lstrip("#").strip()
        if "=" not in body:
            continue
        key, value = body.split("=", 1)
        key = key.strip()
        if key in EXPERIMENT_CONFIG_KEYS:
            cfg[key] = value.strip()
    return cfg


def _resolve_config(args, allowed=EXPERIMENT_CONFIG_KEYS) -> dict[str, str]:
    cfg: dict[str, str] = {}
    if args.config:
        cfg.update(read_config_file(args.config))
    for item in args.set or ():
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, value = item.split("=", 1)
        key = key.strip()
        if key not in EXPERIMENT_CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        cfg[key] = value.strip()
    if args.seed is not None:
        cfg["seed"] = str(args.seed)
    for key in cfg:
        if key not in allowed:
            raise ConfigError(f"config key {key!r} does not apply to this subcommand")
    return cfg


def _echo_lines(cfg: dict[str, str]) -> list[str]:
    lines = [f"{k}={cfg[k]}" for k in EXPERIMENT_CONFIG_KEYS if k in cfg]
    lines.append(_DISCRETIZATION_NOTE)
    return lines


def _out_path(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _write_csv(path: str, echo: list[str], rows: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in echo:
            fh.write(f"# {line}\n")
        for row in rows:
            fh.write(row + "\n")


def _require(cfg: dict[str, str], keys: tuple[str, ...], sub: str) -> None:
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ConfigError(f"{sub} needs config key(s): {', '.join(missing)}")


def _float_key(cfg: dict[str, str], key: str, default: float | None = None) -> float:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing config key {key!r}")
        return default
    try:
        return float(cfg[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot parse {cfg[key]!r} as a number") from None


def _int_key(cfg: dict[str, str], key: str, default: int) -> int:
    if key not in cfg:
        return default
    try:
        return int(cfg[key])
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot parse {cfg[key]!r} as an integer") from None


# ---------------------------------------------------------------------------
# subcommand handlers

def _cmd_simulate(args) -> int:
    cfg = _resolve_config(args)
    _require(cfg, ("a", "sigma1", "sigma2", "vol.kind", "vol.params", "y0", "x0", "theta", "T"), "simulate")
    spec = spec_from_config(cfg)
    grid = TimeGrid(_float_key(cfg, "T"), _float_key(cfg, "h", DEFAULT_STEP))
    n_paths = _int_key(cfg, "n_paths", 1)
    seed = _int_key(cfg, "seed", DEFAULT_SEED)

    resolved = dict(cfg)
    resolved.setdefault("h", _fmt(grid.step))
    resolved["n_paths"] = str(n_paths)
    resolved["seed"] = str(seed)
    echo = _echo_lines(resolved)

    for i in range(n_paths):
        path = simulate_pair(spec, grid, NoiseStream(seed, i))
        name = _out_path(args, f"path_{i}.csv")
        with open(name, "w", encoding="utf-8") as fh:
            dump_path_csv(path, fh, header_lines=tuple(echo + [f"path_index: {i}"]))
        msg = f"wrote {name} ({grid.n} steps"
        if path.clamp_count:
            msg += f", {path.clamp_count} positive-domain clamps"
        print(msg + ")")
    return 0


def _cmd_estimate(args) -> int:
    cfg = _resolve_config(args)
    _require(cfg, ("a", "sigma1", "sigma2", "vol.kind", "vol.params", "y0", "x0", "theta"), "estimate")
    spec = spec_from_config(cfg)
    try:
        with open(args.path, encoding="utf-8") as fh:
            path = load_path_csv(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read path file {args.path}: {exc}") from None
    result = estimate_theta(spec, path)
    row = result.csv_row()
    _write_csv(
        _out_path(args, "estimate.csv"),
        _echo_lines(cfg),
        [ESTIMATE_CSV_HEADER, row],
    )
    print(ESTIMATE_CSV_HEADER)
    print(row)
    return 0


def _build_vol_sigma2(cfg: dict[str, str]) -> tuple[VolatilityModel, CoefFn]:
    _require(cfg, ("vol.kind", "vol.params", "y0", "sigma2"), "scale")
    try:
        params = tuple(float(s) for s in cfg["vol.params"].split(","))
    except ValueError:
        raise ConfigError(f"cannot parse vol.params {cfg['vol.params']!r}") from None
    vol = VolatilityModel(cfg["vol.kind"].strip(), params, _float_key(cfg, "y0"))
    return vol, CoefFn.parse(cfg["sigma2"])


def _cmd_scale(args) -> int:
    cfg = _resolve_config(args)
    vol, sigma2 = _build_vol_sigma2(cfg)
    report = classify_a6(vol, sigma2)
    print(report.format())
    if args.samples:
        c = default_c(vol)
        lo, hi = vol.domain
        left = max(c, lo + 1e-6) if math.isfinite(lo) else c
        ys = np.linspace(left, c + 5.0, args.samples)
        rows = ["y,rho,s"]
        svals = scale_function(vol, None, ys)
        rvals = scale_density(vol, None, ys)
        for y, r, s in zip(ys, rvals, svals):
            rows.append(f"{y:.17g},{r:.17g},{s:.17g}")
        name = _out_path(args, "scale_samples.csv")
        _write_csv(name, _echo_lines(cfg), rows)
        print(f"wrote {name}")
    return 0


def _cmd_check(args) -> int:
    cfg = _resolve_config(args)
    _require(cfg, ("a", "sigma1", "sigma2", "vol.kind", "vol.params", "y0", "x0", "theta"), "check")
    # validation off so a broken spec is reported (exit 4) instead of raising
    spec = spec_from_config(cfg, validate=False)
    report = validate_spec(spec)
    print(report.format())

    failed = not report.ok
    bad = {c.name for c in report.checks if not c.passed}
    model_broken = bad & {"vol_params", "y0_in_domain", "sigma2_domain", "feller"}

    if model_broken:
        print("scale analysis skipped: volatility model invalid")
    else:
        scale_report = classify_a6(spec.vol, spec.sigma2)
        print(scale_report.format())
        if scale_report.a6_case == "not_satisfied":
            failed = True

        # pointwise ellipticity of the joint noise at the initial state
        s0 = spec.sigma1(spec.x0) * spec.sigma2(spec.vol.y0)
        b0 = spec.vol.diffusion(spec.vol.y0)
        if abs(spec.rho) >= 1.0 or not (abs(s0) > 0.0) or not (abs(b0) > 0.0):
            print("ellipticity_at_start: degenerate")
            failed = True
        else:
            eps = ellipticity_margin(abs(s0), abs(b0), spec.rho)
            print(f"ellipticity_at_start: {_fmt(eps)}")

    print("check: " + ("FAILED" if failed else "PASSED"))
    return 4 if failed else 0


def _print_table(rows: list[str]) -> None:
    cells = list(csv.reader(rows))
    widths = [max(len(c[i]) for c in cells) for i in range(len(cells[0]))]
    for c in cells:
        print("  ".join(v.ljust(w) for v, w in zip(c, widths)).rstrip())


def _cmd_table1(args) -> int:
    cfg = _resolve_config(args, allowed=_TABLE1_KEYS)
    if "horizons" in cfg:
        try:
            horizons = tuple(float(s) for s in cfg["horizons"].split(","))
        except ValueError:
            raise ConfigError(f"cannot parse horizons {cfg['horizons']!r}") from None
    elif "T" in cfg:
        horizons = (_float_key(cfg, "T"),)
    else:
        horizons = DEFAULT_HORIZONS

    step = _float_key(cfg, "h", DEFAULT_STEP)
    n_paths = _int_key(cfg, "n_paths", DEFAULT_N_PATHS)
    seed = _int_key(cfg, "seed", DEFAULT_SEED)
    theta = _float_key(cfg, "theta", DEFAULT_THETA)
    x0 = _float_key(cfg, "x0", 1.0)
    y0 = _float_key(cfg, "y0", 1.0)
    rho = _float_key(cfg, "rho", 0.0)

    results = table1_sweep(
        step=step, horizons=horizons, n_paths=n_paths, master_seed=seed,
        theta=theta, x0=x0, y0=y0, rho=rho,
    )
    rows = sweep_csv_lines(results)

    resolved = {
        "theta": _fmt(theta), "x0": _fmt(x0), "y0": _fmt(y0), "rho": _fmt(rho),
        "h": _fmt(step), "horizons": ",".join(_fmt(T) for T in horizons),
        "n_paths": str(n_paths), "seed": str(seed),
    }
    name = _out_path(args, "table1.csv")
    _write_csv(name, _echo_lines(resolved), rows)
    _print_table(rows)
    flagged = [
        (cid, hs.T)
        for cid, _, summary in results
        for hs in summary.horizons
        if hs.flagged
    ]
    for cid, T in flagged:
        print(f"warning: {cid} at T={_fmt(T)}: more than 5% of paths failed guards")
    print(f"wrote {name}")
    return 0


def _cmd_curve(args) -> int:
    cfg = _resolve_config(args)
    config = experiment_from_config(cfg)
    rows = consistency_curve(config)
    lines = curve_csv_lines(rows)
    name = _out_path(args, "curve.csv")
    _write_csv(name, _echo_lines(experiment_to_config(config)), lines)
    _print_table(lines)
    print(f"wrote {name}")
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="volest",
        description=(
            "Simulate scalar diffusions with multiplicative stochastic "
            "volatility, estimate the drift parameter, and analyse when the "
            "estimator is strongly consistent."
        ),
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name: str, help_text: str, handler):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="override a config key (repeatable, applied after the file)",
        )
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.set_defaults(handler=handler)
        return p

    add("simulate", "simulate paths and dump them as CSV", _cmd_simulate)
    p_est = add("estimate", "estimate theta from a path CSV", _cmd_estimate)
    p_est.add_argument("--path", required=True, help="path CSV file to estimate from")
    p_scale = add("scale", "scale-function report for the volatility factor", _cmd_scale)
    p_scale.add_argument(
        "--samples",
        type=int,
        default=0,
        metavar="N",
        help="also write N (y, rho, s) sample rows for plotting",
    )
    add("check", "validate a model spec and its consistency conditions", _cmd_check)
    add("table1", "run the built-in benchmark sweep", _cmd_table1)
    add("curve", "median estimation error as the horizon grows", _cmd_curve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
