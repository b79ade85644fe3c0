"""Monte-Carlo harness: repeated simulation plus estimation over horizons.

Each path index i gets its own noise stream (master_seed, i) and is simulated
once to the largest horizon; the estimator then runs on grid prefixes, so the
value at a shorter horizon is exactly what a standalone run at that horizon
would produce.  Aggregation walks paths in index order, which makes summaries
byte-identical for any worker count.

The seven built-in benchmark configurations (`table1_spec`) share one X model
(dX = theta*X dt + X*sigma2(Y) dW, theta = 2, x0 = y0 = 1, rho = 0) and vary
the Y dynamics and sigma2.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DegenerateVolatilityError,
    DomainError,
    ExperimentError,
    NoInformationError,
    SimulationError,
)
from .estimate import estimate_theta
from .models import (
    CoefFn,
    ModelSpec,
    TimeGrid,
    VolatilityModel,
    _fmt,
    linear_spec,
    spec_from_config,
    spec_to_config,
)
from .simulate import NoiseStream, simulate_pair

# desk-scale defaults: minutes, not the hours a production-scale step needs
DEFAULT_STEP = 1e-3
DEFAULT_HORIZONS = (10.0, 50.0, 100.0)
DEFAULT_N_PATHS = 100
DEFAULT_SEED = 20260818
DEFAULT_THETA = 2.0

THREADS_ENV_VAR = "VOLEST_THREADS"

SWEEP_CSV_HEADER = "config_id,alpha,beta,sigma2,T,mean,std,n_ok,n_fail"
CURVE_CSV_HEADER = "T,median_abs_error,n_ok,n_fail"


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte-Carlo experiment: a model, horizons, step, paths, seed."""

    spec: ModelSpec
    horizons: tuple[float, ...]
    step: float
    n_paths: int
    master_seed: int

    def __post_init__(self):
        object.__setattr__(self, "horizons", tuple(float(T) for T in self.horizons))
        object.__setattr__(self, "step", float(self.step))
        object.__setattr__(self, "n_paths", int(self.n_paths))
        object.__setattr__(self, "master_seed", int(self.master_seed))
        if not self.horizons:
            raise ConfigError("need at least one horizon")
        if any(b <= a for a, b in zip(self.horizons, self.horizons[1:])):
            raise ConfigError(f"horizons must be strictly increasing: {self.horizons}")
        for T in self.horizons:
            try:
                TimeGrid(T, self.step)  # step must divide every horizon
            except DomainError as exc:
                raise ConfigError(str(exc)) from None
        if self.n_paths < 2:
            raise ConfigError("n_paths must be >= 2")

    @property
    def max_horizon(self) -> float:
        return self.horizons[-1]


@dataclass(frozen=True)
class HorizonSummary:
    T: float
    mean: float
    std: float
    n_ok: int
    n_fail: int

    @property
    def flagged(self) -> bool:
        """More than 5% of paths failed guards at this horizon."""
        total = self.n_ok + self.n_fail
        return total > 0 and self.n_fail > 0.05 * total


@dataclass(frozen=True)
class McSummary:
    horizons: tuple[HorizonSummary, ...]


def worker_count(explicit: int | None = None) -> int:
    """Resolve the worker cap: explicit argument, else VOLEST_THREADS, else
    one per CPU (the 0 value also means auto)."""
    if explicit is None:
        raw = os.environ.get(THREADS_ENV_VAR, "0").strip() or "0"
        try:
            explicit = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV_VAR}={raw!r} is not an integer") from None
    if explicit < 0:
        raise ConfigError("worker count must be >= 0")
    if explicit == 0:
        explicit = os.cpu_count() or 1
    return explicit


def _path_estimates(config: ExperimentConfig, grid: TimeGrid, index: int) -> np.ndarray:
    """theta_hat per horizon for one path index; NaN marks a guard failure."""
    out = np.full(len(config.horizons), np.nan)
    try:
        path = simulate_pair(config.spec, grid, NoiseStream(config.master_seed, index))
    except SimulationError:
        return out
    for j, T in enumerate(config.horizons):
        try:
            out[j] = estimate_theta(config.spec, path.prefix(T)).theta_hat
        except (DegenerateVolatilityError, NoInformationError):
            pass
    return out


def collect_estimates(config: ExperimentConfig, workers: int | None = None) -> np.ndarray:
    """(n_paths, n_horizons) array of estimates, NaN where a guard tripped.

    Row i is a pure function of (spec, step, master_seed, i), so the array
    does not depend on the worker count or scheduling.
    """
    grid = TimeGrid(config.max_horizon, config.step)
    w = worker_count(workers)
    indices = range(config.n_paths)
    if w == 1:
        rows = [_path_estimates(config, grid, i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=w) as pool:
            rows = list(pool.map(lambda i: _path_estimates(config, grid, i), indices))
    return np.vstack(rows)


def summarize(config: ExperimentConfig, estimates: np.ndarray) -> McSummary:
    """Aggregate per horizon in fixed path order; all paths failing is an
    error, a single surviving path reports std = nan."""
    out = []
    for j, T in enumerate(config.horizons):
        col = estimates[:, j]
        ok = col[np.isfinite(col)]
        n_fail = int(col.size - ok.size)
        if ok.size == 0:
            raise ExperimentError(
                f"all {config.n_paths} paths failed guards at horizon T={_fmt(T)}"
            )
        std = float(np.std(ok, ddof=1)) if ok.size > 1 else math.nan
        out.append(
            HorizonSummary(
                T=T,
                mean=float(np.mean(ok)),
                std=std,
                n_ok=int(ok.size),
                n_fail=n_fail,
            )
        )
    return McSummary(tuple(out))


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> McSummary:
    """Simulate n_paths paths to max(horizons), estimate on every prefix,
    and aggregate.  Deterministic given master_seed."""
    return summarize(config, collect_estimates(config, workers))


def consistency_curve(
    config: ExperimentConfig, workers: int | None = None
) -> tuple[tuple[float, float, int, int], ...]:
    """Per horizon: (T, median |theta_hat - theta|, n_ok, n_fail)."""
    estimates = collect_estimates(config, workers)
    rows = []
    for j, T in enumerate(config.horizons):
        col = estimates[:, j]
        ok = col[np.isfinite(col)]
        if ok.size == 0:
            raise ExperimentError(
                f"all {config.n_paths} paths failed guards at horizon T={_fmt(T)}"
            )
        med = float(np.median(np.abs(ok - config.spec.theta)))
        rows.append((T, med, int(ok.size), int(col.size - ok.size)))
    return tuple(rows)


# ---------------------------------------------------------------------------
# built-in benchmark configurations

TABLE1_IDS = ("row1", "row2", "row3", "row4", "row5", "row6", "row7")

# (volatility factory, sigma2) per row; y0 is filled in at spec build time
_TABLE1_DEFS = {
    "row1": (lambda y0: VolatilityModel.bachelier(1.0, 1.0, y0), CoefFn.power(1.0, 0.25)),
    "row2": (lambda y0: VolatilityModel.gbm(1.0, 2.0, y0), CoefFn.sqrt_y(1.0)),
    "row3": (lambda y0: VolatilityModel.gbm(1.0, 1.0, y0), CoefFn.reciprocal1p(1.0)),
    "row4": (lambda y0: VolatilityModel.vasicek(-1.0, 0.0, 1.0, y0), CoefFn.sin_shift(2.0, 1.0)),
    "row5": (lambda y0: VolatilityModel.vasicek(1.0, 0.0, 1.0, y0), CoefFn.sin_shift(2.0, 1.0)),
    "row6": (lambda y0: VolatilityModel.cir(1.0, 2.0, 1.0, y0), CoefFn.sqrt_y(1.0)),
    "row7": (lambda y0: VolatilityModel.cir(1.0, 2.0, 1.0, y0), CoefFn.linear(1.0, 0.0)),
}


def table1_spec(
    config_id: str,
    theta: float = DEFAULT_THETA,
    x0: float = 1.0,
    y0: float = 1.0,
    rho: float = 0.0,
) -> ModelSpec:
    """Benchmark spec for one built-in configuration id (row1..row7)."""
    try:
        vol_factory, sigma2 = _TABLE1_DEFS[config_id]
    except KeyError:
        raise ConfigError(
            f"unknown benchmark id {config_id!r}; expected one of {TABLE1_IDS}"
        ) from None
    return linear_spec(theta, sigma2, vol_factory(y0), x0=x0, rho=rho)


def table1_sweep(
    step: float = DEFAULT_STEP,
    horizons: Sequence[float] = DEFAULT_HORIZONS,
    n_paths: int = DEFAULT_N_PATHS,
    master_seed: int = DEFAULT_SEED,
    theta: float = DEFAULT_THETA,
    x0: float = 1.0,
    y0: float = 1.0,
    rho: float = 0.0,
    workers: int | None = None,
) -> list[tuple[str, ModelSpec, McSummary]]:
    """Run every built-in configuration.  Paths with the same index share a
    noise stream across configurations (common random numbers)."""
    out = []
    for config_id in TABLE1_IDS:
        spec = table1_spec(config_id, theta=theta, x0=x0, y0=y0, rho=rho)
        config = ExperimentConfig(
            spec=spec,
            horizons=tuple(horizons),
            step=step,
            n_paths=n_paths,
            master_seed=master_seed,
        )
        out.append((config_id, spec, run_experiment(config, workers)))
    return out


def _csv_field(text: str) -> str:
    # two-parameter coefficient strings contain a comma; quote them so the
    # rows stay parseable by any csv reader
    return f'"{text}"' if "," in text else text


def sweep_csv_lines(results: list[tuple[str, ModelSpec, McSummary]]) -> list[str]:
    """Fixed-format CSV rows (one per configuration and horizon)."""
    lines = [SWEEP_CSV_HEADER]
    for config_id, spec, summary in results:
        alpha = _csv_field(spec.vol.drift.describe())
        beta = _csv_field(spec.vol.diffusion.describe())
        sigma2 = _csv_field(spec.sigma2.describe())
        for hs in summary.horizons:
            lines.append(
                f"{config_id},{alpha},{beta},{sigma2},{_fmt(hs.T)},"
                f"{_fmt(hs.mean)},{_fmt(hs.std)},{hs.n_ok},{hs.n_fail}"
            )
    return lines


def curve_csv_lines(rows: tuple[tuple[float, float, int, int], ...]) -> list[str]:
    lines = [CURVE_CSV_HEADER]
    for T, med, n_ok, n_fail in rows:
        lines.append(f"{_fmt(T)},{_fmt(med)},{n_ok},{n_fail}")
    return lines


# ---------------------------------------------------------------------------
# flat config form (round-trips through output headers)

EXPERIMENT_CONFIG_KEYS = (
    "theta",
    "a",
    "sigma1",
    "sigma2",
    "vol.kind",
    "vol.params",
    "y0",
    "x0",
    "rho",
    "T",
    "h",
    "n_paths",
    "seed",
    "horizons",
)


def experiment_to_config(config: ExperimentConfig) -> dict[str, str]:
    """Flat key=value form; `experiment_from_config` inverts it exactly."""
    out = spec_to_config(config.spec)
    out["h"] = _fmt(config.step)
    out["horizons"] = ",".join(_fmt(T) for T in config.horizons)
    out["n_paths"] = str(config.n_paths)
    out["seed"] = str(config.master_seed)
    return out


def experiment_from_config(cfg: Mapping[str, str]) -> ExperimentConfig:
    """Build an ExperimentConfig from flat text fields.

    Accepts either `horizons` (comma-separated) or a single `T`; `h`,
    `n_paths` and `seed` fall back to the desk-scale defaults.
    """
    spec = spec_from_config(cfg)
    if "horizons" in cfg:
        try:
            horizons = tuple(float(s) for s in cfg["horizons"].split(","))
        except ValueError:
            raise ConfigError(
                f"cannot parse horizons {cfg['horizons']!r}"
            ) from None
    elif "T" in cfg:
        try:
            horizons = (float(cfg["T"]),)
        except ValueError:
            raise ConfigError(f"cannot parse T {cfg['T']!r}") from None
    else:
        horizons = DEFAULT_HORIZONS
    try:
        step = float(cfg.get("h", str(DEFAULT_STEP)))
        n_paths = int(cfg.get("n_paths", str(DEFAULT_N_PATHS)))
        seed = int(cfg.get("seed", str(DEFAULT_SEED)))
    except ValueError as exc:
        raise ConfigError(f"bad numeric experiment key: {exc}") from None
    return ExperimentConfig(
        spec=spec,
        horizons=horizons,
        step=step,
        n_paths=n_paths,
        master_seed=seed,
    )
