"""Path simulation: counter-based noise streams and the Euler scheme.

Both processes are stepped with the explicit left-point Euler scheme

    x[k+1] = x[k] + theta*a(x[k])*h + sigma1(x[k])*sigma2(y[k])*dw1[k]
    y[k+1] = y[k] + alpha(y[k])*h + beta(y[k])*dw2[k]

where dw2 = rho*dw1 + sqrt(1-rho^2)*dw3 for independent increments dw1, dw3.
X always sees sigma2 at the not-yet-advanced y[k], matching the left-point
sums the estimator integrates against.

Noise is counter-based: deviate j of path i is a pure function of
(master_seed, i, j), obtained by inverse-CDF transform of Philox output
keyed with (master_seed, path_index).  Streams for distinct path indices are
independent, and a longer run consumes a strict superset of the deviates of
a shorter one, so path prefixes coincide across horizons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import ndtri

from .errors import DomainError, SimulationError
from .models import KERNEL_CODES, ModelSpec, TimeGrid

# positive-domain guard: a step that would land at y <= 0 is clamped here
EPS_DOMAIN = 1e-12


# ---------------------------------------------------------------------------
# noise

@dataclass(frozen=True)
class NoiseStream:
    """Deterministic stream of i.i.d. standard normal deviates.

    The stream is defined by the pair (master_seed, path_index) alone; the
    j-th deviate never depends on how many were drawn before it in a given
    process, only on j.
    """

    master_seed: int
    path_index: int

    def __post_init__(self):
        for name in ("master_seed", "path_index"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)):
                raise DomainError(f"{name} must be an integer, got {v!r}")
        object.__setattr__(self, "master_seed", int(self.master_seed) & (2**64 - 1))
        object.__setattr__(self, "path_index", int(self.path_index) & (2**64 - 1))

    def normals(self, count: int) -> np.ndarray:
        """First ``count`` deviates of the stream."""
        if count < 0:
            raise DomainError("count must be >= 0")
        key = np.array([self.master_seed, self.path_index], dtype=np.uint64)
        raw = np.random.Philox(key=key).random_raw(count)
        # top 53 bits -> open-interval uniform, then inverse normal CDF
        u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
        return ndtri(u)


def wiener_increments(grid: TimeGrid, stream: NoiseStream) -> np.ndarray:
    """n independent N(0, h) increments for the given grid."""
    return math.sqrt(grid.step) * stream.normals(grid.n)


def correlate(dw1: np.ndarray, dw3: np.ndarray, rho: float) -> np.ndarray:
    """Mix independent increment arrays: rho*dw1 + sqrt(1-rho^2)*dw3."""
    if dw1.shape != dw3.shape:
        raise DomainError(
            f"increment arrays differ in length: {dw1.shape} vs {dw3.shape}"
        )
    if not abs(rho) <= 1.0:
        raise DomainError(f"rho={rho} outside [-1, 1]")
    return rho * dw1 + math.sqrt(1.0 - rho * rho) * dw3


# ---------------------------------------------------------------------------
# paths

@dataclass(frozen=True)
class PathPair:
    """One simulated (or observed) trajectory of (X, Y) on a uniform grid.

    ``dw`` holds the n increments of the driver of X; it is None for observed
    data loaded from an external file.  ``clamp_count`` counts activations of
    the positive-domain guard during simulation.
    """

    grid: TimeGrid
    x: np.ndarray
    y: np.ndarray
    dw: np.ndarray | None = None
    clamp_count: int = 0

    def __post_init__(self):
        n = self.grid.n
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.shape != (n + 1,) or y.shape != (n + 1,):
            raise DomainError(
                f"state arrays must have length n+1={n + 1}, "
                f"got {x.shape} and {y.shape}"
            )
        dw = self.dw
        if dw is not None:
            dw = np.asarray(dw, dtype=np.float64)
            if dw.shape != (n,):
                raise DomainError(f"dw must have length n={n}, got {dw.shape}")
            dw.setflags(write=False)
        for arr in (x, y):
            arr.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "dw", dw)

    def prefix(self, horizon: float) -> "PathPair":
        """Restriction of the path to [0, horizon] (views, no copies)."""
        sub = self.grid.prefix(horizon)
        m = sub.n
        return PathPair(
            grid=sub,
            x=self.x[: m + 1],
            y=self.y[: m + 1],
            dw=None if self.dw is None else self.dw[:m],
            clamp_count=self.clamp_count,
        )


# ---------------------------------------------------------------------------
# Euler kernel

@njit(cache=True, nogil=True)
def _coef_val(code: int, p1: float, p2: float, v: float) -> float:
    if code == 0:
        return p1
    if code == 1:
        return p1 * v + p2
    if code == 2:
        return p1 * abs(v) ** p2
    if code == 3:
        return p1 * math.sqrt(abs(v))
    if code == 4:
        return p1 / (1.0 + v)
    if code == 5:
        return p1 + p2 * math.sin(v)
    if code == 6:
        return p1 * (p2 - v)
    return p1 * math.sqrt(v)


@njit(cache=True, nogil=True)
def _euler_kernel(
    x, y, dw1, dw2, h, theta,
    ac, ap1, ap2, s1c, s1p1, s1p2, s2c, s2p1, s2p2,
    alc, alp1, alp2, bec, bep1, bep2,
    positive_domain, eps_domain,
):
    # x, y are length n+1 with the initial values already in slot 0
    n = dw1.shape[0]
    clamps = 0
    for k in range(n):
        xk = x[k]
        yk = y[k]
        xn = (
            xk
            + theta * _coef_val(ac, ap1, ap2, xk) * h
            + _coef_val(s1c, s1p1, s1p2, xk) * _coef_val(s2c, s2p1, s2p2, yk) * dw1[k]
        )
        # full truncation: Y coefficients see max(y, 0) on positive domains
        yv = yk
        if positive_domain and yv < 0.0:
            yv = 0.0
        yn = yk + _coef_val(alc, alp1, alp2, yv) * h + _coef_val(bec, bep1, bep2, yv) * dw2[k]
        if positive_domain and yn <= 0.0:
            yn = eps_domain
            clamps += 1
        if not (math.isfinite(xn) and math.isfinite(yn)):
            return k, clamps
        x[k + 1] = xn
        y[k + 1] = yn
    return -1, clamps


def euler_pair(
    spec: ModelSpec,
    grid: TimeGrid,
    dw1: np.ndarray,
    dw2: np.ndarray,
) -> PathPair:
    """Integrate both processes against explicitly supplied increments.

    This is the deterministic core of `simulate_pair`; it is exposed so that
    refinement studies can drive two step sizes with one underlying Brownian
    path (coarse increments being sums of fine ones, see `coarsen`).
    """
    n = grid.n
    if dw1.shape != (n,) or dw2.shape != (n,):
        raise DomainError(f"increment arrays must have length n={n}")
    x = np.empty(n + 1)
    y = np.empty(n + 1)
    x[0] = spec.x0
    y[0] = spec.vol.y0
    positive = spec.vol.domain[0] == 0.0
    bad_step, clamps = _euler_kernel(
        x, y, np.ascontiguousarray(dw1), np.ascontiguousarray(dw2),
        grid.step, spec.theta,
        *spec.a.kernel_args(),
        *spec.sigma1.kernel_args(),
        *spec.sigma2.kernel_args(),
        *spec.vol.drift.kernel_args(),
        *spec.vol.diffusion.kernel_args(),
        positive, EPS_DOMAIN,
    )
    if bad_step >= 0:
        raise SimulationError(
            f"state became non-finite at step {bad_step} "
            f"(t={bad_step * grid.step:.17g})",
            step=bad_step,
        )
    return PathPair(grid=grid, x=x, y=y, dw=dw1, clamp_count=clamps)


def simulate_pair(spec: ModelSpec, grid: TimeGrid, stream: NoiseStream) -> PathPair:
    """Simulate one (X, Y) path from a noise stream.

    The stream is consumed interleaved: deviate 2k feeds the X driver and
    deviate 2k+1 the independent component of the Y driver.  Interleaving is
    what makes a path on a longer horizon extend a shorter one node for node.
    """
    n = grid.n
    z = stream.normals(2 * n)
    root_h = math.sqrt(grid.step)
    dw1 = root_h * z[0::2]
    dw3 = root_h * z[1::2]
    dw2 = correlate(dw1, dw3, spec.rho)
    return euler_pair(spec, grid, dw1, dw2)


def coarsen(dw: np.ndarray, factor: int) -> np.ndarray:
    """Sum consecutive groups of ``factor`` increments (same Brownian path,
    coarser grid)."""
    n = dw.shape[0]
    if factor < 1 or n % factor:
        raise DomainError(f"cannot coarsen {n} increments by factor {factor}")
    return dw.reshape(n // factor, factor).sum(axis=1)


# ---------------------------------------------------------------------------
# path CSV form

def dump_path_csv(path: PathPair, fileobj, header_lines: tuple[str, ...] = ()) -> None:
    """Write a path as CSV with columns t,x,y,dw (17 significant digits).

    One row per node; the dw cell of the final node is empty since there are
    only n increments.  ``header_lines`` are emitted first, prefixed with
    '# '.
    """
    for line in header_lines:
        fileobj.write(f"# {line}\n")
    fileobj.write("t,x,y,dw\n")
    t = path.grid.times()
    n = path.grid.n
    for k in range(n + 1):
        dw_cell = ""
        if path.dw is not None and k < n:
            dw_cell = f"{path.dw[k]:.17g}"
        fileobj.write(f"{t[k]:.17g},{path.x[k]:.17g},{path.y[k]:.17g},{dw_cell}\n")


def load_path_csv(fileobj) -> PathPair:
    """Read a path written by `dump_path_csv`, or observed data.

    Accepts files with columns t,x,y,dw or just t,x,y; '#' lines are
    skipped.  A file without usable dw values yields dw=None (observed
    data), on which increment-based operations refuse to run.
    """
    rows = []
    header = None
    for line in fileobj:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            header = [c.strip() for c in line.split(",")]
            if header[:3] != ["t", "x", "y"]:
                raise DomainError(
                    f"unrecognized path CSV header {line!r}; expected t,x,y[,dw]"
                )
            continue
        rows.append(line.split(","))
    if header is None or len(rows) < 2:
        raise DomainError("path CSV needs a header and at least two node rows")

    has_dw = len(header) >= 4 and header[3] == "dw"
    t = np.array([float(r[0]) for r in rows])
    x = np.array([float(r[1]) for r in rows])
    y = np.array([float(r[2]) for r in rows])
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise DomainError("path CSV contains non-finite states")

    n = len(rows) - 1
    h = t[1] - t[0]
    if h <= 0 or not np.allclose(np.diff(t), h, rtol=1e-9, atol=1e-12):
        raise DomainError("path CSV nodes are not a uniform time grid")
    grid = TimeGrid(n * h, h)

    dw = None
    if has_dw:
        cells = [r[3].strip() if len(r) > 3 else "" for r in rows[:n]]
        if all(cells):
            dw = np.array([float(c) for c in cells])
    return PathPair(grid=grid, x=x, y=y, dw=dw)
