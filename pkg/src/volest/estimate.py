"""Maximum-likelihood drift estimation from discretely observed paths.

With f = a / (sigma1^2 * sigma2^2) and g = a / (sigma1 * sigma2), the
estimator integrates f against dX and divides by the accumulated g^2:

    theta_hat = sum_k f(x_k, y_k) * (x_{k+1} - x_k)
                -----------------------------------
                sum_k g(x_k, y_k)^2 * h

Both sums are left-point: node n contributes nothing.  On synthetic paths
the same sums satisfy theta_hat - theta = (sum_k g*dw_k) / (sum_k g^2*h)
identically, which `martingale_ratio` exposes for diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateVolatilityError,
    NoInformationError,
    UnsupportedDataError,
)
from .models import CoefFn, ModelSpec
from .simulate import PathPair


@dataclass(frozen=True)
class EstimateResult:
    """Estimator output plus the two sums it is the ratio of."""

    theta_hat: float
    numerator: float
    denominator: float
    T: float
    n_used: int

    def csv_row(self) -> str:
        return (
            f"{self.T:.17g},{self.theta_hat:.17g},{self.numerator:.17g},"
            f"{self.denominator:.17g},{self.n_used}"
        )


ESTIMATE_CSV_HEADER = "T,theta_hat,numerator,denominator,n_used"


def f_g_eval(spec: ModelSpec, t: float, x: float, y: float) -> tuple[float, float]:
    """The integrand pair (f, g) at one node.

    The catalog is time-homogeneous, so ``t`` does not enter the value; it is
    accepted to keep the node signature uniform.  g^2 equals f*a identically,
    which downstream sums rely on.
    """
    s1 = spec.sigma1(x)
    s2 = spec.sigma2(y)
    vol = s1 * s2
    if vol == 0.0:
        raise DegenerateVolatilityError(
            f"sigma1*sigma2 = 0 at (t={t:.17g}, x={x:.17g}, y={y:.17g})",
            where=(t, x, y),
        )
    av = spec.a(x)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore", under="ignore"):
        f = float(av / (vol * vol))
        g = float(av / vol)
    if not (math.isfinite(f) and math.isfinite(g)):
        raise DegenerateVolatilityError(
            f"estimator integrand not finite: volatility underflow "
            f"(t={t:.17g}, x={x:.17g}, y={y:.17g})",
            where=(t, x, y),
        )
    return f, g


def _fg_arrays(spec: ModelSpec, path: PathPair) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (f, g^2) on the n left nodes; raises on a zero volatility."""
    xs = path.x[:-1]
    ys = path.y[:-1]
    vol = np.asarray(spec.sigma1(xs) * spec.sigma2(ys))
    bad = np.flatnonzero(vol == 0.0)
    if bad.size:
        k = int(bad[0])
        t = k * path.grid.step
        raise DegenerateVolatilityError(
            f"sigma1*sigma2 = 0 at node {k} "
            f"(t={t:.17g}, x={xs[k]:.17g}, y={ys[k]:.17g})",
            node=k,
            where=(t, float(xs[k]), float(ys[k])),
        )
    av = np.asarray(spec.a(xs))
    with np.errstate(divide="ignore", over="ignore", invalid="ignore", under="ignore"):
        f = av / (vol * vol)
        g2 = f * av
    # vol != 0 does not rule out vol^2 underflowing to 0 (collapsed paths
    # reach subnormal states); treat a non-finite integrand as degeneracy
    bad = np.flatnonzero(~(np.isfinite(f) & np.isfinite(g2)))
    if bad.size:
        k = int(bad[0])
        t = k * path.grid.step
        raise DegenerateVolatilityError(
            f"estimator integrand not finite at node {k}: volatility "
            f"underflow (t={t:.17g}, x={xs[k]:.17g}, y={ys[k]:.17g})",
            node=k,
            where=(t, float(xs[k]), float(ys[k])),
        )
    return f, g2


def _as_result(numerator: float, denominator: float, path: PathPair) -> EstimateResult:
    if not denominator > 0.0:
        raise NoInformationError(
            f"estimator denominator is {denominator:.17g}; "
            "the path carries no information about theta"
        )
    return EstimateResult(
        theta_hat=numerator / denominator,
        numerator=numerator,
        denominator=denominator,
        T=path.grid.horizon,
        n_used=path.grid.n,
    )


def estimate_theta(spec: ModelSpec, path: PathPair) -> EstimateResult:
    """Left-point MLE of theta from a path (synthetic or observed)."""
    f, g2 = _fg_arrays(spec, path)
    numerator = float(np.sum(f * np.diff(path.x)))
    denominator = float(np.sum(g2) * path.grid.step)
    return _as_result(numerator, denominator, path)


def estimate_theta_linear(sigma2: CoefFn, path: PathPair) -> EstimateResult:
    """Estimator specialized to a(x) = x, sigma1(x) = x.

    The ratio collapses to sum(dx / (x*sigma2(y)^2)) over sum(sigma2(y)^-2)*h
    and needs only sigma2; every left node must have x_k != 0 and
    sigma2(y_k) != 0.
    """
    xs = path.x[:-1]
    s2 = np.asarray(sigma2(path.y[:-1]))
    bad = np.flatnonzero((xs == 0.0) | (s2 == 0.0))
    if bad.size:
        k = int(bad[0])
        t = k * path.grid.step
        raise DegenerateVolatilityError(
            f"x*sigma2 = 0 at node {k} "
            f"(t={t:.17g}, x={xs[k]:.17g}, y={path.y[k]:.17g})",
            node=k,
            where=(t, float(xs[k]), float(path.y[k])),
        )
    with np.errstate(divide="ignore", over="ignore", invalid="ignore", under="ignore"):
        w = 1.0 / (s2 * s2)
        terms = np.diff(path.x) / xs * w
    bad = np.flatnonzero(~(np.isfinite(w) & np.isfinite(terms)))
    if bad.size:
        k = int(bad[0])
        t = k * path.grid.step
        raise DegenerateVolatilityError(
            f"estimator integrand not finite at node {k}: volatility "
            f"underflow (t={t:.17g}, x={xs[k]:.17g}, y={path.y[k]:.17g})",
            node=k,
            where=(t, float(xs[k]), float(path.y[k])),
        )
    numerator = float(np.sum(terms))
    denominator = float(np.sum(w) * path.grid.step)
    return _as_result(numerator, denominator, path)


def martingale_ratio(spec: ModelSpec, path: PathPair) -> float:
    """(sum_k g*dw_k) / (sum_k g^2*h): equals theta_hat - theta on synthetic
    paths.

    Needs the stored increments, so it refuses observed data.
    """
    if path.dw is None:
        raise UnsupportedDataError(
            "martingale_ratio needs the simulated increments dw; "
            "observed paths do not carry them"
        )
    f, g2 = _fg_arrays(spec, path)
    # g with the sign of a/vol: g = g2 / (a/vol) is unstable where a = 0, so
    # recompute it directly
    xs = path.x[:-1]
    ys = path.y[:-1]
    with np.errstate(divide="ignore", over="ignore", invalid="ignore", under="ignore"):
        g = np.asarray(spec.a(xs)) / np.asarray(spec.sigma1(xs) * spec.sigma2(ys))
    numerator = float(np.sum(g * path.dw))
    denominator = float(np.sum(g2) * path.grid.step)
    if not denominator > 0.0:
        raise NoInformationError(
            f"estimator denominator is {denominator:.17g}; "
            "the path carries no information about theta"
        )
    return numerator / denominator
