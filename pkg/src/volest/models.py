"""Coefficient catalog, volatility models, model specs, and time grids.

The model under study is a scalar diffusion whose volatility is modulated by
a second, autonomous diffusion:

    dX_t = theta * a(X_t) dt + sigma1(X_t) * sigma2(Y_t) dW_t
    dY_t = alpha(Y_t) dt + beta(Y_t) dW1_t

with corr(dW, dW1) = rho * dt.  theta is the unknown drift parameter.  All
scalar coefficients are drawn from a closed catalog (`CoefFn`) so that the
boundary classifier in `scale` can reason about their tails symbolically
instead of probing improper integrals numerically.
"""

from __future__ import annotations

import math
import re
from dataclasses import InitVar, dataclass
from typing import Mapping

import numpy as np

from .errors import ConfigError, DomainError

_INF = math.inf

# ---------------------------------------------------------------------------
# coefficient catalog

# kind -> number of parameters
_KIND_ARITY = {
    "constant": 1,         # c
    "linear": 2,           # m*y + b
    "power": 2,            # c*|y|**p
    "sqrt_abs": 1,         # c*sqrt(|y|)
    "reciprocal1p": 1,     # c/(1+y)
    "sin_shift": 2,        # c + d*sin(y)
    "affine_mean_rev": 2,  # a*(b-y)
    "sqrt_y": 1,           # c*sqrt(y), defined on y >= 0
}

# stable integer codes consumed by the jitted Euler kernel
KERNEL_CODES = {kind: i for i, kind in enumerate(_KIND_ARITY)}


def _fmt(v: float) -> str:
    # 17 significant digits round-trip any float64
    return f"{v:.17g}"


@dataclass(frozen=True)
class CoefFn:
    """One member of the closed coefficient catalog.

    Instances are time-homogeneous scalar functions of the state.  They
    evaluate on scalars or numpy arrays, serialize to the ``kind(p1,p2)``
    config syntax, and expose symbolic tail metadata via `tail_exponent`.
    """

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in _KIND_ARITY:
            raise ConfigError(f"unknown coefficient kind {self.kind!r}")
        params = tuple(float(p) for p in self.params)
        if len(params) != _KIND_ARITY[self.kind]:
            raise ConfigError(
                f"coefficient {self.kind!r} takes {_KIND_ARITY[self.kind]} "
                f"parameter(s), got {len(params)}"
            )
        if not all(math.isfinite(p) for p in params):
            raise ConfigError(f"coefficient {self.kind!r} parameters must be finite")
        object.__setattr__(self, "params", params)

    # construction helpers, one per catalog member
    @classmethod
    def constant(cls, c: float) -> "CoefFn":
        return cls("constant", (c,))

    @classmethod
    def linear(cls, m: float, b: float) -> "CoefFn":
        return cls("linear", (m, b))

    @classmethod
    def power(cls, c: float, p: float) -> "CoefFn":
        return cls("power", (c, p))

    @classmethod
    def sqrt_abs(cls, c: float) -> "CoefFn":
        return cls("sqrt_abs", (c,))

    @classmethod
    def reciprocal1p(cls, c: float) -> "CoefFn":
        return cls("reciprocal1p", (c,))

    @classmethod
    def sin_shift(cls, c: float, d: float) -> "CoefFn":
        return cls("sin_shift", (c, d))

    @classmethod
    def affine_mean_rev(cls, a: float, b: float) -> "CoefFn":
        return cls("affine_mean_rev", (a, b))

    @classmethod
    def sqrt_y(cls, c: float) -> "CoefFn":
        return cls("sqrt_y", (c,))

    @classmethod
    def identity(cls) -> "CoefFn":
        return cls("linear", (1.0, 0.0))

    def __call__(self, y):
        """Evaluate at a scalar or array argument."""
        arr = np.asarray(y, dtype=np.float64)
        p = self.params
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "constant":
                out = np.full(arr.shape, p[0])
            elif self.kind == "linear":
                out = p[0] * arr + p[1]
            elif self.kind == "power":
                out = p[0] * np.abs(arr) ** p[1]
            elif self.kind == "sqrt_abs":
                out = p[0] * np.sqrt(np.abs(arr))
            elif self.kind == "reciprocal1p":
                out = p[0] / (1.0 + arr)
            elif self.kind == "sin_shift":
                out = p[0] + p[1] * np.sin(arr)
            elif self.kind == "affine_mean_rev":
                out = p[0] * (p[1] - arr)
            else:  # sqrt_y
                out = p[0] * np.sqrt(arr)
        if arr.ndim == 0:
            return float(out)
        return out

    def kernel_args(self) -> tuple[int, float, float]:
        """(code, p1, p2) triple for the jitted Euler kernel."""
        padded = self.params + (0.0,) * (2 - len(self.params))
        return (KERNEL_CODES[self.kind], padded[0], padded[1])

    def tail_exponent(self, boundary: float) -> float | None:
        """Power-law exponent of |f| at a domain boundary, or None.

        ``boundary`` is one of ``-inf``, ``0.0`` (meaning y -> 0+), ``+inf``.
        A returned exponent q is two-sided: |f(y)| is bounded between
        positive multiples of |y|**q on a neighborhood of the boundary, so
        integrability tests on f**-2 can be decided from q alone.  None means
        the catalog metadata cannot certify such bounds (for example a
        sin_shift that oscillates through zero), in which case the classifier
        must answer `indeterminate`.
        """
        p = self.params
        at_zero = boundary == 0.0
        if self.kind == "constant":
            return 0.0 if p[0] != 0.0 else None
        if self.kind == "linear":
            m, b = p
            if at_zero:
                if b != 0.0:
                    return 0.0
                return 1.0 if m != 0.0 else None
            if m != 0.0:
                return 1.0
            return 0.0 if b != 0.0 else None
        if self.kind == "power":
            return p[1] if p[0] != 0.0 else None
        if self.kind == "sqrt_abs":
            return 0.5 if p[0] != 0.0 else None
        if self.kind == "reciprocal1p":
            if p[0] == 0.0:
                return None
            return 0.0 if at_zero else -1.0
        if self.kind == "sin_shift":
            c, d = p
            # |c| > |d| keeps the function bounded away from zero everywhere
            return 0.0 if abs(c) > abs(d) else None
        if self.kind == "affine_mean_rev":
            a, b = p
            if a == 0.0:
                return None
            if at_zero:
                return 0.0 if b != 0.0 else 1.0
            return 1.0
        # sqrt_y
        if p[0] == 0.0 or boundary == -_INF:
            return None
        return 0.5

    def domain_problem(self, lo: float, hi: float) -> str | None:
        """Why this coefficient is ill-defined or unbounded on (lo, hi)."""
        if self.kind == "reciprocal1p" and lo < -1.0 < hi:
            return "reciprocal1p has a pole at y = -1 inside the state domain"
        if self.kind == "sqrt_y" and lo < 0.0:
            return "sqrt_y is undefined for y < 0"
        return None

    def describe(self) -> str:
        """Config-file form, e.g. ``power(1,0.25)``."""
        return f"{self.kind}({','.join(_fmt(v) for v in self.params)})"

    @classmethod
    def parse(cls, text: str) -> "CoefFn":
        """Inverse of `describe`."""
        m = re.fullmatch(r"\s*([a-z0-9_]+)\s*\((.*)\)\s*", text)
        if not m:
            raise ConfigError(
                f"cannot parse coefficient {text!r}: expected kind(p1,p2,...)"
            )
        kind, argstr = m.group(1), m.group(2).strip()
        try:
            params = tuple(float(s) for s in argstr.split(",")) if argstr else ()
        except ValueError:
            raise ConfigError(f"non-numeric parameter in coefficient {text!r}") from None
        return cls(kind, params)


# ---------------------------------------------------------------------------
# volatility models

_VOL_PARAM_NAMES = {
    "bachelier": ("alpha", "beta"),
    "vasicek": ("a", "b", "gamma"),
    "gbm": ("alpha", "beta"),
    "cir": ("a", "b", "gamma"),
}


@dataclass(frozen=True)
class VolatilityModel:
    """The autonomous factor dY = alpha(Y) dt + beta(Y) dW1.

    Four kinds are shipped, each with its state domain J:

    ==========  ======================  ========================  ===========
    kind        alpha(y)                beta(y)                   J
    ==========  ======================  ========================  ===========
    bachelier   alpha                   beta != 0                 (-inf, inf)
    vasicek     a*(b-y)                 gamma > 0                 (-inf, inf)
    gbm         alpha*y                 beta*y, beta != 0         (0, inf)
    cir         a*(b-y), a,b > 0        gamma*sqrt(y), gamma > 0  (0, inf)
    ==========  ======================  ========================  ===========

    cir additionally demands 2ab >= gamma**2 so the process never reaches 0.
    Constructors reject violations; pass ``validate=False`` only to build
    specimens for `validate_spec` reporting.
    """

    kind: str
    params: tuple[float, ...]
    y0: float
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        if self.kind not in _VOL_PARAM_NAMES:
            raise ConfigError(f"unknown volatility kind {self.kind!r}")
        params = tuple(float(p) for p in self.params)
        names = _VOL_PARAM_NAMES[self.kind]
        if len(params) != len(names):
            raise ConfigError(
                f"volatility {self.kind!r} takes parameters {names}, "
                f"got {len(params)} value(s)"
            )
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "y0", float(self.y0))
        if validate:
            problems = self.structural_problems()
            if problems:
                raise DomainError("; ".join(problems))

    @classmethod
    def bachelier(cls, alpha: float, beta: float, y0: float) -> "VolatilityModel":
        return cls("bachelier", (alpha, beta), y0)

    @classmethod
    def vasicek(cls, a: float, b: float, gamma: float, y0: float) -> "VolatilityModel":
        return cls("vasicek", (a, b, gamma), y0)

    @classmethod
    def gbm(cls, alpha: float, beta: float, y0: float) -> "VolatilityModel":
        return cls("gbm", (alpha, beta), y0)

    @classmethod
    def cir(cls, a: float, b: float, gamma: float, y0: float) -> "VolatilityModel":
        return cls("cir", (a, b, gamma), y0)

    @property
    def domain(self) -> tuple[float, float]:
        """Open state interval J = (l, r)."""
        if self.kind in ("gbm", "cir"):
            return (0.0, _INF)
        return (-_INF, _INF)

    @property
    def param_dict(self) -> dict[str, float]:
        return dict(zip(_VOL_PARAM_NAMES[self.kind], self.params))

    @property
    def drift(self) -> CoefFn:
        p = self.params
        if self.kind == "bachelier":
            return CoefFn.constant(p[0])
        if self.kind == "vasicek":
            return CoefFn.affine_mean_rev(p[0], p[1])
        if self.kind == "gbm":
            return CoefFn.linear(p[0], 0.0)
        return CoefFn.affine_mean_rev(p[0], p[1])

    @property
    def diffusion(self) -> CoefFn:
        p = self.params
        if self.kind == "bachelier":
            return CoefFn.constant(p[1])
        if self.kind == "vasicek":
            return CoefFn.constant(p[2])
        if self.kind == "gbm":
            return CoefFn.linear(p[1], 0.0)
        return CoefFn.sqrt_y(p[2])

    def feller_margin(self) -> float | None:
        """2ab - gamma**2 for cir (>= 0 keeps Y off the origin), else None."""
        if self.kind != "cir":
            return None
        a, b, gamma = self.params
        return 2.0 * a * b - gamma * gamma

    def param_problems(self) -> list[str]:
        """Parameter constraint violations other than the Feller condition."""
        out = []
        p = self.params
        if not all(math.isfinite(v) for v in p + (self.y0,)):
            out.append("parameters and y0 must be finite")
        if self.kind in ("bachelier", "gbm") and p[1] == 0.0:
            out.append(f"{self.kind} requires beta != 0")
        if self.kind in ("vasicek", "cir") and p[2] <= 0.0:
            out.append(f"{self.kind} requires gamma > 0")
        if self.kind == "cir" and (p[0] <= 0.0 or p[1] <= 0.0):
            out.append("cir requires a > 0 and b > 0")
        return out

    def structural_problems(self) -> list[str]:
        """All constraint violations, as text.  Empty means well-posed."""
        out = self.param_problems()
        margin = self.feller_margin()
        if margin is not None and not out and margin < 0.0:
            a, b, gamma = self.params
            out.append(
                f"cir requires 2ab >= gamma^2 "
                f"(2ab={_fmt(2 * a * b)}, gamma^2={_fmt(gamma * gamma)})"
            )
        lo, hi = self.domain
        if not (lo < self.y0 < hi):
            out.append(f"y0={_fmt(self.y0)} is not strictly inside ({lo}, {hi})")
        return out

    def describe(self) -> str:
        return f"{self.kind}({','.join(_fmt(v) for v in self.params)})"


# ---------------------------------------------------------------------------
# full model specification

_IDENTITY = CoefFn.identity()


@dataclass(frozen=True)
class ModelSpec:
    """Everything that defines one (X, Y) model instance.

    ``linear_flag`` marks the specialization a(x) = x, sigma1(x) = x, for
    which `estimate.estimate_theta_linear` applies; it requires x0 != 0.
    """

    theta: float
    a: CoefFn
    sigma1: CoefFn
    sigma2: CoefFn
    vol: VolatilityModel
    x0: float
    rho: float = 0.0
    linear_flag: bool = False
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "rho", float(self.rho))
        if validate:
            if not abs(self.rho) <= 1.0:
                raise DomainError(f"rho={_fmt(self.rho)} outside [-1, 1]")
            if self.linear_flag:
                if self.a != _IDENTITY or self.sigma1 != _IDENTITY:
                    raise DomainError(
                        "linear_flag requires a and sigma1 to be linear(1,0)"
                    )
                if self.x0 == 0.0:
                    raise DomainError("linear_flag requires x0 != 0")


def linear_spec(
    theta: float,
    sigma2: CoefFn,
    vol: VolatilityModel,
    x0: float = 1.0,
    rho: float = 0.0,
) -> ModelSpec:
    """Spec for dX = theta*X dt + X*sigma2(Y) dW (a and sigma1 identity)."""
    return ModelSpec(
        theta=theta,
        a=CoefFn.identity(),
        sigma1=CoefFn.identity(),
        sigma2=sigma2,
        vol=vol,
        x0=x0,
        rho=rho,
        linear_flag=True,
    )


# ---------------------------------------------------------------------------
# time grids

@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k*h, k = 0..n, with n = round(T/h).

    h must divide T: the rounded node count has to land back on T within one
    representable rounding unit.
    """

    horizon: float
    step: float

    def __post_init__(self):
        T = float(self.horizon)
        h = float(self.step)
        object.__setattr__(self, "horizon", T)
        object.__setattr__(self, "step", h)
        if not (math.isfinite(T) and math.isfinite(h) and T > 0.0 and h > 0.0):
            raise DomainError(f"need finite T > 0 and h > 0, got T={T}, h={h}")
        n = round(T / h)
        if n < 1 or not math.isclose(n * h, T, rel_tol=1e-9, abs_tol=1e-12):
            raise DomainError(f"step h={_fmt(h)} does not divide horizon T={_fmt(T)}")

    @property
    def n(self) -> int:
        return round(self.horizon / self.step)

    def times(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.step

    def prefix(self, horizon: float) -> "TimeGrid":
        """Subgrid [0, horizon] with the same step."""
        if horizon > self.horizon:
            raise DomainError(
                f"prefix horizon {_fmt(horizon)} exceeds grid horizon "
                f"{_fmt(self.horizon)}"
            )
        return TimeGrid(horizon, self.step)


# ---------------------------------------------------------------------------
# structural validation

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of `validate_spec`: a list of named checks, never an exception."""

    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def format(self) -> str:
        width = max(len(c.name) for c in self.checks)
        lines = []
        for c in self.checks:
            status = "ok" if c.passed else "FAIL"
            tail = f"  {c.detail}" if c.detail else ""
            lines.append(f"{c.name.ljust(width)} : {status}{tail}")
        return "\n".join(lines)


def validate_spec(spec: ModelSpec) -> ValidationReport:
    """Run all structural checks on a spec and report them.

    Returns a report object; it never raises, so callers decide whether a
    failed check aborts.  Checks that do not apply to the given model kind
    are reported as passed with a "not applicable" detail.
    """
    lo, hi = spec.vol.domain
    checks = []

    checks.append(
        CheckResult(
            "rho_range",
            abs(spec.rho) <= 1.0,
            f"rho={_fmt(spec.rho)}",
        )
    )
    checks.append(
        CheckResult(
            "y0_in_domain",
            lo < spec.vol.y0 < hi,
            f"y0={_fmt(spec.vol.y0)}, J=({lo}, {hi})",
        )
    )

    param_problems = spec.vol.param_problems()
    checks.append(
        CheckResult(
            "vol_params",
            not param_problems,
            "; ".join(param_problems) if param_problems else spec.vol.describe(),
        )
    )

    margin = spec.vol.feller_margin()
    if margin is None:
        checks.append(CheckResult("feller", True, "not applicable"))
    else:
        checks.append(
            CheckResult("feller", margin >= 0.0, f"2ab - gamma^2 = {_fmt(margin)}")
        )

    problem = spec.sigma2.domain_problem(lo, hi)
    checks.append(
        CheckResult(
            "sigma2_domain",
            problem is None,
            problem or f"sigma2={spec.sigma2.describe()} defined on J",
        )
    )

    if spec.linear_flag:
        issues = []
        if spec.a != _IDENTITY:
            issues.append("a must be linear(1,0)")
        if spec.sigma1 != _IDENTITY:
            issues.append("sigma1 must be linear(1,0)")
        if spec.x0 == 0.0:
            issues.append("x0 must be nonzero")
        checks.append(
            CheckResult("linear_consistency", not issues, "; ".join(issues))
        )
    else:
        checks.append(CheckResult("linear_consistency", True, "not applicable"))

    return ValidationReport(tuple(checks))


# ---------------------------------------------------------------------------
# flat key=value config form

MODEL_CONFIG_KEYS = (
    "theta",
    "a",
    "sigma1",
    "sigma2",
    "vol.kind",
    "vol.params",
    "y0",
    "x0",
    "rho",
)


def _parse_float(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot parse {text!r} as a number") from None


def spec_from_config(cfg: Mapping[str, str], validate: bool = True) -> ModelSpec:
    """Build a ModelSpec from flat key=value text fields.

    Required keys: theta, a, sigma1, sigma2, vol.kind, vol.params, y0, x0.
    rho defaults to 0.  The linear flag is inferred: it is set exactly when
    a and sigma1 are both linear(1,0) and x0 != 0.  validate=False skips the
    constructor guards so a questionable spec can still be inspected with
    `validate_spec`.
    """
    required = ("theta", "a", "sigma1", "sigma2", "vol.kind", "vol.params", "y0", "x0")
    missing = [k for k in required if k not in cfg]
    if missing:
        raise ConfigError(f"missing config key(s): {', '.join(missing)}")

    try:
        vol_params = tuple(
            _parse_float("vol.params", s) for s in cfg["vol.params"].split(",")
        )
    except ConfigError:
        raise
    vol = VolatilityModel(
        cfg["vol.kind"].strip(),
        vol_params,
        _parse_float("y0", cfg["y0"]),
        validate=validate,
    )

    a = CoefFn.parse(cfg["a"])
    sigma1 = CoefFn.parse(cfg["sigma1"])
    sigma2 = CoefFn.parse(cfg["sigma2"])
    x0 = _parse_float("x0", cfg["x0"])
    rho = _parse_float("rho", cfg.get("rho", "0"))
    linear = a == _IDENTITY and sigma1 == _IDENTITY and x0 != 0.0

    return ModelSpec(
        theta=_parse_float("theta", cfg["theta"]),
        a=a,
        sigma1=sigma1,
        sigma2=sigma2,
        vol=vol,
        x0=x0,
        rho=rho,
        linear_flag=linear,
        validate=validate,
    )


def spec_to_config(spec: ModelSpec) -> dict[str, str]:
    """Flat key=value form of a spec; inverse of `spec_from_config`."""
    return {
        "theta": _fmt(spec.theta),
        "a": spec.a.describe(),
        "sigma1": spec.sigma1.describe(),
        "sigma2": spec.sigma2.describe(),
        "vol.kind": spec.vol.kind,
        "vol.params": ",".join(_fmt(v) for v in spec.vol.params),
        "y0": _fmt(spec.vol.y0),
        "x0": _fmt(spec.x0),
        "rho": _fmt(spec.rho),
    }
