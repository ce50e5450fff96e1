"""Taylor stochastic-volatility model: parameters, priors, error laws and DGP.

    y_t     = sqrt(h_t) * u_t
    ln h_t  = alpha + delta * ln h_{t-1} + sigma_nu * nu_t

Series are 0-based: observation ``t`` of an ``n``-long path lives at index
``t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln

from .rng import make_rng

__all__ = [
    "ModelParams",
    "Priors",
    "ErrorKind",
    "ErrorSpec",
    "SimulatedPath",
    "NonStationaryError",
    "IngestionError",
    "PAPER_PARAMS",
    "VOLATILITY_PARAMS",
    "stationary_moments",
    "ged_scale",
    "draw_error",
    "simulate_path",
    "log_returns",
]


class NonStationaryError(ValueError):
    """Raised when |delta| >= 1 where a stationary law is required."""


class IngestionError(ValueError):
    """Raised for invalid price input."""


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    delta: float
    sigma_nu: float

    def __post_init__(self):
        if not self.sigma_nu > 0:
            raise ValueError(f"sigma_nu must be positive, got {self.sigma_nu}")

    @property
    def is_stationary(self) -> bool:
        return abs(self.delta) < 1.0


# Simulation design for parameter studies and for the volatility study.
PAPER_PARAMS = ModelParams(alpha=-0.15, delta=0.985, sigma_nu=0.15)
VOLATILITY_PARAMS = ModelParams(alpha=-0.10, delta=0.985, sigma_nu=0.15)


@dataclass(frozen=True)
class Priors:
    """Normal priors on alpha and delta, IG(nu0/2, s0/2) prior on sigma_nu^2."""

    alpha0: float = 0.0
    sigma_alpha2: float = 100.0
    delta0: float = 0.0
    sigma_delta2: float = 100.0
    nu0: float = 3.0
    s0: float = 0.03

    def __post_init__(self):
        for name in ("sigma_alpha2", "sigma_delta2", "nu0", "s0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.alpha0, self.sigma_alpha2, self.delta0, self.sigma_delta2, self.nu0, self.s0],
            dtype=np.float64,
        )


class ErrorKind(str, Enum):
    GAUSSIAN = "gaussian"
    STUDENT_T = "t"
    GED = "ged"


@dataclass(frozen=True)
class ErrorSpec:
    """Distribution of a standardized model innovation.

    Student-t draws are raw t(df) (variance df/(df-2)) unless ``standardize``
    is set. GED draws always have mean 0 and variance 1.
    """

    kind: ErrorKind = ErrorKind.GAUSSIAN
    df: float = 10.0
    shape: float = 1.5
    standardize: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", ErrorKind(self.kind))
        if self.kind is ErrorKind.STUDENT_T and not self.df > 2:
            raise ValueError("Student-t errors need df > 2")
        if self.kind is ErrorKind.GED and not self.shape > 0:
            raise ValueError("GED shape must be positive")

    @classmethod
    def gaussian(cls) -> "ErrorSpec":
        return cls(ErrorKind.GAUSSIAN)

    @classmethod
    def student_t(cls, df: float = 10.0, standardize: bool = False) -> "ErrorSpec":
        return cls(ErrorKind.STUDENT_T, df=df, standardize=standardize)

    @classmethod
    def ged(cls, shape: float = 1.5) -> "ErrorSpec":
        return cls(ErrorKind.GED, shape=shape)


@dataclass(frozen=True)
class SimulatedPath:
    returns: np.ndarray
    volatility: np.ndarray
    ln_volatility: np.ndarray
    seed: int

    def __len__(self):
        return len(self.returns)


def stationary_moments(params: ModelParams) -> tuple[float, float]:
    """Stationary mean and standard deviation of ln h_t."""
    d = params.delta
    if not abs(d) < 1.0:
        raise NonStationaryError(f"stationary moments need |delta| < 1, got {d}")
    return params.alpha / (1.0 - d), params.sigma_nu / math.sqrt(1.0 - d * d)


def ged_scale(shape: float) -> float:
    """Scale giving a GED with density prop. to exp(-|x/scale|^shape / 2) unit variance."""
    return math.sqrt(2.0 ** (-2.0 / shape) * math.exp(gammaln(1.0 / shape) - gammaln(3.0 / shape)))


def draw_error(spec: ErrorSpec, rng: np.random.Generator, size=None):
    """Draw from ``spec``; a scalar when ``size`` is None."""
    if spec.kind is ErrorKind.GAUSSIAN:
        out = rng.standard_normal(size)
    elif spec.kind is ErrorKind.STUDENT_T:
        out = rng.standard_t(spec.df, size)
        if spec.standardize:
            out = out / math.sqrt(spec.df / (spec.df - 2.0))
    else:
        # |X / scale|^p / 2 ~ Gamma(1/p, 1)
        p = spec.shape
        g = rng.standard_gamma(1.0 / p, size)
        sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
        out = sign * ged_scale(p) * (2.0 * g) ** (1.0 / p)
    return float(out) if size is None else out


def simulate_path(
    params: ModelParams,
    obs_spec: ErrorSpec,
    vol_spec: ErrorSpec,
    n: int,
    seed: int,
) -> SimulatedPath:
    """Simulate ``n`` returns; ln h_0 starts from the stationary normal law."""
    if n < 2:
        raise ValueError("need n >= 2")
    mean, sd = stationary_moments(params)
    rng = make_rng(seed)
    ln_h = np.empty(n)
    ln_h[0] = mean + sd * rng.standard_normal()
    nu = draw_error(vol_spec, rng, n - 1)
    for t in range(1, n):
        ln_h[t] = params.alpha + params.delta * ln_h[t - 1] + params.sigma_nu * nu[t - 1]
    u = draw_error(obs_spec, rng, n)
    h = np.exp(ln_h)
    y = np.sqrt(h) * u
    for a in (y, h, ln_h):
        a.setflags(write=False)
    return SimulatedPath(returns=y, volatility=h, ln_volatility=ln_h, seed=int(seed))


def log_returns(prices) -> np.ndarray:
    p = np.asarray(prices, dtype=np.float64)
    if p.ndim != 1 or p.size < 2:
        raise IngestionError("need at least two prices")
    bad = np.flatnonzero(~(p > 0))
    if bad.size:
        raise IngestionError(f"non-positive price {p[bad[0]]!r} at index {bad[0]}")
    return np.diff(np.log(p))
