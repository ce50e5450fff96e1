"""Gaussian-kernel density estimates of standardized residuals."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels as K

__all__ = [
    "DegenerateSampleError",
    "KernelDensity",
    "standardize",
    "bandwidth_default",
    "kde_fit",
    "kde_fit_residuals",
    "null_kernel_tuple",
    "kde_logpdf",
    "kde_pdf",
    "LOG_TINY",
    "DEFAULT_GRID",
]

LOG_TINY = K.LOG_TINY
DEFAULT_GRID = 4096
# grid padding, in bandwidths, beyond the extreme points
_GRID_PAD = 10.0


class DegenerateSampleError(ValueError):
    """Raised when a sample has no dispersion."""


@dataclass(frozen=True)
class KernelDensity:
    """Fitted KDE on a standardized sample.

    ``points`` live on the standardized axis; ``center`` and ``scale`` map a
    raw value ``v`` there via ``(v - center) / scale``. ``grid_size`` sets the
    resolution of the log-density table used inside the samplers (0 keeps
    every evaluation exact).
    """

    points: np.ndarray
    bandwidth: float
    center: float = 0.0
    scale: float = 1.0
    grid_size: int = DEFAULT_GRID

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim != 1 or pts.size == 0:
            raise ValueError("KernelDensity needs a non-empty 1-d sample")
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.size

    def logpdf(self, x):
        """Exact log density on the standardized axis (floored at ln 1e-300)."""
        x = np.asarray(x, dtype=np.float64)
        out = K.kde_log_exact_many(self.points, float(self.bandwidth), np.atleast_1d(x).ravel())
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def logpdf_raw(self, v):
        """Log density of the unstandardized variable."""
        v = np.asarray(v, dtype=np.float64)
        return self.logpdf((v - self.center) / self.scale) - np.log(self.scale)

    @cached_property
    def table(self) -> tuple[np.ndarray, float, float]:
        if self.grid_size < 2:
            return np.empty(0), 0.0, 1.0
        pad = _GRID_PAD * self.bandwidth
        lo = float(self.points.min() - pad)
        hi = float(self.points.max() + pad)
        grid = np.linspace(lo, hi, int(self.grid_size))
        vals = K.kde_log_exact_many(self.points, float(self.bandwidth), grid)
        return vals, lo, float(grid[1] - grid[0])

    def as_kernel_tuple(self):
        tab, lo, step = self.table
        return (tab, lo, step, self.points, float(self.bandwidth),
                float(self.center), float(self.scale))


def null_kernel_tuple():
    """Placeholder density for targets that do not use one."""
    e = np.empty(0)
    return (e, 0.0, 1.0, np.zeros(1), 1.0, 0.0, 1.0)


def standardize(samples) -> tuple[np.ndarray, float, float]:
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise DegenerateSampleError("need at least two samples")
    mean = float(x.mean())
    sd = float(x.std(ddof=1))
    if not sd > 0:
        raise DegenerateSampleError("sample has zero variance")
    return (x - mean) / sd, mean, sd


def bandwidth_default(samples) -> float:
    """Silverman's rule of thumb as in R's ``bw.nrd0``.

    b = 0.9 * min(sd, IQR / 1.34) * n^(-1/5), falling back to sd when the
    IQR vanishes.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise DegenerateSampleError("need at least two samples")
    sd = float(x.std(ddof=1))
    q75, q25 = np.percentile(x, [75, 25])
    iqr = float(q75 - q25)
    lo = min(sd, iqr / 1.34) if iqr > 0 else sd
    if not lo > 0:
        raise DegenerateSampleError("sample has no dispersion")
    return 0.9 * lo * x.size ** -0.2


def kde_fit(samples, bandwidth: float, center: float = 0.0, scale: float = 1.0,
            grid_size: int = DEFAULT_GRID) -> KernelDensity:
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot fit a KDE to an empty sample")
    return KernelDensity(points=x.copy(), bandwidth=float(bandwidth), center=float(center),
                         scale=float(scale), grid_size=grid_size)


def kde_fit_residuals(residuals, grid_size: int = DEFAULT_GRID) -> KernelDensity:
    """Standardize, pick the default bandwidth and fit."""
    z, mean, sd = standardize(residuals)
    return kde_fit(z, bandwidth_default(z), center=mean, scale=sd, grid_size=grid_size)


def kde_logpdf(kd: KernelDensity, x):
    return kd.logpdf(x)


def kde_pdf(kd: KernelDensity, x):
    return kd.pdf(x)
