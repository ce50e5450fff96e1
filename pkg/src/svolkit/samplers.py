"""Single-site posterior updates for the volatility path and the parameters.

The volatility update is the accept/reject Metropolis-Hastings (AR-MH)
scheme with a moment-matched inverse-gamma proposal. Parameter updates are
exact conjugate draws when the volatility error is Gaussian and AR-MH steps
(conjugate posterior as proposal) when it is replaced by a kernel estimate.

All heavy lifting happens in :mod:`svolkit._kernels`; these wrappers take the
typed objects used across the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from . import _kernels as K
from .density import KernelDensity, null_kernel_tuple
from .model import ModelParams, Priors

__all__ = [
    "ProposalDegenerateError",
    "LocalMoments",
    "IGProposal",
    "SufficientStats",
    "TargetKind",
    "TargetSpec",
    "GAUSSIAN_TARGET",
    "DEFAULT_C_STAR",
    "FIRST_STAGE_CAP",
    "local_moments",
    "ig_proposal",
    "ig_logpdf",
    "log_target_h",
    "sample_h",
    "sufficient_stats",
    "s_prime",
    "delta_posterior",
    "alpha_posterior",
    "sigma2_posterior",
    "sample_sigma2",
    "sample_delta",
    "sample_alpha",
]

DEFAULT_C_STAR = 1.2
FIRST_STAGE_CAP = 1000


class ProposalDegenerateError(ValueError):
    """The local variance is too small for a usable inverse-gamma proposal."""


@dataclass(frozen=True)
class LocalMoments:
    mu_t: float
    sigma2: float


@dataclass(frozen=True)
class IGProposal:
    lam: float  # shape
    phi: float  # scale

    @property
    def mode(self) -> float:
        return self.phi / (self.lam + 1.0)


@dataclass(frozen=True)
class SufficientStats:
    s1: float
    s2: float
    s3: float


class TargetKind(str, Enum):
    GAUSSIAN = "gaussian"
    NSVM1 = "nsvm1"
    NSVM2 = "nsvm2"

    @property
    def code(self) -> int:
        return {"gaussian": K.GAUSSIAN, "nsvm1": K.NSVM1, "nsvm2": K.NSVM2}[self.value]


@dataclass(frozen=True)
class TargetSpec:
    """Which conditional posterior to sample.

    ``raw_plugin`` evaluates f_hat at y/sqrt(h) on its standardized axis
    instead of mapping through the stored center/scale. ``g_scale_raw``
    scales the g_hat argument by sigma_nu instead of the local sd.
    ``g_joint`` replaces g_hat at the two-sided residual by the product
    g_hat(e_t) g_hat(e_{t+1}) of the one-sided AR residuals, the h_t
    conditional of the same joint density the parameter updates use; it
    needs the neighbours and (alpha, delta).
    """

    kind: TargetKind = TargetKind.GAUSSIAN
    f_hat: Optional[KernelDensity] = None
    g_hat: Optional[KernelDensity] = None
    raw_plugin: bool = False
    g_scale_raw: bool = False
    g_joint: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", TargetKind(self.kind))
        if self.kind is not TargetKind.GAUSSIAN and self.f_hat is None:
            raise ValueError(f"{self.kind.value} needs f_hat")
        if self.kind is TargetKind.NSVM2 and self.g_hat is None:
            raise ValueError("nsvm2 needs g_hat")

    def kernel_args(self):
        fd = self.f_hat.as_kernel_tuple() if self.f_hat is not None else null_kernel_tuple()
        gd = self.g_hat.as_kernel_tuple() if self.g_hat is not None else null_kernel_tuple()
        return self.kind.code, fd, gd


GAUSSIAN_TARGET = TargetSpec()


def local_moments(ln_h_prev: float, ln_h_next: float, params: ModelParams) -> LocalMoments:
    a, d = params.alpha, params.delta
    denom = 1.0 + d * d
    mu = (d * (ln_h_next + ln_h_prev) + a * (1.0 - d)) / denom
    return LocalMoments(mu_t=mu, sigma2=params.sigma_nu ** 2 / denom)


def ig_proposal(m: LocalMoments, y_t: float) -> IGProposal:
    """Inverse-gamma proposal matched to the log-normal factor of p(h_t | .).

    Shape (1 - 2e^s)/(1 - e^s) + 1/2 is evaluated as 5/2 + 1/expm1(s), the
    same quantity without cancellation for small s.
    """
    if not m.sigma2 >= K.SIGMA2_GUARD or not math.isfinite(m.sigma2):
        raise ProposalDegenerateError(f"local variance {m.sigma2!r} below guard")
    lam, phi = K.ig_params(m.mu_t, m.sigma2, y_t)
    return IGProposal(lam=lam, phi=phi)


def ig_logpdf(h, shape: float, scale: float):
    h = np.asarray(h, dtype=np.float64)
    return shape * math.log(scale) - math.lgamma(shape) - (shape + 1.0) * np.log(h) - scale / h


def _ar_args(spec: TargetSpec, neighbours, params):
    if not (spec.g_joint and spec.kind is TargetKind.NSVM2):
        return False, 0.0, 0.0, 0.0, 0.0
    if neighbours is None or params is None:
        raise ValueError("g_joint needs the neighbouring log-volatilities and params")
    lp, ln_ = neighbours
    return True, float(lp), float(ln_), float(params.alpha), float(params.delta)


def log_target_h(spec: TargetSpec, y_t: float, h: float, m: LocalMoments, sigma_nu: float,
                 neighbours: Optional[tuple[float, float]] = None,
                 params: Optional[ModelParams] = None) -> float:
    """Log conditional density of h_t, up to an additive constant.

    ``neighbours`` = (ln h_{t-1}, ln h_{t+1}) and ``params`` are only read
    by the ``g_joint`` form.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    kind, fd, gd = spec.kernel_args()
    return K.log_target_h(kind, float(y_t), math.log(h), m.mu_t, m.sigma2, float(sigma_nu),
                          fd, gd, spec.raw_plugin, spec.g_scale_raw,
                          *_ar_args(spec, neighbours, params))


def sample_h(spec: TargetSpec, y_t: float, m: LocalMoments, sigma_nu: float, h_old: float,
             c_star: float, rng: np.random.Generator, cap: int = FIRST_STAGE_CAP,
             neighbours: Optional[tuple[float, float]] = None,
             params: Optional[ModelParams] = None) -> float:
    """One AR-MH update of h_t from ``h_old``."""
    if not h_old > 0:
        raise ValueError("h_old must be positive")
    ig_proposal(m, y_t)  # validates the local variance
    kind, fd, gd = spec.kernel_args()
    h, _, _, _ = K.sample_h_kernel(kind, float(y_t), m.mu_t, m.sigma2, float(sigma_nu),
                                   float(h_old), float(c_star), rng, fd, gd,
                                   spec.raw_plugin, spec.g_scale_raw, int(cap),
                                   *_ar_args(spec, neighbours, params))
    return h


def sufficient_stats(ln_h) -> SufficientStats:
    x = np.ascontiguousarray(ln_h, dtype=np.float64)
    return SufficientStats(*K.suff_stats(x))


def s_prime(priors: Priors, alpha: float, delta: float, ln_h,
            st: Optional[SufficientStats] = None) -> float:
    """s0 plus the AR(1) residual sum of squares, from sufficient statistics."""
    x = np.ascontiguousarray(ln_h, dtype=np.float64)
    if x.size < 2:
        raise ValueError("need at least two log-volatilities")
    st = st or sufficient_stats(x)
    return K.s_prime(priors.s0, alpha, delta, x, st.s1, st.s2, st.s3)


def sigma2_posterior(priors: Priors, s_prime_value: float, n: int) -> tuple[float, float]:
    """(shape, scale) of the conjugate inverse-gamma posterior of sigma_nu^2."""
    return 0.5 * (priors.nu0 + n - 1), 0.5 * s_prime_value


def delta_posterior(priors: Priors, alpha: float, sigma2: float, ln_h,
                    st: Optional[SufficientStats] = None) -> tuple[float, float]:
    x = np.ascontiguousarray(ln_h, dtype=np.float64)
    st = st or sufficient_stats(x)
    return K.delta_moments(priors.as_array(), alpha, sigma2, x, st.s1, st.s2, st.s3)


def alpha_posterior(priors: Priors, delta: float, sigma2: float, ln_h,
                    st: Optional[SufficientStats] = None) -> tuple[float, float]:
    x = np.ascontiguousarray(ln_h, dtype=np.float64)
    st = st or sufficient_stats(x)
    return K.alpha_moments(priors.as_array(), delta, sigma2, x, st.s1)


def _gd(target: TargetSpec):
    return target.kernel_args()[2]


def sample_sigma2(priors: Priors, s_prime_value: float, ln_h, alpha: float, delta: float,
                  target: TargetSpec, sigma2_old: float, rng: np.random.Generator,
                  cap: int = FIRST_STAGE_CAP) -> float:
    if not s_prime_value > 0:
        raise ValueError("s_prime must be positive")
    x = np.ascontiguousarray(ln_h, dtype=np.float64)
    v, _, _, _ = K.update_sigma2(target.kind.code, priors.as_array(), float(s_prime_value), x,
                                 float(alpha), float(delta), float(sigma2_old), rng,
                                 _gd(target), int(cap))
    return v


def sample_delta(priors: Priors, alpha: float, sigma2: float, ln_h, target: TargetSpec,
                 delta_old: float, rng: np.random.Generator,
                 st: Optional[SufficientStats] = None, cap: int = FIRST_STAGE_CAP) -> float:
    x = np.ascontiguousarray(ln_h, dtype=np.float64)
    st = st or sufficient_stats(x)
    v, _, _, _ = K.update_delta(target.kind.code, priors.as_array(), float(alpha), float(sigma2),
                                x, st.s1, st.s2, st.s3, float(delta_old), rng, _gd(target),
                                int(cap))
    return v


def sample_alpha(priors: Priors, delta: float, sigma2: float, ln_h, target: TargetSpec,
                 alpha_old: float, rng: np.random.Generator,
                 st: Optional[SufficientStats] = None, cap: int = FIRST_STAGE_CAP) -> float:
    x = np.ascontiguousarray(ln_h, dtype=np.float64)
    st = st or sufficient_stats(x)
    v, _, _, _ = K.update_alpha(target.kind.code, priors.as_array(), float(delta), float(sigma2),
                                x, st.s1, float(alpha_old), rng, _gd(target), int(cap))
    return v
