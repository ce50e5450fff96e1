"""MCMC chain driver and posterior summaries."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np
from scipy.signal import fftconvolve

from . import _kernels as K
from .density import DEFAULT_GRID, KernelDensity, bandwidth_default
from .model import Priors
from .rng import make_rng
from .samplers import DEFAULT_C_STAR, FIRST_STAGE_CAP, TargetKind, TargetSpec

__all__ = [
    "ChainConfig",
    "ChainState",
    "Chain",
    "ChainSummary",
    "run_chain",
    "chain_summary",
    "kde_mode",
    "PARAM_NAMES",
]

PARAM_NAMES = ("alpha", "delta", "sigma_nu")
_COUNTER_NAMES = (
    "h_updates", "h_first_stage_draws", "h_mh_rejects", "h_cap_hits",
    "sigma2_draws", "sigma2_rejects", "delta_draws", "delta_rejects",
    "alpha_draws", "alpha_rejects", "param_cap_hits",
)


@dataclass(frozen=True)
class ChainConfig:
    """Run settings. ``iterations`` draws are kept after ``burn_in`` discarded ones."""

    iterations: int = 5000
    burn_in: int = 5000
    c_star: float = DEFAULT_C_STAR
    seed: int = 0
    model: TargetKind = TargetKind.GAUSSIAN
    raw_plugin: bool = False
    g_scale_raw: bool = False
    g_joint: bool = True
    standardize_t: bool = False
    refit_rounds: int = 1
    h_source: str = "last"
    warm_start: bool = False
    kde_grid: int = DEFAULT_GRID
    first_stage_cap: int = FIRST_STAGE_CAP

    def __post_init__(self):
        object.__setattr__(self, "model", TargetKind(self.model))
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if self.burn_in < 0:
            raise ValueError("burn_in must be non-negative")
        if not self.c_star > 0:
            raise ValueError("c_star must be positive")
        if self.refit_rounds < 1:
            raise ValueError("refit_rounds must be >= 1")
        if self.h_source not in ("mean", "last"):
            raise ValueError("h_source must be 'mean' or 'last'")
        if self.first_stage_cap < 1:
            raise ValueError("first_stage_cap must be >= 1")

    def with_(self, **kw) -> "ChainConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["model"] = self.model.value
        return d


@dataclass(frozen=True)
class ChainState:
    ln_h: np.ndarray
    alpha: float
    delta: float
    sigma2: float


@dataclass(frozen=True)
class Chain:
    h_draws: np.ndarray  # (iterations, N)
    alpha_draws: np.ndarray
    delta_draws: np.ndarray
    sigma2_draws: np.ndarray
    counters: dict
    final_state: ChainState
    model: TargetKind
    seed: int

    def __len__(self):
        return self.alpha_draws.size

    @property
    def sigma_nu_draws(self) -> np.ndarray:
        return np.sqrt(self.sigma2_draws)

    def param_draws(self, name: str) -> np.ndarray:
        if name == "sigma_nu":
            return self.sigma_nu_draws
        return getattr(self, f"{name}_draws")

    @property
    def h_acceptance(self) -> float:
        c = self.counters
        return 1.0 - c["h_mh_rejects"] / max(c["h_updates"], 1)

    @property
    def h_first_stage_rate(self) -> float:
        """Proposals accepted per first-stage draw."""
        c = self.counters
        return c["h_updates"] / max(c["h_first_stage_draws"], 1)

    def equals(self, other: "Chain") -> bool:
        return (
            np.array_equal(self.h_draws, other.h_draws)
            and np.array_equal(self.alpha_draws, other.alpha_draws)
            and np.array_equal(self.delta_draws, other.delta_draws)
            and np.array_equal(self.sigma2_draws, other.sigma2_draws)
            and self.counters == other.counters
        )


def _initial_state(y: np.ndarray) -> ChainState:
    v = float(np.var(y, ddof=1))
    if not v > 0:
        raise ValueError("returns have zero variance")
    return ChainState(ln_h=np.full(y.size, np.log(v)), alpha=0.0, delta=1.0, sigma2=0.1)


def run_chain(
    y,
    priors: Priors,
    config: ChainConfig,
    kdes: Optional[tuple[Optional[KernelDensity], Optional[KernelDensity]]] = None,
    init: Optional[ChainState] = None,
) -> Chain:
    """Run the single-site sampler on returns ``y``.

    Each sweep updates h_t for interior t, redraws the two endpoints from
    the AR(1) relation, then sigma_nu^2, alpha and delta. ``kdes`` carries
    (f_hat, g_hat) for the semiparametric targets. The default start is
    delta=1, alpha=0, sigma_nu^2=0.1, h = var(y).
    """
    y = np.array(y, dtype=np.float64)
    if y.ndim != 1 or y.size < 3:
        raise ValueError("need at least three returns")
    if not np.all(np.isfinite(y)):
        raise ValueError("returns contain non-finite values")
    f_hat, g_hat = kdes if kdes is not None else (None, None)
    target = TargetSpec(config.model, f_hat=f_hat, g_hat=g_hat,
                        raw_plugin=config.raw_plugin, g_scale_raw=config.g_scale_raw,
                        g_joint=config.g_joint)
    state = init if init is not None else _initial_state(y)
    if state.ln_h.shape != y.shape:
        raise ValueError("initial state length does not match y")
    kind, fd, gd = target.kernel_args()
    rng = make_rng(config.seed)
    h, a, d, s2, counts, last_ln_h = K.run_chain_kernel(
        kind, y, np.array(state.ln_h, dtype=np.float64), float(state.alpha),
        float(state.delta), float(state.sigma2), int(config.iterations), int(config.burn_in),
        float(config.c_star), priors.as_array(), rng, fd, gd,
        bool(config.raw_plugin), bool(config.g_scale_raw), int(config.first_stage_cap),
        bool(target.g_joint),
    )
    frac = float(np.mean(np.abs(d) >= 1.0))
    if frac > 0.01:
        warnings.warn(f"|delta| >= 1 in {frac:.1%} of retained draws", RuntimeWarning,
                      stacklevel=2)
    final = ChainState(ln_h=last_ln_h, alpha=float(a[-1]), delta=float(d[-1]),
                       sigma2=float(s2[-1]))
    return Chain(
        h_draws=h, alpha_draws=a, delta_draws=d, sigma2_draws=s2,
        counters=dict(zip(_COUNTER_NAMES, (int(c) for c in counts))),
        final_state=final, model=config.model, seed=int(config.seed),
    )


# ----------------------------------------------------------------- summaries

def kde_mode(draws, n_grid: int = 512, n_refine: int = 32) -> float:
    """Mode of the default-bandwidth KDE, taken over the draw points.

    A binned FFT pass on ``n_grid`` points locates the peak; the exact KDE is
    then maximized over the ``n_refine`` draws nearest to it.
    """
    x = np.asarray(draws, dtype=np.float64)
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        return lo
    b = bandwidth_default(x)
    a, z = lo - 3 * b, hi + 3 * b
    step = (z - a) / (n_grid - 1)
    # linear binning
    pos = (x - a) / step
    i = np.floor(pos).astype(np.int64)
    frac = pos - i
    w = np.bincount(i, 1.0 - frac, minlength=n_grid + 1)[: n_grid + 1]
    w += np.bincount(i + 1, frac, minlength=n_grid + 1)[: n_grid + 1]
    half = int(np.ceil(4 * b / step))
    ker = np.exp(-0.5 * (np.arange(-half, half + 1) * step / b) ** 2)
    dens = fftconvolve(w[:n_grid], ker, mode="same")
    g = a + step * int(np.argmax(dens))

    xs = np.sort(x)
    k = int(np.searchsorted(xs, g))
    cand = np.unique(xs[max(0, k - n_refine // 2): k + n_refine // 2])
    val = np.exp(-0.5 * ((cand[:, None] - x[None, :]) / b) ** 2).sum(axis=1)
    return float(cand[int(np.argmax(val))])


def _three(draws: np.ndarray) -> tuple[float, float, float]:
    return float(np.mean(draws)), float(np.median(draws)), kde_mode(draws)


@dataclass(frozen=True)
class ChainSummary:
    """Posterior mean, median and mode of each parameter and of every h_t."""

    params: dict  # name -> {"mean", "median", "mode"}
    volatility: dict = field(default_factory=dict)  # stat -> (N,) array

    def param(self, name: str, stat: str = "mean") -> float:
        return self.params[name][stat]

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "volatility": {k: v.tolist() for k, v in self.volatility.items()},
        }


def chain_summary(chain: Chain, discard: int = 0, volatility: bool = True) -> ChainSummary:
    """Summaries over the retained draws, dropping a further ``discard`` rows."""
    if discard >= len(chain):
        raise ValueError("nothing left after discarding")
    params = {}
    for name in PARAM_NAMES + ("sigma2",):
        d = chain.param_draws(name)[discard:]
        params[name] = dict(zip(("mean", "median", "mode"), _three(d)))
    vol = {}
    if volatility:
        h = chain.h_draws[discard:]
        vol["mean"] = h.mean(axis=0)
        vol["median"] = np.median(h, axis=0)
        vol["mode"] = np.array([kde_mode(h[:, t]) for t in range(h.shape[1])])
    return ChainSummary(params=params, volatility=vol)
