# coding: utf-8

# # Simulating and fitting a stochastic-volatility model
#
# Returns follow y_t = sqrt(h_t) u_t with ln h_t an AR(1) process. We draw
# one path with heavy-tailed Student-t errors, then fit the Gaussian model
# and both semiparametric variants to it.

# %%

import numpy as np

from svolkit import ChainConfig, ErrorSpec, PAPER_PARAMS, Priors, fit_models, simulate_path
from svolkit.metrics import vol_metrics

print(PAPER_PARAMS)

# %% [markdown]
# The t errors are left at their raw variance df/(df-2), as in the
# original simulation design.

# %%

path = simulate_path(PAPER_PARAMS, ErrorSpec.student_t(10), ErrorSpec.student_t(10), n=500, seed=7)
y, h = path.returns, path.volatility
print(y[:5])
print("sample kurtosis of returns:", ((y - y.mean()) ** 4).mean() / y.var() ** 2)

# %% [markdown]
# One Gaussian chain is shared; the NSVM fits plug kernel density estimates
# of its residuals into a second chain.

# %%

config = ChainConfig(iterations=2000, burn_in=1000, seed=7)
fits = fit_models(y, Priors(), config, ["gaussian", "nsvm1", "nsvm2"])

for model, fit in fits.items():
    p = fit.summary.params
    print(f"{model.value:>8}  alpha={p['alpha']['mean']:+.3f}  delta={p['delta']['mean']:.4f}"
          f"  sigma_nu={p['sigma_nu']['mean']:.4f}  h-acceptance={fit.chain.h_acceptance:.3f}")

# %% [markdown]
# Volatility path errors against the truth, one row per model.

# %%

for model, fit in fits.items():
    row = vol_metrics(h, fit.summary.volatility)
    print(model.value, {k: round(v, 6) for k, v in row.items() if k.endswith("mean")})

# %%

from svolkit.plots import volatility_overlay

volatility_overlay("overlay.svg", y, {m.value: f.summary.volatility["mean"] for m, f in fits.items()},
                   truth=h)
