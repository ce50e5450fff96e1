# coding: utf-8

# # From a price file to volatility estimates
#
# A synthetic daily close series stands in for an index file. The loader
# validates dates and prices and restricts the series to a window.

# %%

import numpy as np
import pandas as pd

from svolkit import ChainConfig, Priors, fit_models
from svolkit.io import load_price_csv

dates = pd.bdate_range("2020-01-01", "2024-06-28")
rng = np.random.default_rng(3)
vol = np.exp(np.cumsum(rng.normal(0, 0.05, dates.size)) * 0.2) * 0.01
close = 3000 * np.exp(np.cumsum(vol * rng.standard_normal(dates.size)))
pd.DataFrame({"Date": dates.strftime("%Y-%m-%d"), "Close": close}).to_csv("prices.csv", index=False)

series = load_price_csv("prices.csv", "2021-02-01", "2024-02-01")
y = series.log_returns()
print(len(series), "prices,", y.size, "returns")

# %%

fits = fit_models(y, Priors(), ChainConfig(iterations=1000, burn_in=1000, seed=3), ["gaussian", "nsvm1"])
for m, f in fits.items():
    print(m.value, {k: round(v["mean"], 4) for k, v in f.summary.params.items()})

# %% [markdown]
# The same thing from the shell:
#
#     svolkit fit prices.csv --from 2021-02-01 --to 2024-02-01 --model all --out fit_out
