# coding: utf-8

# # A small replication study
#
# Parameter MSE over repeated simulated datasets, for GED errors. The scale
# here is reduced (a few replications, short chains) so it runs in a couple
# of minutes; `svolkit replicate` runs the same harness from the shell.

# %%

from svolkit import ChainConfig, c_star_sweep, replicate, scenario_preset

scenario = scenario_preset("ged", shape=1.5).with_(config=ChainConfig(iterations=1000, burn_in=500))
report = replicate(scenario, ["gaussian", "nsvm1", "nsvm2"], reps=4, seed=11)
print(report.mse_table())

# %% [markdown]
# Per-replication estimates, ready for boxplots.

# %%

print(report.estimates_table().head(9))

# %%

from svolkit.plots import estimate_boxplots
from svolkit.pipeline import MODEL_LABELS, STATS

est = {MODEL_LABELS[m]: {s: report.estimates(m, "delta", s) for s in STATS} for m in report.models}
estimate_boxplots("box_delta.svg", est, report.truth("delta"), "delta")

# %% [markdown]
# Sensitivity to the envelope multiplier c*. Every column reuses the same
# replication seeds.

# %%

print(c_star_sweep([0.8, 1.2], scenario, ["gaussian"], reps=2, seed=11))
