"""Volatility-path error metrics and parameter MSE."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["VolMetrics", "srmse", "mae", "mape", "param_mse", "vol_metrics", "METRIC_COLUMNS"]

MAPE_TRUTH_FLOOR = 1e-12

STATS = ("mean", "median", "mode")
METRIC_COLUMNS = tuple(f"{m} {s}" for m in ("srMSE", "MAE", "MAPE") for s in STATS)


def _pair(h, h_hat):
    h = np.asarray(h, dtype=np.float64)
    h_hat = np.asarray(h_hat, dtype=np.float64)
    if h.shape != h_hat.shape:
        raise ValueError(f"length mismatch: {h.shape} vs {h_hat.shape}")
    if h.size == 0:
        raise ValueError("empty input")
    return h, h_hat


def srmse(h, h_hat) -> float:
    h, h_hat = _pair(h, h_hat)
    return float(np.sqrt(np.mean((h - h_hat) ** 2)))


def mae(h, h_hat) -> float:
    h, h_hat = _pair(h, h_hat)
    return float(np.mean(np.abs(h - h_hat)))


def mape(h, h_hat) -> float:
    """Mean absolute percent error as a fraction (multiply by 100 for percent)."""
    h, h_hat = _pair(h, h_hat)
    if np.any(h <= MAPE_TRUTH_FLOOR):
        raise ValueError("mape needs strictly positive truth values")
    return float(np.mean(np.abs(h - h_hat) / h))


def param_mse(estimates, truth: float) -> float:
    """Mean squared deviation of per-replication estimates from the truth."""
    e = np.asarray(estimates, dtype=np.float64)
    if e.size == 0:
        raise ValueError("no estimates")
    return float(np.mean((e - truth) ** 2))


@dataclass(frozen=True)
class VolMetrics:
    srmse: float
    mae: float
    mape: float

    @classmethod
    def of(cls, h, h_hat) -> "VolMetrics":
        return cls(srmse(h, h_hat), mae(h, h_hat), mape(h, h_hat))


def vol_metrics(h, summaries: dict) -> dict:
    """The nine-column row (metric x summary statistic) for one model.

    ``summaries`` maps "mean"/"median"/"mode" to estimated volatility paths.
    """
    per_stat = {s: VolMetrics.of(h, summaries[s]) for s in STATS}
    row = {}
    for name in ("srMSE", "MAE", "MAPE"):
        attr = name.lower()
        for s in STATS:
            row[f"{name} {s}"] = getattr(per_stat[s], attr)
    return row
