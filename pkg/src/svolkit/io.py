"""CSV ingestion, flat config files and run manifests."""
from __future__ import annotations

import json
import platform
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from .model import IngestionError, log_returns

__all__ = [
    "PriceSeries",
    "RunManifest",
    "load_price_csv",
    "load_series_csv",
    "write_series_csv",
    "write_draws_csv",
    "read_config",
    "write_json",
    "FLOAT_FORMAT",
]

FLOAT_FORMAT = "%.17g"  # round-trips every float64


@dataclass(frozen=True)
class PriceSeries:
    dates: np.ndarray  # datetime64[D]
    close: np.ndarray

    def __post_init__(self):
        if self.dates.shape != self.close.shape:
            raise IngestionError("dates and prices differ in length")
        if self.close.size and np.any(np.diff(self.dates.astype("int64")) <= 0):
            raise IngestionError("dates must be strictly increasing")

    def __len__(self):
        return self.close.size

    def log_returns(self) -> np.ndarray:
        return log_returns(self.close)

    def between(self, start=None, end=None) -> "PriceSeries":
        """Inclusive date window; either bound may be None."""
        keep = np.ones(self.dates.size, dtype=bool)
        if start is not None:
            keep &= self.dates >= np.datetime64(start, "D")
        if end is not None:
            keep &= self.dates <= np.datetime64(end, "D")
        return PriceSeries(self.dates[keep], self.close[keep])


def load_price_csv(path, start=None, end=None) -> PriceSeries:
    """Read a ``date,close`` file. Row numbers in errors count the header as row 1."""
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"{path}: no such file")
    df = pd.read_csv(path, dtype=str, skipinitialspace=True)
    df.columns = [c.strip().lower() for c in df.columns]
    for col in ("date", "close"):
        if col not in df.columns:
            raise IngestionError(f"{path}: missing column {col!r}")
    try:
        close = np.asarray(df["close"], dtype=np.float64)  # exact decimal parsing
    except ValueError as exc:
        raise IngestionError(f"{path}: unparseable price ({exc})") from None
    bad = np.flatnonzero(~(close > 0))
    if bad.size:
        i = int(bad[0])
        raise IngestionError(f"{path}: row {i + 2}: non-positive price {df['close'].iloc[i]!r}")
    try:
        dates = pd.to_datetime(df["date"], format="ISO8601").to_numpy().astype("datetime64[D]")
    except (ValueError, TypeError) as exc:
        raise IngestionError(f"{path}: unparseable date ({exc})") from None
    step = np.diff(dates.astype("int64"))
    if np.any(step <= 0):
        i = int(np.flatnonzero(step <= 0)[0]) + 1
        raise IngestionError(f"{path}: row {i + 2}: dates not strictly increasing")
    return PriceSeries(dates, close).between(start, end)


def load_series_csv(path) -> dict:
    """Read a ``t,y[,h]`` file (as written by ``svolkit simulate``)."""
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"{path}: no such file")
    df = pd.read_csv(path, float_precision="round_trip")
    if "y" not in df.columns:
        raise IngestionError(f"{path}: missing column 'y'")
    out = {"y": df["y"].to_numpy(np.float64)}
    if "h" in df.columns:
        out["h"] = df["h"].to_numpy(np.float64)
    if not np.all(np.isfinite(out["y"])):
        raise IngestionError(f"{path}: non-finite returns")
    return out


def write_series_csv(path, **columns) -> Path:
    """Write equal-length columns with a leading 0-based ``t`` index."""
    path = Path(path)
    df = pd.DataFrame({k: np.asarray(v) for k, v in columns.items()})
    df.insert(0, "t", np.arange(len(df)))
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def write_draws_csv(path, draws: dict) -> Path:
    path = Path(path)
    pd.DataFrame(draws).to_csv(path, index_label="draw", float_format=FLOAT_FORMAT)
    return path


def _coerce(v: str):
    low = v.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = _coerce(v)
    return out


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"not serializable: {type(o).__name__}")


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, default=_jsonable, sort_keys=True) + "\n")
    return path


@dataclass
class RunManifest:
    """Everything needed to rerun a command: what, with which seed and settings."""

    command: str
    seed: int
    config: dict
    version: str = ""
    timings: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    platform: str = field(default_factory=platform.platform)
    numpy: str = np.__version__

    def __post_init__(self):
        if not self.version:
            from . import __version__
            self.version = __version__

    @contextmanager
    def timed(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = round(time.perf_counter() - t0, 6)

    def to_dict(self) -> dict:
        return {
            "command": self.command, "seed": int(self.seed), "config": self.config,
            "version": self.version, "timings": self.timings, "outputs": self.outputs,
            "platform": self.platform, "numpy": self.numpy,
        }

    def write(self, out_dir, name: str = "manifest.json") -> Path:
        return write_json(Path(out_dir) / name, self.to_dict())

    @classmethod
    def read(cls, path) -> "RunManifest":
        d = json.loads(Path(path).read_text())
        return cls(**d)
