"""Command-line entry point: ``svolkit {simulate,fit,replicate,metrics}``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from .chain import PARAM_NAMES, ChainConfig
from .io import (
    RunManifest,
    load_price_csv,
    load_series_csv,
    read_config,
    write_draws_csv,
    write_json,
    write_series_csv,
)
from .metrics import METRIC_COLUMNS, vol_metrics
from .model import ErrorSpec, ModelParams, Priors, simulate_path
from .pipeline import (
    MODEL_LABELS,
    STATS,
    c_star_sweep,
    fit_models,
    replicate,
    sample_size_sweep,
    scenario_preset,
)
from .plots import estimate_boxplots, volatility_overlay
from .samplers import TargetKind

log = logging.getLogger("svolkit")

_CHAIN_KEYS = {
    "iters": "iterations", "burn": "burn_in", "cstar": "c_star", "h_source": "h_source",
    "refit_rounds": "refit_rounds", "raw_plugin": "raw_plugin", "g_scale_raw": "g_scale_raw",
    "g_joint": "g_joint", "warm_start": "warm_start",
}
_PRIOR_KEYS = ("alpha0", "sigma_alpha2", "delta0", "sigma_delta2", "nu0", "s0")


class CliError(Exception):
    pass


def _seed(args) -> int:
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get("SVOLKIT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise CliError(f"SVOLKIT_SEED must be an integer, got {env!r}") from None


def _settings(args) -> dict:
    """Config-file values overridden by any flag given on the command line."""
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    for k, v in vars(args).items():
        if v is not None and k not in ("config", "func", "cmd"):
            cfg[k] = v
    return cfg


def _chain_config(cfg: dict, seed: int) -> ChainConfig:
    kw = {}
    for k, v in cfg.items():
        name = _CHAIN_KEYS.get(k, k)
        if name in ChainConfig.__dataclass_fields__ and name not in ("seed", "model"):
            kw[name] = v
    return ChainConfig(seed=seed, **kw)


def _priors(cfg: dict) -> Priors:
    return Priors(**{k: float(cfg[k]) for k in _PRIOR_KEYS if k in cfg})


def _models(value: str) -> list[TargetKind]:
    if value == "all":
        return list(TargetKind)
    return [TargetKind(v.strip()) for v in value.split(",")]


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()]


def _error_spec(dist: str, df: float, shape: float, standardize: bool) -> ErrorSpec:
    if dist == "gaussian":
        return ErrorSpec.gaussian()
    if dist == "t":
        return ErrorSpec.student_t(df, standardize=standardize)
    if dist == "ged":
        return ErrorSpec.ged(shape)
    raise CliError(f"unknown distribution {dist!r}")


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------- commands

def cmd_simulate(args) -> int:
    cfg = _settings(args)
    seed = _seed(args)
    out = _out_dir(args.out)
    params = ModelParams(cfg["alpha"], cfg["delta"], cfg["sigma"])
    obs = _error_spec(cfg["obs_dist"], cfg["df"], cfg["shape"], cfg.get("standardize_t", False))
    vol = _error_spec(cfg["vol_dist"], cfg["df"], cfg["shape"], cfg.get("standardize_t", False))
    man = RunManifest("simulate", seed, {k: v for k, v in cfg.items() if k != "out"})
    with man.timed("simulate"):
        path = simulate_path(params, obs, vol, int(cfg["n"]), seed)
    f = write_series_csv(out / "series.csv", y=path.returns, h=path.volatility,
                         ln_h=path.ln_volatility)
    man.outputs.append(f.name)
    man.write(out)
    print(f"wrote {f} ({path.returns.size} returns)")
    return 0


def _load_returns(path: str, start, end):
    head = Path(path).read_text().split("\n", 1)[0].lower()
    if "close" in head:
        return load_price_csv(path, start, end).log_returns(), None
    if start or end:
        raise CliError("--from/--to need a date,close price file")
    s = load_series_csv(path)
    return s["y"], s.get("h")


def cmd_fit(args) -> int:
    cfg = _settings(args)
    seed = _seed(args)
    out = _out_dir(args.out)
    y, h_true = _load_returns(args.input, args.date_from, args.date_to)
    config = _chain_config(cfg, seed)
    man = RunManifest("fit", seed, {**cfg, "chain": config.to_dict()})
    with man.timed("fit"):
        fits = fit_models(y, _priors(cfg), config, _models(cfg["model"]))
    summary, overlay = {}, {}
    for m, fit in fits.items():
        ch = fit.chain
        f = write_draws_csv(out / f"chain_{m.value}.csv",
                            {p: ch.param_draws(p) for p in PARAM_NAMES})
        man.outputs.append(f.name)
        vol = fit.summary.volatility
        f = write_series_csv(out / f"volatility_{m.value}.csv", **vol)
        man.outputs.append(f.name)
        summary[m.value] = {
            "params": fit.summary.params,
            "h_acceptance": ch.h_acceptance,
            "counters": ch.counters,
        }
        if h_true is not None:
            summary[m.value]["metrics"] = vol_metrics(h_true, vol)
        overlay[MODEL_LABELS[m]] = vol["mean"]
    write_json(out / "summary.json", summary)
    svg = volatility_overlay(out / "volatility.svg", y, overlay, truth=h_true,
                             title="Comparison of volatility estimates")
    man.outputs += ["summary.json", svg.name]
    man.write(out)
    for m in fits:
        p = summary[m.value]["params"]
        print(f"{MODEL_LABELS[m]:>8}: " + "  ".join(f"{k}={p[k]['mean']:.5g}" for k in PARAM_NAMES))
    return 0


def cmd_replicate(args) -> int:
    cfg = _settings(args)
    seed = _seed(args)
    out = _out_dir(args.out)
    config = _chain_config(cfg, seed)
    kw = {"n": int(cfg["n"]), "config": config, "priors": _priors(cfg),
          "standardize_t": cfg.get("standardize_t", False)}
    if cfg["errors"] == "t":
        kw["df"] = cfg["df"]
    elif cfg["errors"] == "ged":
        kw["shape"] = cfg["shape"]
    scenario = scenario_preset(cfg["errors"], volatility_study=cfg.get("volatility_study", False), **kw)
    models = _models(cfg["model"])
    reps, workers = int(cfg["reps"]), int(cfg["workers"])
    man = RunManifest("replicate", seed, {**{k: v for k, v in cfg.items() if k != "out"},
                                          "chain": config.to_dict()})
    if cfg.get("cstar_grid"):
        with man.timed("c_star_sweep"):
            tab = c_star_sweep(_floats(cfg["cstar_grid"]), scenario, models, reps, seed, workers)
        tab.to_csv(out / "cstar_mse.csv")
        man.outputs.append("cstar_mse.csv")
        print(tab.to_string())
    elif cfg.get("sizes"):
        sizes = [int(v) for v in _floats(cfg["sizes"])]
        with man.timed("sample_size_sweep"):
            reports = sample_size_sweep(sizes, scenario, models, reps, seed, workers)
        tab = pd.concat({n: r.mse_table()["mean"] for n, r in reports.items()}, axis=1)
        tab.columns.name = "N"
        tab.to_csv(out / "size_mse.csv")
        man.outputs.append("size_mse.csv")
        print(tab.to_string())
    else:
        with man.timed("replicate"):
            rep = replicate(scenario, models, reps, seed, workers)
        rep.mse_table().to_csv(out / "mse.csv")
        rep.estimates_table().to_csv(out / "estimates.csv", index=False)
        rep.vol_table().to_csv(out / "vol_metrics.csv")
        man.outputs += ["mse.csv", "estimates.csv", "vol_metrics.csv"]
        for p in PARAM_NAMES:
            est = {MODEL_LABELS[m]: {s: rep.estimates(m, p, s) for s in STATS} for m in models}
            svg = estimate_boxplots(out / f"box_{p}.svg", est, rep.truth(p), param=p)
            man.outputs.append(svg.name)
        print(rep.mse_table().to_string())
    man.write(out)
    return 0


def cmd_metrics(args) -> int:
    truth = pd.read_csv(args.truth, float_precision="round_trip")
    est = pd.read_csv(args.estimate, float_precision="round_trip")
    col = args.truth_column
    if col not in truth.columns:
        raise CliError(f"{args.truth}: missing column {col!r}")
    h = truth[col].to_numpy(np.float64)
    if all(s in est.columns for s in STATS):
        paths = {s: est[s].to_numpy(np.float64) for s in STATS}
    elif "h" in est.columns:
        paths = dict.fromkeys(STATS, est["h"].to_numpy(np.float64))
    else:
        raise CliError(f"{args.estimate}: need mean,median,mode columns or an h column")
    row = vol_metrics(h, paths)
    tab = pd.DataFrame([row], columns=list(METRIC_COLUMNS), index=[args.label])
    if args.out:
        tab.to_csv(args.out, float_format="%.17g")
    print(tab.to_string())
    return 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="svolkit",
                                 description="Bayesian stochastic-volatility estimation")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def chain_flags(p):
        p.add_argument("--config", help="flat key=value file; flags override it")
        p.add_argument("--model", default=None, help="gaussian, nsvm1, nsvm2, a comma list or all")
        p.add_argument("--iters", type=int, help="retained draws")
        p.add_argument("--burn", type=int, help="burn-in draws")
        p.add_argument("--cstar", type=float, help="envelope multiplier c*")
        p.add_argument("--h-source", choices=("mean", "last"))
        p.add_argument("--seed", type=int)

    p = sub.add_parser("simulate", help="simulate returns and volatility")
    p.add_argument("--config")
    p.add_argument("--alpha", type=float, default=-0.15)
    p.add_argument("--delta", type=float, default=0.985)
    p.add_argument("--sigma", type=float, default=0.15)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--obs-dist", choices=("gaussian", "t", "ged"), default="gaussian")
    p.add_argument("--vol-dist", choices=("gaussian", "t", "ged"), default="gaussian")
    p.add_argument("--df", type=float, default=10.0)
    p.add_argument("--shape", type=float, default=1.5)
    p.add_argument("--standardize-t", action="store_true", default=None)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="sim_out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit one or more models to a return series")
    p.add_argument("input", help="date,close price file or t,y[,h] series file")
    chain_flags(p)
    p.add_argument("--from", dest="date_from")
    p.add_argument("--to", dest="date_to")
    p.add_argument("--out", default="fit_out")
    p.set_defaults(func=cmd_fit, model="nsvm1")

    p = sub.add_parser("replicate", help="simulation study")
    chain_flags(p)
    p.add_argument("--errors", choices=("gaussian", "t", "ged"), default="gaussian")
    p.add_argument("--volatility-study", action="store_true", default=None,
                   help="use the alpha=-0.10 design")
    p.add_argument("--df", type=float, default=10.0)
    p.add_argument("--shape", type=float, default=1.5)
    p.add_argument("--standardize-t", action="store_true", default=None)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--cstar-grid", help="comma list; runs a c* sweep")
    p.add_argument("--sizes", help="comma list of N; runs a sample-size sweep")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="replicate_out")
    p.set_defaults(func=cmd_replicate, model="all")

    p = sub.add_parser("metrics", help="srMSE/MAE/MAPE of estimated volatility")
    p.add_argument("truth", help="CSV with the true volatility")
    p.add_argument("estimate", help="CSV with mean,median,mode columns (or h)")
    p.add_argument("--truth-column", default="h")
    p.add_argument("--label", default="model")
    p.add_argument("--out")
    p.set_defaults(func=cmd_metrics)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return int(args.func(args) or 0)
    except (CliError, ValueError, KeyError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"svolkit {args.cmd}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
