"""Batch command line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure
(series truncation or quadrature), 3 invalid payoff/strategy combination.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .bms import BmsParams, bms_discrete_hedge_error, bms_suicide_demo, bms_suicide_path
from .config import ConfigError, RunConfig, load_config
from .market import RNG_NAME, sample_path
from .montecarlo import simulate_errors
from .payoffs import DeltaUnavailable, UnsupportedPayoff
from .quadrature import QuadratureError
from .strategies import DeltaHedge, Hedger, Replicating, Suicide, _suicide_levels
from .valuation import TruncationFailure, value, value_delta

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_COMBINATION = 0, 1, 2, 3

PATH_REPORT_HEADER = ["t", "n_jumps", "stock", "wealth_repl", "wealth_delta", "value_fn"]
SIMULATE_HEADER = ["n_paths", "mean", "std", "standard_error", "ci99_low", "ci99_high",
                   "min", "max", "rmse", "seed", "intensity_used"]
SUICIDE_HEADER = ["t", "n_jumps", "integrand", "suicide_wealth", "arbitrage_wealth"]
BMS_HEADER = ["n_steps", "n_paths", "mean", "std", "standard_error", "rmse"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return format(float(v), ".17g")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--payoff", help="log | power:a | call:K | const:c")
    p.add_argument("--strategy", help="repl | delta | suicide:x | combined[:excess]")
    p.add_argument("--s0", type=float)
    p.add_argument("--sigma", type=float, help="relative jump size")
    p.add_argument("--lambda", dest="lambda_", type=float, help="pricing jump intensity")
    p.add_argument("--real-lambda", dest="real_lambda", type=float, help="sampling jump intensity")
    p.add_argument("--horizon", type=float, help="maturity T")
    p.add_argument("--paths", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float, help="series truncation tolerance")
    p.add_argument("--quad-tol", dest="quad_tol", type=float)
    p.add_argument("--grid", type=int, help="uniform sample points per path")
    p.add_argument("--method", choices=("auto", "quadrature"))
    p.add_argument("--path-index", dest="path_index", type=int)
    p.add_argument("--x", type=float, help="suicide-strategy capital")
    p.add_argument("--vol", type=float, help="diffusion volatility (bms-demo)")
    p.add_argument("--steps", help="comma separated rebalancing counts (bms-demo)")
    p.add_argument("--bms-grid", dest="bms_grid", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int, help="worker processes, 0 for all cores")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jumphedge", description="Delta hedging versus replication in a Poisson jump market.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    cmds = {
        "value": "print V(0, s0), its delta and the truncation certificate",
        "path-report": "CSV of wealth and value along one sampled path",
        "simulate": "Monte Carlo replication-error statistics",
        "suicide-demo": "CSV of the suicide integrand and wealth along one path",
        "bms-demo": "diffusion baseline: discrete delta-hedge convergence table",
    }
    for name, help_text in cmds.items():
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "value":
            p.add_argument("--delta", action="store_true", default=None, help="require the delta")
    return parser


def _overrides(ns: argparse.Namespace) -> dict:
    skip = {"command", "config"}
    out = {}
    for k, v in vars(ns).items():
        if k in skip or v is None:
            continue
        out["lambda" if k == "lambda_" else k] = v
    return out


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def cmd_value(cfg: RunConfig) -> int:
    payoff, params = cfg.payoff_obj, cfg.params
    res = value(payoff, params, 0.0, params.s0, cfg.tol)
    print(f"value {fmt(res.value)}")
    print(f"terms_used {res.terms_used}")
    print(f"tail_bound {fmt(res.tail_bound)}")
    if payoff.delta_eligible:
        d = value_delta(payoff, params, 0.0, params.s0, cfg.tol)
        print(f"delta {fmt(d.value)}")
        print(f"delta_terms_used {d.terms_used}")
        print(f"delta_tail_bound {fmt(d.tail_bound)}")
    elif cfg.delta:
        raise DeltaUnavailable(f"{payoff.describe()} payoff has no delta")
    return EXIT_OK


def cmd_path_report(cfg: RunConfig) -> int:
    payoff, params = cfg.payoff_obj, cfg.params
    path = sample_path(cfg.seed, cfg.path_index, cfg.sampling_intensity, params.T)
    kw = dict(tol=cfg.tol, quad_tol=cfg.quad_tol, method=cfg.method)
    repl = Hedger(Replicating(), payoff, params, **kw).wealth(path, cfg.grid)
    delta_values = None
    if payoff.delta_eligible:
        delta_values = Hedger(DeltaHedge(), payoff, params, **kw).wealth(path, cfg.grid).values
    rows = []
    for i, t in enumerate(repl.sample_times):
        v = value(payoff, params, float(t), float(repl.stock[i]), cfg.tol).value
        rows.append([float(t), int(repl.n_jumps[i]), float(repl.stock[i]), float(repl.values[i]),
                     None if delta_values is None else float(delta_values[i]), v])
    target = _out_dir(cfg) / "path_report.csv"
    _write_csv(target, PATH_REPORT_HEADER, rows)
    print(target)
    return EXIT_OK


def _metadata(cfg: RunConfig, extra: dict) -> dict:
    return {
        "package": "jumphedge",
        "version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
        "rng": RNG_NAME,
        "config": {k: v for k, v in cfg.to_json_dict().items() if k not in ("threads", "out")},
        **extra,
    }


def cmd_simulate(cfg: RunConfig) -> int:
    params = cfg.params
    stats = simulate_errors(cfg.strategy_obj, cfg.payoff_obj, params, cfg.sampling_intensity,
                            cfg.paths, cfg.seed, threads=cfg.threads, tol=cfg.tol,
                            quad_tol=cfg.quad_tol, method=cfg.method)
    out = _out_dir(cfg)
    d = stats.as_dict()
    _write_csv(out / "simulate.csv", SIMULATE_HEADER, [[d[k] for k in SIMULATE_HEADER]])
    meta = _metadata(cfg, {"pricing_intensity": params.lambda_rn,
                           "sampling_intensity": cfg.sampling_intensity})
    (out / "simulate_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(out / "simulate.csv")
    return EXIT_OK


def cmd_suicide_demo(cfg: RunConfig) -> int:
    params = cfg.params
    path = sample_path(cfg.seed, cfg.path_index, cfg.sampling_intensity, params.T)
    ws = Hedger(Suicide(cfg.x), cfg.payoff_obj, params, tol=cfg.tol).wealth(path, cfg.grid)
    levels = _suicide_levels(cfg.x, params.lambda_rn, params.T, path.jump_times)
    rows = []
    for i, t in enumerate(ws.sample_times):
        # integrand in force just after t (predictable: uses N_t)
        level = levels[int(ws.n_jumps[i])]
        rows.append([float(t), int(ws.n_jumps[i]), level, float(ws.values[i]), cfg.x - float(ws.values[i])])
    target = _out_dir(cfg) / "suicide.csv"
    _write_csv(target, SUICIDE_HEADER, rows)
    print(target)
    return EXIT_OK


def cmd_bms_demo(cfg: RunConfig) -> int:
    bp = BmsParams(cfg.s0, cfg.vol, cfg.horizon)
    payoff = cfg.payoff_obj
    rows = []
    for n in cfg.steps:
        st = bms_discrete_hedge_error(payoff, bp, n, cfg.paths, cfg.seed, threads=cfg.threads)
        rows.append([n, st.n_paths, st.mean, st.std, st.standard_error, st.rmse])
    out = _out_dir(cfg)
    _write_csv(out / "bms_convergence.csv", BMS_HEADER, rows)
    hit = bms_suicide_demo(cfg.x, bp, cfg.bms_grid, cfg.paths, cfg.seed, threads=cfg.threads)
    _write_csv(out / "bms_suicide.csv", ["x", "n_grid", "n_paths", "hit_fraction"],
               [[cfg.x, cfg.bms_grid, cfg.paths, hit]])
    times, stopped = bms_suicide_path(cfg.x, bp, cfg.bms_grid, cfg.seed, cfg.path_index)
    _write_csv(out / "bms_suicide_path.csv", ["t", "stopped_value"], zip(times.tolist(), stopped.tolist()))
    print(out / "bms_convergence.csv")
    return EXIT_OK


COMMANDS = {
    "value": cmd_value,
    "path-report": cmd_path_report,
    "simulate": cmd_simulate,
    "suicide-demo": cmd_suicide_demo,
    "bms-demo": cmd_bms_demo,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = load_config(ns.config, _overrides(ns))
        return COMMANDS[ns.command](cfg)
    except (DeltaUnavailable, UnsupportedPayoff) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMBINATION
    except (TruncationFailure, QuadratureError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
