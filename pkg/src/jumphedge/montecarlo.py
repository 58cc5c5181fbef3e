"""Monte Carlo experiments on hedging errors and martingale checks.

Paths are sampled at a chosen intensity (the pricing intensity for
risk-neutral runs, another value for a real-world run) while strategies and
values always use the pricing intensity. Each path draws from its own
``(seed, path_index)`` stream and results are reduced in path order with
exactly rounded sums, so the output does not depend on the worker count.
"""

from __future__ import annotations

import math
import os
import pickle
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import norm

from .market import ModelParams, sample_path, stock_at
from .payoffs import Payoff
from .strategies import (
    DEFAULT_QUAD_TOL,
    Combined,
    Hedger,
    Replicating,
    Strategy,
    Suicide,
)
from .valuation import DEFAULT_TOL, TruncationFailure, value

__all__ = [
    "ErrorStats",
    "CheckpointStat",
    "error_stats",
    "resolve_threads",
    "run_chunked",
    "path_errors",
    "simulate_errors",
    "martingale_diagnostic",
    "minimal_capital_demo",
]

Z99 = float(norm.ppf(0.995))


@dataclass(frozen=True)
class ErrorStats:
    n_paths: int
    mean: float
    std: float
    standard_error: float
    ci99_low: float
    ci99_high: float
    min: float
    max: float
    rmse: float
    seed: int
    intensity_used: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CheckpointStat:
    t: float
    mean: float
    std: float
    standard_error: float


def _moments(samples: np.ndarray) -> tuple[float, float, float]:
    n = samples.size
    mean = math.fsum(samples.tolist()) / n
    if n > 1:
        std = math.sqrt(math.fsum(((samples - mean) ** 2).tolist()) / (n - 1))
    else:
        std = 0.0
    return mean, std, std / math.sqrt(n)


def error_stats(errors: np.ndarray, seed: int, intensity: float) -> ErrorStats:
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise ValueError("need at least one path")
    mean, std, se = _moments(errors)
    half = Z99 * se
    rmse = math.sqrt(math.fsum((errors**2).tolist()) / errors.size)
    return ErrorStats(int(errors.size), mean, std, se, mean - half, mean + half,
                      float(errors.min()), float(errors.max()), rmse, int(seed), float(intensity))


def resolve_threads(threads: int | None) -> int:
    if threads is None or threads <= 0:
        return os.cpu_count() or 1
    return int(threads)


def _picklable(obj) -> bool:
    try:
        pickle.dumps(obj)
    except Exception:
        return False
    return True


def run_chunked(worker, args: tuple, n_paths: int, threads: int | None, chunk: int = 2048) -> np.ndarray:
    """Call ``worker(*args, start, stop)`` over index chunks and concatenate in order.

    Falls back to in-process evaluation for one worker or unpicklable arguments
    (e.g. a custom payoff built from a lambda).
    """
    bounds = [(lo, min(lo + chunk, n_paths)) for lo in range(0, n_paths, chunk)]
    workers = min(resolve_threads(threads), len(bounds))
    if workers <= 1 or not _picklable(args):
        parts = [worker(*args, lo, hi) for lo, hi in bounds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(worker, *args, lo, hi) for lo, hi in bounds]
            parts = [f.result() for f in futures]
    return np.concatenate(parts) if parts else np.empty(0)


def _error_chunk(strategy, payoff, params, intensity, seed, tol, quad_tol, method, start, stop):
    hedger = Hedger(strategy, payoff, params, tol=tol, quad_tol=quad_tol, method=method)
    out = np.empty(stop - start)
    for j, i in enumerate(range(start, stop)):
        path = sample_path(seed, i, intensity, params.T)
        try:
            out[j] = hedger.error(path)
        except TruncationFailure as exc:
            raise TruncationFailure(f"path {i}: {exc}") from exc
    return out


def path_errors(strategy: Strategy, payoff: Payoff, params: ModelParams, real_intensity: float,
                n_paths: int, seed: int, *, threads: int | None = 1, tol: float = DEFAULT_TOL,
                quad_tol: float = DEFAULT_QUAD_TOL, method: str = "auto") -> np.ndarray:
    """Terminal replication errors, one per path index ``0..n_paths-1``."""
    if n_paths < 1:
        raise ValueError(f"n_paths must be at least 1, got {n_paths}")
    if not real_intensity > 0:
        raise ValueError(f"real_intensity must be positive, got {real_intensity}")
    # fail fast on an invalid payoff/strategy pairing before any sampling
    Hedger(strategy, payoff, params, tol=tol, quad_tol=quad_tol, method=method)
    args = (strategy, payoff, params, float(real_intensity), int(seed), tol, quad_tol, method)
    return run_chunked(_error_chunk, args, n_paths, threads)


def simulate_errors(strategy: Strategy, payoff: Payoff, params: ModelParams, real_intensity: float,
                    n_paths: int, seed: int, *, threads: int | None = 1, tol: float = DEFAULT_TOL,
                    quad_tol: float = DEFAULT_QUAD_TOL, method: str = "auto") -> ErrorStats:
    errors = path_errors(strategy, payoff, params, real_intensity, n_paths, seed, threads=threads,
                         tol=tol, quad_tol=quad_tol, method=method)
    return error_stats(errors, seed, real_intensity)


def _value_chunk(payoff, params, checkpoints, seed, tol, start, stop):
    out = np.empty((stop - start, len(checkpoints)))
    for j, i in enumerate(range(start, stop)):
        path = sample_path(seed, i, params.lambda_rn, params.T)
        for c, t in enumerate(checkpoints):
            out[j, c] = value(payoff, params, t, stock_at(params, path, t), tol).value
    return out.ravel()


def martingale_diagnostic(payoff: Payoff, params: ModelParams, t_checkpoints, n_paths: int,
                          seed: int, *, threads: int | None = 1,
                          tol: float = DEFAULT_TOL) -> list[CheckpointStat]:
    """Sample mean of ``V(t, S_t)`` at each checkpoint under the pricing intensity."""
    checkpoints = tuple(float(t) for t in t_checkpoints)
    for t in checkpoints:
        if not (0.0 <= t <= params.T):
            raise ValueError(f"checkpoint {t} outside [0, {params.T}]")
    flat = run_chunked(_value_chunk, (payoff, params, checkpoints, int(seed), tol), n_paths, threads)
    table = flat.reshape(n_paths, len(checkpoints))
    stats = []
    for c, t in enumerate(checkpoints):
        mean, std, se = _moments(table[:, c])
        stats.append(CheckpointStat(t, mean, std, se))
    return stats


def minimal_capital_demo(payoff: Payoff, params: ModelParams, x0: float, n_paths: int, seed: int,
                         *, threads: int | None = 1, tol: float = DEFAULT_TOL,
                         quad_tol: float = DEFAULT_QUAD_TOL) -> ErrorStats:
    """Replicate from capital ``x0 >= U_0`` by burning the excess with a suicide strategy."""
    u0 = value(payoff, params, 0.0, params.s0, tol).value
    if x0 < u0:
        raise ValueError(
            f"x0={x0!r} is below the minimal replication capital U_0={u0!r}; "
            "no admissible strategy replicates from it"
        )
    excess = x0 - u0
    strategy: Strategy = Replicating()
    if excess > 0:
        strategy = Combined(((1.0, Replicating()), (1.0, Suicide(excess))))
    return simulate_errors(strategy, payoff, params, params.lambda_rn, n_paths, seed,
                           threads=threads, tol=tol, quad_tol=quad_tol)
