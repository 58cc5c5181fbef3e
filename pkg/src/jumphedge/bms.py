"""Geometric Brownian motion baseline.

In the diffusion model ``S_t = s0 exp(vol W_t - vol^2 t / 2)`` delta hedging
replicates exactly, so discretely rebalanced delta hedging converges as the
rebalancing grid is refined (error std ~ sqrt(dt)). This is the behaviour that
breaks down in the Poisson market.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .market import path_rng
from .montecarlo import ErrorStats, error_stats, run_chunked
from .payoffs import LogPayoff, Payoff, PowerPayoff, UnsupportedPayoff

__all__ = [
    "BmsParams",
    "bms_value",
    "bms_delta",
    "bms_discrete_hedge_error",
    "bms_hedge_errors",
    "bms_suicide_demo",
    "bms_suicide_path",
    "suicide_clock_times",
]

# keeps the diffusion streams disjoint from the jump-path streams for the same seed
_BMS_STREAM = 1 << 40
_SUICIDE_STREAM = 2 << 40


@dataclass(frozen=True)
class BmsParams:
    s0: float
    sigma_vol: float
    T: float

    def __post_init__(self) -> None:
        for name in ("s0", "sigma_vol", "T"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a finite positive number, got {v!r}")


def _check_payoff(payoff: Payoff) -> None:
    if not isinstance(payoff, (LogPayoff, PowerPayoff)):
        raise UnsupportedPayoff(f"diffusion baseline supports log and power payoffs, got {payoff.describe()}")


def bms_value(payoff: Payoff, params: BmsParams, t, x):
    _check_payoff(payoff)
    var = params.sigma_vol**2 * (params.T - np.asarray(t, dtype=float))
    x = np.asarray(x, dtype=float)
    if isinstance(payoff, LogPayoff):
        out = np.log(x) - 0.5 * var
    else:
        a = payoff.a
        out = x**a * np.exp(0.5 * a * (a - 1.0) * var)
    return out if out.ndim else float(out)


def bms_delta(payoff: Payoff, params: BmsParams, t, x):
    _check_payoff(payoff)
    var = params.sigma_vol**2 * (params.T - np.asarray(t, dtype=float))
    x = np.asarray(x, dtype=float)
    if isinstance(payoff, LogPayoff):
        out = 1.0 / x
    else:
        a = payoff.a
        out = a * x ** (a - 1.0) * np.exp(0.5 * a * (a - 1.0) * var)
    return out if out.ndim else float(out)


def _normals(seed: int, stream: int, start: int, stop: int, n: int) -> np.ndarray:
    return np.stack([path_rng(seed, stream + i).standard_normal(n) for i in range(start, stop)])


def _hedge_chunk(payoff, params, n_steps, seed, start, stop):
    dt = params.T / n_steps
    vol = params.sigma_vol
    z = _normals(seed, _BMS_STREAM, start, stop, n_steps)
    s = np.full(stop - start, params.s0)
    wealth = np.full(stop - start, bms_value(payoff, params, 0.0, params.s0))
    for i in range(n_steps):
        delta = bms_delta(payoff, params, i * dt, s)
        s_next = s * np.exp(vol * math.sqrt(dt) * z[:, i] - 0.5 * vol * vol * dt)
        wealth = wealth + delta * (s_next - s)
        s = s_next
    if isinstance(payoff, LogPayoff):
        claim = np.log(s)
    else:
        claim = s**payoff.a
    return wealth - claim


def bms_hedge_errors(payoff: Payoff, params: BmsParams, n_steps: int, n_paths: int, seed: int,
                     *, threads: int | None = 1) -> np.ndarray:
    _check_payoff(payoff)
    if n_steps < 1:
        raise ValueError(f"n_steps must be at least 1, got {n_steps}")
    return run_chunked(_hedge_chunk, (payoff, params, int(n_steps), int(seed)), n_paths, threads,
                       chunk=max(1, min(2048, 2_000_000 // n_steps)))


def bms_discrete_hedge_error(payoff: Payoff, params: BmsParams, n_steps: int, n_paths: int,
                             seed: int, *, threads: int | None = 1) -> ErrorStats:
    """Terminal error of delta hedging rebalanced on a uniform grid of ``n_steps``."""
    errors = bms_hedge_errors(payoff, params, n_steps, n_paths, seed, threads=threads)
    return error_stats(errors, seed, float("nan"))


def suicide_clock_times(params: BmsParams, n_grid: int) -> tuple[np.ndarray, np.ndarray]:
    """Grid uniform in the clock ``<L>_t = 1/(T-t) - 1/T``, stopping at ``T - T/n_grid``.

    Returns ``(times, clock)``, both of length ``n_grid + 1`` starting at 0.
    """
    T = params.T
    clock_max = (n_grid - 1) / T
    clock = np.linspace(0.0, clock_max, n_grid + 1)
    times = T - 1.0 / (clock + 1.0 / T)
    times[0] = 0.0
    return times, clock


def _suicide_chunk(x, params, n_grid, seed, start, stop):
    _, clock = suicide_clock_times(params, n_grid)
    steps = np.sqrt(np.diff(clock))
    z = _normals(seed, _SUICIDE_STREAM, start, stop, n_grid)
    level = x + np.cumsum(z * steps, axis=1)
    return np.any(level <= 0.0, axis=1).astype(float)


def bms_suicide_demo(x: float, params: BmsParams, n_grid: int, n_paths: int, seed: int,
                     *, threads: int | None = 1) -> float:
    """Fraction of paths on which ``L = x + int (T-u)^-1 dW_u`` hits zero on the grid.

    ``L`` is a time-changed Brownian motion, so it is simulated exactly on a
    grid uniform in its quadratic variation; the grid ends one step short of
    ``T`` where the clock would be infinite.
    """
    if not x > 0:
        raise ValueError(f"x must be positive, got {x}")
    if n_grid < 100:
        raise ValueError(f"n_grid must be at least 100, got {n_grid}")
    hits = run_chunked(_suicide_chunk, (float(x), params, int(n_grid), int(seed)), n_paths, threads,
                       chunk=max(1, min(2048, 4_000_000 // n_grid)))
    return math.fsum(hits.tolist()) / n_paths


def bms_suicide_path(x: float, params: BmsParams, n_grid: int, seed: int,
                     path_index: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Times and the stopped value ``M = L^tau`` for one path; zero after the hit."""
    times, clock = suicide_clock_times(params, n_grid)
    z = _normals(seed, _SUICIDE_STREAM, path_index, path_index + 1, n_grid)[0]
    level = np.concatenate([[x], x + np.cumsum(z * np.sqrt(np.diff(clock)))])
    hit = np.nonzero(level <= 0.0)[0]
    if hit.size:
        level[hit[0]:] = 0.0
    return times, level
