"""Poisson-driven stock market: parameters, jump paths and path sampling.

The discounted stock price is ``S_t = s0 * exp(alpha * N_t - beta * t)`` with
``alpha = log(1 + sigma)`` and ``beta = sigma * lambda_rn``, where ``N`` is a
Poisson process with intensity ``lambda_rn`` under the pricing measure.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelParams",
    "JumpPath",
    "derive_params",
    "count_at",
    "count_before",
    "stock_at",
    "stock_before",
    "path_rng",
    "sample_path",
    "RNG_NAME",
]

# Recorded in run metadata.
RNG_NAME = "numpy.PCG64 seeded by SeedSequence(seed, spawn_key=(path_index,))"


@dataclass(frozen=True)
class ModelParams:
    s0: float
    sigma: float
    lambda_rn: float
    T: float
    alpha: float = field(init=False)
    beta: float = field(init=False)

    def __post_init__(self) -> None:
        for name in ("s0", "sigma", "lambda_rn", "T"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a finite positive number, got {value!r}")
        object.__setattr__(self, "alpha", math.log1p(self.sigma))
        object.__setattr__(self, "beta", self.sigma * self.lambda_rn)


def derive_params(s0: float, sigma: float, lambda_rn: float, T: float) -> ModelParams:
    """Build validated model parameters with ``alpha`` and ``beta`` filled in."""
    return ModelParams(float(s0), float(sigma), float(lambda_rn), float(T))


@dataclass(frozen=True)
class JumpPath:
    """One Poisson trajectory on ``[0, T]`` given by its sorted jump times."""

    jump_times: tuple[float, ...]
    T: float
    intensity_used: float = float("nan")

    def __post_init__(self) -> None:
        times = tuple(float(t) for t in self.jump_times)
        object.__setattr__(self, "jump_times", times)
        prev = 0.0
        for t in times:
            if not (prev < t <= self.T):
                raise ValueError(
                    f"jump times must be strictly increasing in (0, {self.T}], got {times}"
                )
            prev = t

    @property
    def n_jumps(self) -> int:
        return len(self.jump_times)


def _check_time(path: JumpPath, t: float) -> None:
    if not (0.0 <= t <= path.T):
        raise ValueError(f"time {t} outside [0, {path.T}]")


def count_at(path: JumpPath, t: float) -> int:
    """``N_t``: number of jumps at or before ``t``."""
    _check_time(path, t)
    return bisect.bisect_right(path.jump_times, t)


def count_before(path: JumpPath, t: float) -> int:
    """``N_{t-}``: number of jumps strictly before ``t``."""
    _check_time(path, t)
    return bisect.bisect_left(path.jump_times, t)


def stock_at(params: ModelParams, path: JumpPath, t: float) -> float:
    return params.s0 * math.exp(params.alpha * count_at(path, t) - params.beta * t)


def stock_before(params: ModelParams, path: JumpPath, t: float) -> float:
    return params.s0 * math.exp(params.alpha * count_before(path, t) - params.beta * t)


def path_rng(seed: int, path_index: int) -> np.random.Generator:
    """Independent generator for one path; depends only on ``(seed, path_index)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(path_index),))
    return np.random.Generator(np.random.PCG64(ss))


def sample_path(seed: int, path_index: int, intensity: float, T: float) -> JumpPath:
    """Sample jump times on ``(0, T]`` from exponential interarrivals.

    The unit exponentials come from the ``(seed, path_index)`` stream and are
    scaled by ``1 / intensity``, so paths drawn at different intensities with
    the same stream are coupled.
    """
    if not intensity > 0:
        raise ValueError(f"intensity must be positive, got {intensity}")
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    rng = path_rng(seed, path_index)
    mean = intensity * T
    batch = int(mean + 6.0 * math.sqrt(mean) + 8)
    times: list[float] = []
    clock = 0.0
    while True:
        gaps = rng.standard_exponential(batch) / intensity
        arrivals = clock + np.cumsum(gaps)
        inside = arrivals[arrivals <= T]
        times.extend(float(x) for x in inside)
        if inside.size < batch:
            break
        clock = float(arrivals[-1])
    # cumsum can produce equal neighbours when gaps underflow; drop them
    dedup = [t for i, t in enumerate(times) if t > 0.0 and (i == 0 or t > times[i - 1])]
    return JumpPath(tuple(dedup), float(T), float(intensity))
