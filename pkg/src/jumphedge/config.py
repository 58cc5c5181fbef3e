"""Run configuration for the command line tool.

A run is described by a flat JSON object. Keys (all optional):

==============  =======  ==========================================
key             type     meaning
==============  =======  ==========================================
s0              number   initial discounted stock price
sigma           number   relative jump size (price multiplies by 1+sigma)
lambda          number   pricing (risk-neutral) jump intensity
real_lambda     number   sampling intensity; defaults to ``lambda``
horizon         number   maturity T
payoff          string   ``log``, ``power:a``, ``call:K``, ``const:c``
strategy        string   ``repl``, ``delta``, ``suicide:x``, ``combined[:e]``
paths           integer  Monte Carlo path count
seed            integer  root seed for all randomness
tol             number   series truncation tolerance
quad_tol        number   per-segment quadrature tolerance
grid            integer  uniform sample points per path report
method          string   ``auto`` or ``quadrature``
path_index      integer  which sampled path to report
x               number   suicide-strategy capital
delta           boolean  ``value``: require the delta (exit 3 if undefined)
vol             number   diffusion volatility for ``bms-demo``
steps           list     rebalancing counts for ``bms-demo``
bms_grid        integer  clock grid size for the diffusion suicide demo
out             string   output directory
threads         integer  worker processes (0 = all cores)
==============  =======  ==========================================

Unknown keys are rejected. Command-line flags override file values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .market import ModelParams, derive_params
from .payoffs import Payoff, parse_payoff
from .strategies import Strategy, parse_strategy

__all__ = ["ConfigError", "RunConfig", "load_config"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    s0: float = 100.0
    sigma: float = 0.1
    lambda_: float = 1.0
    real_lambda: float | None = None
    horizon: float = 1.0
    payoff: str = "log"
    strategy: str = "delta"
    paths: int = 10_000
    seed: int = 20111
    tol: float = 1e-12
    quad_tol: float = 1e-9
    grid: int = 16
    method: str = "auto"
    path_index: int = 0
    x: float = 1.0
    delta: bool = False
    vol: float = 0.2
    steps: tuple[int, ...] = (16, 64, 256, 1024)
    bms_grid: int = 10_000
    out: str = "."
    threads: int = 0
    _payoff: Payoff | None = field(default=None, init=False, repr=False, compare=False)
    _strategy: Strategy | None = field(default=None, init=False, repr=False, compare=False)

    def validate(self) -> "RunConfig":
        for name in ("s0", "sigma", "lambda_", "horizon", "tol", "quad_tol", "x", "vol"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) and v > 0):
                raise ConfigError(f"{_key(name)} must be a positive number, got {v!r}")
        if self.real_lambda is not None and not self.real_lambda > 0:
            raise ConfigError(f"real_lambda must be positive, got {self.real_lambda!r}")
        for name, low in (("paths", 1), ("grid", 1), ("bms_grid", 100), ("path_index", 0), ("threads", 0)):
            v = getattr(self, name)
            if not (isinstance(v, int) and not isinstance(v, bool) and v >= low):
                raise ConfigError(f"{name} must be an integer >= {low}, got {v!r}")
        if not self.steps or any(not isinstance(n, int) or n < 1 for n in self.steps):
            raise ConfigError(f"steps must be positive integers, got {self.steps!r}")
        if self.method not in ("auto", "quadrature"):
            raise ConfigError(f"method must be 'auto' or 'quadrature', got {self.method!r}")
        try:
            object.__setattr__(self, "_payoff", parse_payoff(self.payoff))
            object.__setattr__(self, "_strategy", parse_strategy(self.strategy))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    @property
    def params(self) -> ModelParams:
        return derive_params(self.s0, self.sigma, self.lambda_, self.horizon)

    @property
    def payoff_obj(self) -> Payoff:
        return self._payoff if self._payoff is not None else parse_payoff(self.payoff)

    @property
    def strategy_obj(self) -> Strategy:
        return self._strategy if self._strategy is not None else parse_strategy(self.strategy)

    @property
    def sampling_intensity(self) -> float:
        return self.lambda_ if self.real_lambda is None else self.real_lambda

    def to_json_dict(self) -> dict:
        out = {}
        for f in fields(self):
            if f.name.startswith("_"):
                continue
            v = getattr(self, f.name)
            out[_key(f.name)] = list(v) if isinstance(v, tuple) else v
        return out


def _key(name: str) -> str:
    return "lambda" if name == "lambda_" else name


def _attr(key: str) -> str:
    return "lambda_" if key == "lambda" else key


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig) if not f.name.startswith("_")}


def _coerce(name: str, v):
    if name == "steps":
        if isinstance(v, str):
            v = [s for s in v.split(",") if s.strip()]
        if not isinstance(v, (list, tuple)):
            raise ConfigError(f"steps must be a list of integers, got {v!r}")
        try:
            return tuple(int(s) for s in v)
        except (TypeError, ValueError):
            raise ConfigError(f"steps must be a list of integers, got {v!r}") from None
    if name in ("paths", "grid", "bms_grid", "path_index", "threads", "seed"):
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{name} must be an integer, got {v!r}")
        return v
    if name == "delta":
        if not isinstance(v, bool):
            raise ConfigError(f"delta must be a boolean, got {v!r}")
        return v
    if name in ("payoff", "strategy", "method", "out"):
        if not isinstance(v, str):
            raise ConfigError(f"{name} must be a string, got {v!r}")
        return v
    if v is None and name == "real_lambda":
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{_key(name)} must be a number, got {v!r}")
    return float(v)


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then the JSON file, then ``overrides`` (keys as in the file)."""
    values: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        values.update(data)
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = sorted(k for k in values if _attr(k) not in _FIELD_TYPES)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    kwargs = {_attr(k): _coerce(_attr(k), v) for k, v in values.items()}
    return replace(RunConfig(), **kwargs).validate()
