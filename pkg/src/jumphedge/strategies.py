"""Hedging strategies in the Poisson market and their pathwise wealth.

Every strategy is described by its normalized integrand ``theta`` against the
compensated process ``X_t = N_t - lambda t``; the discounted wealth is

    W_t = W_0 + sum_{tau_j <= t} theta(tau_j) - lambda * int_0^t theta(u) du.

Integrands are always evaluated at the pre-jump state ``S_{u-}`` so that they
are predictable.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .market import JumpPath, ModelParams, count_before
from .payoffs import DeltaUnavailable, LogPayoff, Payoff, PowerPayoff
from .quadrature import adaptive_simpson
from .valuation import DEFAULT_TOL, check_claim, power_growth, value, value_delta

__all__ = [
    "Replicating",
    "DeltaHedge",
    "Suicide",
    "Combined",
    "Strategy",
    "WealthSeries",
    "Hedger",
    "parse_strategy",
    "replicating_units",
    "delta_units",
    "suicide_integrand",
    "normalized_integrand",
    "initial_capital",
    "wealth_process",
    "replication_error",
    "DEFAULT_QUAD_TOL",
    "TERMINAL_JUMP_EPS",
]

DEFAULT_QUAD_TOL = 1e-9
# jumps this close to T end the suicide product instead of blowing it up
TERMINAL_JUMP_EPS = 1e-12


@dataclass(frozen=True)
class Replicating:
    """Minimal-capital replicating strategy: holds ``(V(t,(1+s)S-) - V(t,S-)) / (s S-)`` shares."""


@dataclass(frozen=True)
class DeltaHedge:
    """Holds ``dV/dx(t, S_{t-})`` shares, starting from the same capital as :class:`Replicating`."""


@dataclass(frozen=True)
class Suicide:
    """Nonnegative wealth that starts at ``x`` and is exactly zero at ``T``."""

    x: float

    def __post_init__(self) -> None:
        if not self.x > 0:
            raise ValueError(f"suicide capital must be positive, got {self.x}")


@dataclass(frozen=True)
class Combined:
    components: tuple[tuple[float, "Strategy"], ...]

    def __post_init__(self) -> None:
        comps = tuple((float(w), s) for w, s in self.components)
        if not comps:
            raise ValueError("combined strategy needs at least one component")
        object.__setattr__(self, "components", comps)


Strategy = Union[Replicating, DeltaHedge, Suicide, Combined]


def parse_strategy(text: str) -> Strategy:
    """Parse ``repl``, ``delta``, ``suicide:x`` or ``combined[:excess]``.

    ``combined:e`` is the replicating strategy plus a suicide strategy with
    capital ``e`` (default 1), i.e. replication from ``U_0 + e``.
    """
    kind, _, arg = text.strip().partition(":")
    kind = kind.lower()
    try:
        if kind in ("repl", "replicating") and not arg:
            return Replicating()
        if kind == "delta" and not arg:
            return DeltaHedge()
        if kind == "suicide":
            return Suicide(float(arg))
        if kind == "combined":
            excess = float(arg) if arg else 1.0
            return Combined(((1.0, Replicating()), (1.0, Suicide(excess))))
    except ValueError as exc:
        raise ValueError(f"bad strategy string {text!r}: {exc}") from None
    raise ValueError(f"unknown strategy string {text!r} (expected repl, delta, suicide:x, combined[:e])")


# ---------------------------------------------------------------------------
# pointwise integrands


def replicating_units(payoff: Payoff, params: ModelParams, t: float, s_minus: float,
                      tol: float = DEFAULT_TOL) -> float:
    up = value(payoff, params, t, (1.0 + params.sigma) * s_minus, tol).value
    here = value(payoff, params, t, s_minus, tol).value
    return (up - here) / (params.sigma * s_minus)


def delta_units(payoff: Payoff, params: ModelParams, t: float, s_minus: float,
                tol: float = DEFAULT_TOL) -> float:
    return value_delta(payoff, params, t, s_minus, tol).value


def _suicide_levels(x: float, lambda_rn: float, T: float, jump_times) -> list[float]:
    """``psi`` on each inter-jump interval: entry ``n`` applies while ``N_{t-} = n``."""
    level = x / (lambda_rn * T)
    levels = [level]
    capped = False
    for tau in jump_times:
        if not capped and tau >= T - TERMINAL_JUMP_EPS:
            capped = True
        if not capped:
            level = level * (1.0 + 1.0 / (lambda_rn * (T - tau)))
        levels.append(level)
    return levels


def suicide_integrand(x: float, lambda_rn: float, T: float, path: JumpPath, t: float) -> float:
    if not (0.0 <= t <= T):
        raise ValueError(f"time {t} outside [0, {T}]")
    n = bisect.bisect_left(path.jump_times, t)
    return _suicide_levels(x, lambda_rn, T, path.jump_times[:n])[n]


# ---------------------------------------------------------------------------
# legs: one primitive strategy bound to a payoff and parameters


def _exp_integral(log_amp: float, rate: float, a: float, b: float) -> float:
    """``int_a^b exp(log_amp - rate u) du``."""
    if rate == 0.0:
        return math.exp(log_amp) * (b - a)
    return math.exp(log_amp - rate * a) * (-math.expm1(-rate * (b - a))) / rate


class _Leg:
    capital: float

    def theta(self, u: float, n: int) -> float:
        """Normalized integrand at time ``u`` given ``N_{u-} = n``."""
        raise NotImplementedError

    def integral(self, a: float, b: float, n: int, quad_tol: float) -> float:
        return adaptive_simpson(lambda u: self.theta(u, n), a, b, quad_tol)


class _ValueLeg(_Leg):
    """Replicating or delta leg; closed forms used for log and power payoffs."""

    def __init__(self, payoff: Payoff, params: ModelParams, tol: float, closed: bool, capital: float):
        self.payoff, self.params, self.tol, self.capital = payoff, params, tol, capital
        self.closed = closed and isinstance(payoff, (LogPayoff, PowerPayoff))

    def s_minus(self, u: float, n: int) -> float:
        p = self.params
        return p.s0 * math.exp(p.alpha * n - p.beta * u)


class _ReplLeg(_ValueLeg):
    def theta(self, u, n):
        p = self.params
        if self.closed:
            if isinstance(self.payoff, LogPayoff):
                return p.alpha
            a = self.payoff.a
            return ((1.0 + p.sigma) ** a - 1.0) * self.s_minus(u, n) ** a * power_growth(a, p, u)
        s = self.s_minus(u, n)
        return value(self.payoff, p, u, (1.0 + p.sigma) * s, self.tol).value - value(self.payoff, p, u, s, self.tol).value

    def integral(self, a, b, n, quad_tol):
        p = self.params
        if self.closed:
            if isinstance(self.payoff, LogPayoff):
                return p.alpha * (b - a)
            ap = self.payoff.a
            coef = (1.0 + p.sigma) ** ap - 1.0
            return math.copysign(1.0, coef) * _power_integral(abs(coef), ap, p, n, a, b)
        return super().integral(a, b, n, quad_tol)


class _DeltaLeg(_ValueLeg):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        if not self.payoff.delta_eligible:
            raise DeltaUnavailable(f"{self.payoff.describe()} payoff is not eligible for delta hedging")

    def theta(self, u, n):
        p = self.params
        if self.closed:
            if isinstance(self.payoff, LogPayoff):
                return p.sigma
            a = self.payoff.a
            return a * p.sigma * self.s_minus(u, n) ** a * power_growth(a, p, u)
        s = self.s_minus(u, n)
        return p.sigma * s * value_delta(self.payoff, p, u, s, self.tol).value

    def integral(self, a, b, n, quad_tol):
        p = self.params
        if self.closed:
            if isinstance(self.payoff, LogPayoff):
                return p.sigma * (b - a)
            ap = self.payoff.a
            coef = ap * p.sigma
            return math.copysign(1.0, coef) * _power_integral(abs(coef), ap, p, n, a, b)
        return super().integral(a, b, n, quad_tol)


def _power_integral(coef: float, a: float, p: ModelParams, n: int, lo: float, hi: float) -> float:
    # coef * S_{u-}^a g(u) = exp(log_amp - r u) with r = lambda ((1+sigma)^a - 1)
    kappa = p.lambda_rn * ((1.0 + p.sigma) ** a - 1.0) - p.sigma * p.lambda_rn * a
    log_amp = math.log(coef) + a * (math.log(p.s0) + p.alpha * n) + kappa * p.T
    rate = a * p.beta + kappa
    return _exp_integral(log_amp, rate, lo, hi)


class _SuicideLeg(_Leg):
    def __init__(self, x: float, params: ModelParams):
        self.capital = x
        self.x, self.params = x, params
        self._levels: list[float] = []

    def bind(self, path: JumpPath) -> None:
        self._levels = _suicide_levels(self.x, self.params.lambda_rn, self.params.T, path.jump_times)

    def theta(self, u, n):
        return self._levels[n]

    def integral(self, a, b, n, quad_tol):
        return self._levels[n] * (b - a)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WealthSeries:
    sample_times: np.ndarray
    n_jumps: np.ndarray  # N_t at each sample time
    stock: np.ndarray  # S_t at each sample time
    values: np.ndarray  # wealth W_t
    values_pre: np.ndarray  # W_{t-}; differs from values only at jump times
    is_jump: np.ndarray
    initial_capital: float
    quadrature_tol: float

    @property
    def terminal(self) -> float:
        return float(self.values[-1])


class Hedger:
    """A strategy bound to a payoff and model, reusable across many paths.

    ``method="auto"`` integrates log and power payoffs in closed form and uses
    series values plus adaptive Simpson otherwise; ``method="quadrature"``
    forces the series/quadrature route for every payoff.
    """

    def __init__(self, strategy: Strategy, payoff: Payoff, params: ModelParams, *,
                 tol: float = DEFAULT_TOL, quad_tol: float = DEFAULT_QUAD_TOL, method: str = "auto"):
        if method not in ("auto", "quadrature"):
            raise ValueError(f"unknown method {method!r}")
        self.strategy, self.payoff, self.params = strategy, payoff, params
        self.tol, self.quad_tol, self.method = tol, quad_tol, method
        self.claim_floor = check_claim(payoff, params, tol)
        self._u0: float | None = None
        self.legs: list[tuple[float, _Leg]] = []
        self._flatten(strategy, 1.0)
        self.initial_capital = math.fsum(w * leg.capital for w, leg in self.legs)

    @property
    def u0(self) -> float:
        if self._u0 is None:
            self._u0 = value(self.payoff, self.params, 0.0, self.params.s0, self.tol).value
        return self._u0

    def _flatten(self, strategy: Strategy, weight: float) -> None:
        closed = self.method == "auto"
        if isinstance(strategy, Replicating):
            self.legs.append((weight, _ReplLeg(self.payoff, self.params, self.tol, closed, self.u0)))
        elif isinstance(strategy, DeltaHedge):
            self.legs.append((weight, _DeltaLeg(self.payoff, self.params, self.tol, closed, self.u0)))
        elif isinstance(strategy, Suicide):
            self.legs.append((weight, _SuicideLeg(strategy.x, self.params)))
        elif isinstance(strategy, Combined):
            for w, sub in strategy.components:
                self._flatten(sub, weight * w)
        else:
            raise TypeError(f"not a strategy: {strategy!r}")

    def _bind(self, path: JumpPath) -> None:
        if path.T != self.params.T:
            raise ValueError(f"path horizon {path.T} does not match model horizon {self.params.T}")
        for _, leg in self.legs:
            if isinstance(leg, _SuicideLeg):
                leg.bind(path)

    def theta(self, path: JumpPath, t: float) -> float:
        self._bind(path)
        n = count_before(path, t)
        return math.fsum(w * leg.theta(t, n) for w, leg in self.legs)

    def wealth(self, path: JumpPath, grid_resolution: int = 1) -> WealthSeries:
        if grid_resolution < 1:
            raise ValueError("grid_resolution must be at least 1")
        self._bind(path)
        p = self.params
        grid = np.linspace(0.0, p.T, grid_resolution + 1)
        times = np.union1d(grid, np.asarray(path.jump_times, dtype=float))
        jumps = set(path.jump_times)
        m = times.size
        values = np.empty(m)
        values_pre = np.empty(m)
        counts = np.empty(m, dtype=int)
        is_jump = np.zeros(m, dtype=bool)
        w = self.initial_capital
        values[0] = values_pre[0] = w
        counts[0] = 0
        n = 0
        for i in range(1, m):
            a, b = float(times[i - 1]), float(times[i])
            # on (a, b] the pre-jump count is n
            comp = math.fsum(wt * leg.integral(a, b, n, self.quad_tol) for wt, leg in self.legs)
            w = w - p.lambda_rn * comp
            values_pre[i] = w
            if b in jumps:
                w = w + math.fsum(wt * leg.theta(b, n) for wt, leg in self.legs)
                n += 1
                is_jump[i] = True
            values[i] = w
            counts[i] = n
        stock = p.s0 * np.exp(p.alpha * counts - p.beta * times)
        return WealthSeries(times, counts, stock, values, values_pre, is_jump,
                            self.initial_capital, self.quad_tol)

    def error(self, path: JumpPath) -> float:
        """Terminal replication error ``W_T - f(S_T)``."""
        series = self.wealth(path, 1)
        return series.terminal - float(self.payoff(np.array([series.stock[-1]]))[0])


def initial_capital(strategy: Strategy, payoff: Payoff, params: ModelParams,
                    tol: float = DEFAULT_TOL) -> float:
    return Hedger(strategy, payoff, params, tol=tol).initial_capital


def normalized_integrand(strategy: Strategy, payoff: Payoff, params: ModelParams,
                         path: JumpPath, t: float, tol: float = DEFAULT_TOL,
                         method: str = "auto") -> float:
    """Integrand against ``dX`` at ``t``, i.e. ``sigma S_{t-}`` times the share count."""
    return Hedger(strategy, payoff, params, tol=tol, method=method).theta(path, t)


def wealth_process(strategy: Strategy, payoff: Payoff, params: ModelParams, path: JumpPath,
                   grid_resolution: int = 16, quad_tol: float = DEFAULT_QUAD_TOL,
                   tol: float = DEFAULT_TOL, method: str = "auto") -> WealthSeries:
    return Hedger(strategy, payoff, params, tol=tol, quad_tol=quad_tol, method=method).wealth(path, grid_resolution)


def replication_error(strategy: Strategy, payoff: Payoff, params: ModelParams, path: JumpPath,
                      quad_tol: float = DEFAULT_QUAD_TOL, tol: float = DEFAULT_TOL,
                      method: str = "auto") -> float:
    return Hedger(strategy, payoff, params, tol=tol, quad_tol=quad_tol, method=method).error(path)
