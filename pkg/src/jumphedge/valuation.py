"""Value function of a European claim in the Poisson market.

``V(t, x) = E f(x * exp(alpha * (N_T - N_t) - beta * (T - t)))`` is a Poisson
mixture, evaluated here as a truncated series whose discarded tail is bounded
through the payoff's growth envelope. Writing ``b = x * exp(-beta (T-t))``
and ``m = lambda (T-t)``,

    V(t, x)    = sum_k f(b e^{alpha k})  Pois(m; k)
    dV/dx(t,x) = sum_k f'(b e^{alpha k}) Pois(m e^alpha; k)

(the second uses ``e^{-beta(T-t)} e^{-m} (m e^alpha)^k / k! = Pois(m e^alpha; k)``
because ``lambda + beta = lambda e^alpha``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, pdtrc

from .market import ModelParams
from .payoffs import (
    CustomPayoff,
    DeltaUnavailable,
    Envelope,
    LogPayoff,
    Payoff,
    PowerPayoff,
    UnsupportedPayoff,
)

__all__ = [
    "SeriesResult",
    "TruncationFailure",
    "DEFAULT_TOL",
    "DEFAULT_MAX_TERMS",
    "value",
    "value_delta",
    "closed_form_value",
    "closed_form_delta",
    "power_growth",
    "truncation_cutoff",
    "poisson_series",
    "check_claim",
]

DEFAULT_TOL = 1e-12
DEFAULT_MAX_TERMS = 10_000


class TruncationFailure(ArithmeticError):
    """The envelope tail bound could not reach the tolerance within the term budget."""


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms_used: int
    tail_bound: float


def _poisson_weights(rate: float, n: int) -> np.ndarray:
    """Poisson(rate) pmf at 0..n-1, by the ratio recurrence when it cannot overflow."""
    if rate < 600.0:
        ratios = np.empty(n)
        ratios[0] = math.exp(-rate)
        if n > 1:
            ratios[1:] = rate / np.arange(1, n)
        return np.cumprod(ratios)
    k = np.arange(n)
    return np.exp(k * math.log(rate) - rate - gammaln(k + 1.0))


def _tail_bound(env: Envelope, base: float, rate: float, growth: float, ks: np.ndarray) -> np.ndarray:
    """Bound on ``sum_{k > K} C (1 + y_k^p + y_k^-q) Pois(rate; k)`` for each K in ``ks``.

    With ``y_k = base * growth**k`` each piece is an exponentially tilted
    Poisson tail: ``sum_{k>K} r^k Pois(m; k) = exp(m (r - 1)) * P(Pois(m r) > K)``.
    """
    if env.C == 0.0:
        return np.zeros(ks.shape)
    total = pdtrc(ks, rate)
    for power in (env.p, -env.q):
        if power == 0.0:
            total = total + pdtrc(ks, rate)
            continue
        r = growth**power
        exponent = power * math.log(base) + rate * (r - 1.0)
        scale = math.exp(exponent) if exponent < 700.0 else math.inf
        total = total + scale * pdtrc(ks, rate * r)
    return env.C * total


def _cutoff(env: Envelope, base: float, rate: float, growth: float, tol: float, max_terms: int) -> tuple[int, float]:
    if rate == 0.0:
        return 0, 0.0
    # the bound is nonincreasing in K: scan windows from 0 for the first K under tol
    hi_rate = rate * max(1.0, growth**env.p)
    width = int(hi_rate + 20.0 * math.sqrt(hi_rate) + 64)
    lo = 0
    while lo <= max_terms:
        ks = np.arange(lo, min(lo + width, max_terms + 1), dtype=float)
        bounds = _tail_bound(env, base, rate, growth, ks)
        ok = np.nonzero(bounds <= tol)[0]
        if ok.size:
            i = int(ok[0])
            return int(ks[i]), float(bounds[i])
        lo += width
    raise TruncationFailure(
        f"tail bound above tol={tol:g} after {max_terms} terms "
        f"(envelope={env}, base={base:g}, rate={rate:g})"
    )


def poisson_series(g, env: Envelope, base: float, rate: float, growth: float,
                   tol: float = DEFAULT_TOL, max_terms: int = DEFAULT_MAX_TERMS) -> SeriesResult:
    """``sum_k g(base * growth**k) Pois(rate; k)`` with a certified truncation bound."""
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if rate == 0.0:
        return SeriesResult(float(np.asarray(g(np.array([base])))[0]), 0, 0.0)
    if not (0.0 < base < math.inf):
        # x * exp(-beta (T - t)) left the double range; the lattice is not representable
        raise TruncationFailure(f"series base {base!r} is not a positive finite double (rate={rate:g})")
    K, bound = _cutoff(env, base, rate, growth, tol, max_terms)
    k = np.arange(K + 1)
    y = base * np.exp(math.log(growth) * k)
    with np.errstate(over="ignore", invalid="ignore"):
        terms = np.asarray(g(y), dtype=float) * _poisson_weights(rate, K + 1)
    if not np.all(np.isfinite(terms)):
        raise TruncationFailure(f"non-finite series term (base={base:g}, rate={rate:g})")
    return SeriesResult(math.fsum(terms.tolist()), K + 1, bound)


def _check_point(params: ModelParams, t: float, x: float) -> None:
    if not (0.0 <= t <= params.T):
        raise ValueError(f"time {t} outside [0, {params.T}]")
    if not x > 0:
        raise ValueError(f"price must be positive, got {x}")


def value(payoff: Payoff, params: ModelParams, t: float, x: float,
          tol: float = DEFAULT_TOL, max_terms: int = DEFAULT_MAX_TERMS) -> SeriesResult:
    """Series value ``V(t, x)``; exactly ``f(x)`` at ``t = T``."""
    _check_point(params, t, x)
    tau = params.T - t
    base = x * math.exp(-params.beta * tau)
    return poisson_series(payoff, payoff.envelope, base, params.lambda_rn * tau,
                          1.0 + params.sigma, tol, max_terms)


def value_delta(payoff: Payoff, params: ModelParams, t: float, x: float,
                tol: float = DEFAULT_TOL, max_terms: int = DEFAULT_MAX_TERMS) -> SeriesResult:
    """Series for ``dV/dx(t, x)``; needs a payoff with a declared derivative."""
    if not payoff.delta_eligible:
        raise DeltaUnavailable(f"{payoff.describe()} payoff is not eligible for delta hedging")
    _check_point(params, t, x)
    tau = params.T - t
    base = x * math.exp(-params.beta * tau)
    rate = params.lambda_rn * (1.0 + params.sigma) * tau
    return poisson_series(payoff.derivative, payoff.derivative_envelope, base, rate,
                          1.0 + params.sigma, tol, max_terms)


def truncation_cutoff(envelope: Envelope, params: ModelParams, t: float, x: float,
                      tol: float = DEFAULT_TOL, max_terms: int = DEFAULT_MAX_TERMS) -> int:
    """Largest index ``K`` kept by :func:`value` for a payoff with this envelope."""
    _check_point(params, t, x)
    tau = params.T - t
    base = x * math.exp(-params.beta * tau)
    K, _ = _cutoff(envelope, base, params.lambda_rn * tau, 1.0 + params.sigma, tol, max_terms)
    return K


def power_growth(a: float, params: ModelParams, t: float) -> float:
    """``g(t)`` with ``V(t, x) = x**a g(t)`` for the power payoff."""
    lam, sig = params.lambda_rn, params.sigma
    return math.exp((params.T - t) * (lam * ((1.0 + sig) ** a - 1.0) - sig * lam * a))


def closed_form_value(payoff: Payoff, params: ModelParams, t: float, x: float) -> float:
    _check_point(params, t, x)
    if isinstance(payoff, LogPayoff):
        drift = params.lambda_rn * params.alpha - params.beta
        return math.log(x) + drift * (params.T - t)
    if isinstance(payoff, PowerPayoff):
        return x**payoff.a * power_growth(payoff.a, params, t)
    raise UnsupportedPayoff(f"no closed form for {payoff.describe()}")


def closed_form_delta(payoff: Payoff, params: ModelParams, t: float, x: float) -> float:
    _check_point(params, t, x)
    if isinstance(payoff, LogPayoff):
        return 1.0 / x
    if isinstance(payoff, PowerPayoff):
        a = payoff.a
        return a * x ** (a - 1.0) * power_growth(a, params, t)
    raise UnsupportedPayoff(f"no closed form for {payoff.describe()}")


def check_claim(payoff: Payoff, params: ModelParams, tol: float = DEFAULT_TOL) -> float:
    """Check the claim is bounded below and integrable on the support of ``S_T``.

    Returns the lower bound of ``f`` over the price lattice visited by the
    series (the admissibility constant ``-c``). Raises ``ValueError`` when the
    claim is not admissible.
    """
    base = params.s0 * math.exp(-params.beta * params.T)
    rate = params.lambda_rn * params.T
    # E|f(S_T)| finite: the absolute series must certify
    res = poisson_series(lambda y: np.abs(payoff(y)), payoff.envelope, base, rate, 1.0 + params.sigma, tol)
    if not math.isfinite(res.value):
        raise ValueError(f"{payoff.describe()}: E|f(S_T)| is not finite")
    k = np.arange(max(res.terms_used, 1))
    lattice = payoff(base * (1.0 + params.sigma) ** k)
    if not np.all(np.isfinite(lattice)):
        raise ValueError(f"{payoff.describe()}: payoff not finite on the support of S_T")
    if isinstance(payoff, CustomPayoff) and np.any(np.abs(lattice) > payoff.envelope.bound(base * (1.0 + params.sigma) ** k) * (1 + 1e-12)):
        raise ValueError(f"{payoff.name}: payoff violates its declared envelope")
    return float(lattice.min())
