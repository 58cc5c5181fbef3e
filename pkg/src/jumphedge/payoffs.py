"""European payoff functions ``f`` on ``(0, inf)``.

Each payoff carries a growth envelope ``(C, p, q)`` meaning
``|f(y)| <= C * (1 + y**p + y**-q)``; the valuation series uses it to bound
its truncated tail. Payoffs with a derivative (and a derivative envelope) are
eligible for delta hedging.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "Envelope",
    "Payoff",
    "LogPayoff",
    "PowerPayoff",
    "CallPayoff",
    "CustomPayoff",
    "Constant",
    "constant_payoff",
    "parse_payoff",
    "DeltaUnavailable",
    "UnsupportedPayoff",
]


class DeltaUnavailable(ValueError):
    """The payoff has no usable derivative, so no delta-hedging strategy exists."""


class UnsupportedPayoff(TypeError):
    """The operation has no formula for this payoff variant."""


@dataclass(frozen=True)
class Envelope:
    C: float
    p: float = 0.0
    q: float = 0.0

    def __post_init__(self) -> None:
        if not (self.C >= 0 and self.p >= 0 and self.q >= 0):
            raise ValueError(f"envelope constants must be nonnegative, got {self}")

    def bound(self, y):
        y = np.asarray(y, dtype=float)
        return self.C * (1.0 + y**self.p + y ** (-self.q))


class Payoff:
    """Base class. Subclasses implement ``__call__`` on arrays."""

    envelope: Envelope
    derivative_envelope: Envelope | None = None

    def __call__(self, y):
        raise NotImplementedError

    @property
    def delta_eligible(self) -> bool:
        return self.derivative_envelope is not None

    def derivative(self, y):
        raise DeltaUnavailable(f"{self.describe()} has no declared derivative")

    def describe(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class LogPayoff(Payoff):
    # |log y| <= y + 1/y
    envelope = Envelope(1.0, 1.0, 1.0)
    derivative_envelope = Envelope(1.0, 0.0, 1.0)

    def __call__(self, y):
        return np.log(y)

    def derivative(self, y):
        return 1.0 / np.asarray(y, dtype=float)

    def describe(self) -> str:
        return "log"


@dataclass(frozen=True)
class PowerPayoff(Payoff):
    a: float

    def __post_init__(self) -> None:
        if self.a == 0 or not math.isfinite(self.a):
            raise ValueError(f"power exponent must be finite and nonzero, got {self.a}")

    @property
    def envelope(self) -> Envelope:  # type: ignore[override]
        return Envelope(1.0, max(self.a, 0.0), max(-self.a, 0.0))

    @property
    def derivative_envelope(self) -> Envelope:  # type: ignore[override]
        b = self.a - 1.0
        return Envelope(abs(self.a), max(b, 0.0), max(-b, 0.0))

    def __call__(self, y):
        return np.asarray(y, dtype=float) ** self.a

    def derivative(self, y):
        return self.a * np.asarray(y, dtype=float) ** (self.a - 1.0)

    def describe(self) -> str:
        return f"power:{self.a:g}"


@dataclass(frozen=True)
class CallPayoff(Payoff):
    """Discounted call ``(y - K)^+``. Not differentiable at the strike."""

    strike: float
    envelope = Envelope(1.0, 1.0, 0.0)

    def __post_init__(self) -> None:
        if not self.strike > 0:
            raise ValueError(f"strike must be positive, got {self.strike}")

    def __call__(self, y):
        return np.maximum(np.asarray(y, dtype=float) - self.strike, 0.0)

    def derivative(self, y):
        raise DeltaUnavailable("call payoff is not C^1 at the strike; delta hedging is undefined")

    def describe(self) -> str:
        return f"call:{self.strike:g}"


@dataclass(frozen=True)
class CustomPayoff(Payoff):
    """User payoff. ``f`` must accept a float array; a scalar return is broadcast."""

    f: Callable
    envelope: Envelope  # type: ignore[misc]
    f_prime: Callable | None = None
    derivative_envelope: Envelope | None = None  # type: ignore[misc]
    name: str = "custom"

    def __post_init__(self) -> None:
        if (self.f_prime is None) != (self.derivative_envelope is None):
            raise ValueError("f_prime and derivative_envelope must be given together")

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return np.broadcast_to(np.asarray(self.f(y), dtype=float), y.shape).copy()

    def derivative(self, y):
        if self.f_prime is None:
            raise DeltaUnavailable(f"{self.name} payoff declares no derivative")
        y = np.asarray(y, dtype=float)
        return np.broadcast_to(np.asarray(self.f_prime(y), dtype=float), y.shape).copy()

    def describe(self) -> str:
        return self.name


@dataclass(frozen=True)
class Constant:
    """Picklable constant function, usable as ``f`` or ``f_prime``."""

    c: float

    def __call__(self, y):
        return np.full(np.shape(y), self.c, dtype=float)


def constant_payoff(c: float) -> CustomPayoff:
    return CustomPayoff(
        Constant(float(c)),
        Envelope(abs(float(c))),
        f_prime=Constant(0.0),
        derivative_envelope=Envelope(0.0),
        name=f"const:{c:g}",
    )


def parse_payoff(text: str) -> Payoff:
    """Parse ``log``, ``power:a``, ``call:K`` or ``const:c``."""
    kind, _, arg = text.strip().partition(":")
    kind = kind.lower()
    try:
        if kind == "log" and not arg:
            return LogPayoff()
        if kind == "power":
            return PowerPayoff(float(arg))
        if kind == "call":
            return CallPayoff(float(arg))
        if kind in ("const", "constant"):
            return constant_payoff(float(arg))
    except ValueError as exc:
        raise ValueError(f"bad payoff string {text!r}: {exc}") from None
    raise ValueError(f"unknown payoff string {text!r} (expected log, power:a, call:K, const:c)")
