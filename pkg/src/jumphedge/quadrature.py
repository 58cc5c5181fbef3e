"""Adaptive Simpson quadrature for smooth integrands on short segments."""

from __future__ import annotations

import math
from typing import Callable

__all__ = ["QuadratureError", "adaptive_simpson"]


class QuadratureError(ArithmeticError):
    pass


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-9, max_depth: int = 40) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Classic Richardson-corrected scheme: an interval is accepted when the two
    half-interval Simpson sums differ from the whole by at most ``15 * tol``;
    the tolerance is split in half on each refinement.
    """
    if b < a:
        raise ValueError(f"empty interval [{a}, {b}]")
    if b == a:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _refine(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _refine(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    # the floor keeps round-off in the integrand from forcing endless refinement
    floor = 64.0 * math.ulp(max(abs(whole), abs(left) + abs(right)))
    if abs(delta) <= max(15.0 * tol, floor):
        return left + right + delta / 15.0
    if depth <= 0:
        raise QuadratureError(f"adaptive Simpson did not converge on [{a!r}, {b!r}]")
    return (_refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + _refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1))
