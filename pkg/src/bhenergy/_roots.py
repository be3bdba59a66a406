"""Safeguarded Newton iteration on a bracketed scalar root."""

from __future__ import annotations

from typing import Callable

from .errors import NoConvergence


def solve_bracketed(
    fun: Callable[[float], tuple[float, float]],
    lo: float,
    hi: float,
    *,
    increasing: bool,
    x0: float | None = None,
    xtol: float = 0.0,
    ftol: float = 0.0,
    maxiter: int = 200,
) -> float:
    """Root of ``fun`` inside ``[lo, hi]``.

    ``fun(x)`` returns ``(f, df/dx)``. The caller guarantees a sign change across the bracket, with
    ``f`` increasing or decreasing as stated. Newton steps are taken while they stay inside the
    bracket and shrink fast enough; otherwise the bracket is bisected.
    """
    x = 0.5 * (lo + hi) if x0 is None or not lo <= x0 <= hi else x0
    dx_old = hi - lo
    dx = dx_old
    for _ in range(maxiter):
        f, df = fun(x)
        if f == 0.0 or abs(f) <= ftol:
            return x
        if (f > 0.0) == increasing:
            hi = x
        else:
            lo = x
        if hi - lo <= xtol:
            return x
        xn = x - f / df if df != 0.0 else lo - 1.0
        # Newton has stalled at the round-off floor of the residual.
        if abs(xn - x) <= xtol:
            return x
        if not lo < xn < hi or abs(2.0 * (xn - x)) > abs(dx_old):
            dx_old = dx
            xn = 0.5 * (lo + hi)
        else:
            dx_old = dx
        dx = xn - x
        if abs(dx) <= xtol:
            return xn
        x = xn
    raise NoConvergence(f"bracketed root not found after {maxiter} iterations (bracket [{lo!r}, {hi!r}])")
