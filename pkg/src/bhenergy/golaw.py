"""
Grain-oriented steel law from axis measurements.

Iso-energy lines are ellipses (ellipsoids with a third curve) whose semi-axes are the flux densities
at which each axis curve stores the same energy w:

    sum_i (B_i / a_i(w))^2 = 1,    a_i(w) = b_of_w(curve_i, w)

For a given B the energy is the unique root in w of that residual, which decreases strictly with w.
The field is the implicit gradient

    H_i = (B_i / a_i^2) / sum_j B_j^2 / (a_j^3 h_j),    h_j = h_of_b(curve_j, a_j)

Axes are x = rolling, y = transverse, z = normal to the sheet.
"""

from __future__ import annotations

import math
from typing import Sequence

from ._roots import solve_bracketed
from .bhcurve import BHCurve
from .errors import ExceedsRange, OutOfPlane, OutOfRange, ZeroFlux
from .fieldcore import FieldStrength, SymTensor3, as_flux
from .laws import MaterialLaw

_RESIDUAL_TOL = 1e-12
_MAX_ITER = 200


class GrainOrientedLaw(MaterialLaw):
    """
    Elliptic iso-energy interpolation of two (planar) or three axis curves.

    For the out-of-plane direction pass the rolling or the transverse curve explicitly as
    ``curve_normal``; there is no implicit default.
    """

    def __init__(
        self,
        curve_rolling: BHCurve,
        curve_transverse: BHCurve,
        curve_normal: BHCurve | None = None,
        name: str = "grain_oriented",
    ):
        self.curve_rolling = curve_rolling
        self.curve_transverse = curve_transverse
        self.curve_normal = curve_normal
        self.name = name
        self.planar = curve_normal is None
        self.curves = (curve_rolling, curve_transverse) + (() if curve_normal is None else (curve_normal,))
        self.w_max = min(c.w_max for c in self.curves)
        if not self.w_max > 0:
            raise ValueError("axis curves must store positive energy")

    def _components(self, b) -> tuple[float, ...]:
        b = as_flux(b)
        if self.planar:
            if b[2] != 0.0:
                raise OutOfPlane(f"planar law {self.name} is only defined for Bz = 0, got Bz={b[2]!r}")
            return b[0], b[1]
        return tuple(b)

    def _axes_at(self, w: float) -> tuple[list[float], list[float]]:
        axes, fields = [], []
        for c in self.curves:
            a, h = c.b_and_h_of_w(w)
            axes.append(a)
            fields.append(h)
        return axes, fields

    def _log_residual(self, comps, u: float) -> tuple[float, float]:
        """log(sum (B_i/a_i)^2) at w = exp(u) and its u-derivative; linear in u for linear curves."""
        w = math.exp(u)
        total = 0.0
        dtotal = 0.0
        for c, bi in zip(self.curves, comps):
            if bi != 0.0:
                a, h = c.b_and_h_of_w(w)
                q = bi / a
                total += q * q
                # d/dw (b/a)^2 = -2 b^2 / a^3 * da/dw,  da/dw = 1/h
                dtotal -= 2.0 * q * q / (a * h)
        return math.log(total), w * dtotal / total

    def _solve(self, comps) -> tuple[float, list[float], list[float]]:
        # Each semi-axis must reach |B_i|, and all semi-axes >= |B| satisfy the ellipse; this brackets w.
        mag = math.sqrt(sum(x * x for x in comps))
        lo = 0.0
        for c, bi in zip(self.curves, comps):
            if bi != 0.0:
                try:
                    lo = max(lo, c.w_of_b(abs(bi)))
                except OutOfRange as ex:
                    raise ExceedsRange(f"flux density exceeds the representable range of {self.name}: {ex}") from ex
        hi = max(c.w_of_b(mag) if mag <= c.b_max else math.inf for c in self.curves)
        hi = max(lo, min(hi, self.w_max))
        if math.isinf(hi):
            raise ExceedsRange(f"cannot bracket the energy of {self.name} at |B|={mag!r}")
        u_lo, u_hi = math.log(lo), math.log(hi)
        f_hi = self._log_residual(comps, u_hi)[0]
        if f_hi > _RESIDUAL_TOL:
            raise ExceedsRange(
                f"|B|={mag!r} T lies outside every representable iso-surface of {self.name} "
                f"(w_max={self.w_max!r} J/m^3)"
            )
        f_lo = self._log_residual(comps, u_lo)[0]
        if abs(f_lo) <= _RESIDUAL_TOL:
            w = lo
        elif abs(f_hi) <= _RESIDUAL_TOL:
            w = hi
        else:
            # Secant start from the bracket ends; exact for linear curves.
            u0 = u_lo + f_lo * (u_hi - u_lo) / (f_lo - f_hi)
            u = solve_bracketed(
                lambda x: self._log_residual(comps, x),
                u_lo,
                u_hi,
                increasing=False,
                x0=u0,
                ftol=_RESIDUAL_TOL,
                xtol=4e-16 * max(abs(u_hi), 1.0),
                maxiter=_MAX_ITER,
            )
            # One Newton polish below the termination tolerance.
            f, df = self._log_residual(comps, u)
            if df != 0.0 and f != 0.0 and u_lo <= u - f / df <= u_hi:
                u -= f / df
            w = math.exp(u)
        axes, fields = self._axes_at(w)
        return w, axes, fields

    def solve_axes(self, b: Sequence[float]) -> tuple[float, tuple[float, ...]]:
        comps = self._components(b)
        if not any(comps):
            raise ZeroFlux("solve_axes requires a non-zero flux density")
        w, axes, _ = self._solve(comps)
        return w, tuple(axes)

    def energy(self, b):
        comps = self._components(b)
        if not any(comps):
            return 0.0
        return self._solve(comps)[0]

    def field(self, b):
        comps = self._components(b)
        if not any(comps):
            return FieldStrength(0.0, 0.0, 0.0)
        _, axes, fields = self._solve(comps)
        return FieldStrength(*_pad3(_field_from_axes(comps, axes, fields)))

    def reluctivity(self, b):
        return self.evaluate(b)[2]

    def kink_levels(self):
        # A semi-axis crosses a curve knot exactly when w equals that knot's energy.
        return sorted({w for c in self.curves for w in c.energy_table[1:]})

    def kink_coordinate(self, b):
        return self.energy(b)

    def evaluate(self, b):
        comps = self._components(b)
        if not any(comps):
            slopes = [c.dh_db(0.0) for c in self.curves]
            return 0.0, FieldStrength(0.0, 0.0, 0.0), SymTensor3.diag(*_pad3(slopes))
        w, axes, fields = self._solve(comps)
        hvec = _field_from_axes(comps, axes, fields)
        slopes = [c.dh_db(a) for c, a in zip(self.curves, axes)]
        return w, FieldStrength(*_pad3(hvec)), _hessian(comps, axes, fields, slopes, hvec)


def _pad3(v: Sequence[float]) -> tuple[float, float, float]:
    return (v[0], v[1], v[2] if len(v) > 2 else 0.0)


def _field_from_axes(comps, axes, fields) -> list[float]:
    denom = 0.0
    for bi, a, h in zip(comps, axes, fields):
        denom += bi * bi / (a * a * a * h)
    return [bi / (a * a) / denom for bi, a in zip(comps, axes)]


def _hessian(comps, axes, fields, slopes, hvec) -> SymTensor3:
    """
    Differential reluctivity of the implicit ellipse energy.

    With D = sum B_j^2/(a_j^3 h_j), u_i = B_i/(a_i^3 h_i) and
    S = -sum B_j^2 (3/(a_j^4 h_j^2) + h'_j/(a_j^3 h_j^3)):

        nu_ik = delta_ik/(a_i^2 D) - 2 (u_i H_k + H_i u_k)/D - S H_i H_k / D
    """
    n = len(comps)
    denom = 0.0
    s = 0.0
    u = []
    for bi, a, h, dh in zip(comps, axes, fields, slopes):
        a3h = a * a * a * h
        denom += bi * bi / a3h
        u.append(bi / a3h)
        s -= bi * bi * (3.0 / (a3h * a * h) + dh / (a3h * h * h))
    m = [[0.0] * 3 for _ in range(3)]
    for i in range(n):
        for k in range(i, n):
            v = -(2.0 * (u[i] * hvec[k] + hvec[i] * u[k]) + s * hvec[i] * hvec[k]) / denom
            if i == k:
                v += 1.0 / (axes[i] * axes[i] * denom)
            m[i][k] = v
    return SymTensor3(m[0][0], m[0][1], m[0][2], m[1][1], m[1][2], m[2][2])


def solve_axes(law: GrainOrientedLaw, b: Sequence[float]) -> tuple[float, tuple[float, ...]]:
    return law.solve_axes(b)


def go_energy(law: GrainOrientedLaw, b: Sequence[float]) -> float:
    return law.energy(b)


def go_field(law: GrainOrientedLaw, b: Sequence[float]) -> FieldStrength:
    return law.field(b)
