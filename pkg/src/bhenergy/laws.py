"""
Material laws defined by a convex magnetic energy density w(B).

Every law exposes ``energy`` (J/m^3), ``field`` (the gradient of the energy, A/m) and ``reluctivity``
(the Hessian, m/H). ``evaluate`` returns all three and lets laws with an internal solve share the work.
"""

from __future__ import annotations

import abc
import math
from typing import Sequence

from .bhcurve import BHCurve
from .fieldcore import MU0, NU0, FieldStrength, FluxDensity, SymTensor3, as_flux, is_positive_definite, quadratic_form


class MaterialLaw(abc.ABC):
    #: Planar laws are only defined for Bz == 0; their z row/column of the reluctivity is zero.
    planar: bool = False
    name: str = ""

    @abc.abstractmethod
    def energy(self, b: Sequence[float]) -> float:
        raise NotImplementedError

    @abc.abstractmethod
    def field(self, b: Sequence[float]) -> FieldStrength:
        raise NotImplementedError

    @abc.abstractmethod
    def reluctivity(self, b: Sequence[float]) -> SymTensor3:
        raise NotImplementedError

    def evaluate(self, b: Sequence[float]) -> tuple[float, FieldStrength, SymTensor3]:
        return self.energy(b), self.field(b), self.reluctivity(b)

    def describe(self) -> str:
        return self.name or type(self).__name__

    # Interpolated curves make the field only piecewise smooth. A law whose field has kinks reports
    # them through a scalar coordinate that crosses ``kink_levels`` there; quadrature splits on them.
    def kink_levels(self) -> Sequence[float]:
        return ()

    def kink_coordinate(self, b: Sequence[float]) -> float:
        raise NotImplementedError

    def segment_breakpoints(self, p0: Sequence[float], p1: Sequence[float]) -> list[float] | None:
        """Kink parameters t in (0, 1) on the segment p0 + t (p1 - p0), or None if not known in closed form."""
        return None if self.kink_levels() else []


class VacuumLaw(MaterialLaw):
    name = "vacuum"

    def energy(self, b):
        bx, by, bz = as_flux(b)
        return (bx * bx + by * by + bz * bz) / (2.0 * MU0)

    def field(self, b):
        bx, by, bz = as_flux(b)
        return FieldStrength(bx / MU0, by / MU0, bz / MU0)

    def reluctivity(self, b):
        as_flux(b)
        return SymTensor3.identity(NU0)


class LinearAnisotropicLaw(MaterialLaw):
    """Constant reluctivity ``nu``; w = B.nu.B / 2 so that H = nu.B."""

    def __init__(self, nu: SymTensor3, name: str = "linear"):
        if not is_positive_definite(nu):
            raise ValueError(f"reluctivity {nu} is not positive definite")
        self.nu = nu
        self.name = name

    def energy(self, b):
        return 0.5 * quadratic_form(self.nu, as_flux(b))

    def field(self, b):
        return FieldStrength(*self.nu.matvec(as_flux(b)))

    def reluctivity(self, b):
        as_flux(b)
        return self.nu


class IsotropicLaw(MaterialLaw):
    """w(B) = w_iso(|B|) from a single scalar curve."""

    def __init__(self, curve: BHCurve, name: str | None = None):
        self.curve = curve
        self.name = name if name is not None else f"isotropic({curve.label})"

    def energy(self, b):
        return self.curve.w_of_b(as_flux(b).norm)

    def field(self, b):
        b = as_flux(b)
        mag = b.norm
        if mag == 0.0:
            return FieldStrength(0.0, 0.0, 0.0)
        scale = self.curve.h_of_b(mag) / mag
        return FieldStrength(scale * b[0], scale * b[1], scale * b[2])

    def reluctivity(self, b):
        b = as_flux(b)
        mag = b.norm
        if mag == 0.0:
            return SymTensor3.identity(self.curve.dh_db(0.0))
        # w'' along B, w'/|B| across it
        along = self.curve.dh_db(mag)
        across = self.curve.h_of_b(mag) / mag
        return _radial_tensor(b, mag, along, across)

    def kink_levels(self):
        return self.curve.knots_b[1:]

    def kink_coordinate(self, b):
        return as_flux(b).norm

    def segment_breakpoints(self, p0, p1):
        # |p0 + t d|^2 = k^2 is a quadratic in t; the closest approach to the origin is kinked as well.
        d = [q - p for p, q in zip(p0, p1)]
        a = d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
        if a == 0.0:
            return []
        hb = p0[0] * d[0] + p0[1] * d[1] + p0[2] * d[2]
        c0 = p0[0] * p0[0] + p0[1] * p0[1] + p0[2] * p0[2]
        ts = {-hb / a}
        for k in self.kink_levels():
            disc = hb * hb - a * (c0 - k * k)
            if disc > 0.0:
                r = math.sqrt(disc)
                ts.update(((-hb - r) / a, (-hb + r) / a))
        return sorted(t for t in ts if 0.0 < t < 1.0)

    def evaluate(self, b):
        b = as_flux(b)
        mag = b.norm
        if mag == 0.0:
            return 0.0, FieldStrength(0.0, 0.0, 0.0), SymTensor3.identity(self.curve.dh_db(0.0))
        w, h = self.curve.w_and_h(mag)
        scale = h / mag
        field = FieldStrength(scale * b[0], scale * b[1], scale * b[2])
        return w, field, _radial_tensor(b, mag, self.curve.dh_db(mag), scale)


def _radial_tensor(b: FluxDensity, mag: float, along: float, across: float) -> SymTensor3:
    ux, uy, uz = b[0] / mag, b[1] / mag, b[2] / mag
    k = along - across
    return SymTensor3(
        across + k * ux * ux,
        k * ux * uy,
        k * ux * uz,
        across + k * uy * uy,
        k * uy * uz,
        across + k * uz * uz,
    )


def vacuum_energy(b: Sequence[float]) -> float:
    return VacuumLaw().energy(b)


def vacuum_field(b: Sequence[float]) -> FieldStrength:
    return VacuumLaw().field(b)


def linear_energy(law: LinearAnisotropicLaw, b: Sequence[float]) -> float:
    return law.energy(b)


def isotropic_energy(law: IsotropicLaw, b: Sequence[float]) -> float:
    return law.energy(b)


def isotropic_field(law: IsotropicLaw, b: Sequence[float]) -> FieldStrength:
    return law.field(b)
