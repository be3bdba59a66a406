"""
Homogenized law of a laminated stack.

Sheets lie in the xy-plane and are stacked along z. Material 1 (insulation, volume fraction f1) is
vacuum, material 2 (steel, fraction f2 = 1 - f1) is any inner law. Bz is continuous across the layers,
in-plane flux mixes as B = f1*B1 + f2*B2. The stack energy is

    w*(B, B1) = f1/(2 mu0) (B1x^2 + B1y^2 + Bz^2) + f2 w2((Bx - f1 B1x)/f2, (By - f1 B1y)/f2, Bz)

minimized over the in-plane insulation flux B1 (``exact`` mode), or evaluated at B1 = 0
(``linearized`` mode).
"""

from __future__ import annotations

import enum
import math
from typing import Sequence

from .errors import NoConvergence
from .fieldcore import MU0, NU0, FieldStrength, SymTensor3, as_flux
from .laws import MaterialLaw

_MAX_NEWTON = 100
_MAX_HALVINGS = 60


class LaminationMode(str, enum.Enum):
    EXACT = "exact"
    LINEARIZED = "linearized"


class LaminatedLaw(MaterialLaw):
    def __init__(
        self,
        inner: MaterialLaw,
        f1: float,
        mode: LaminationMode | str = LaminationMode.EXACT,
        solver_tol: float = 1e-12,
        name: str | None = None,
    ):
        if inner.planar:
            raise ValueError("lamination needs a three-dimensional inner law")
        if not 0.0 <= f1 < 1.0:
            raise ValueError(f"insulation fraction f1 must lie in [0, 1), got {f1}")
        if not solver_tol > 0:
            raise ValueError(f"solver_tol must be positive, got {solver_tol}")
        self.inner = inner
        self.f1 = float(f1)
        self.f2 = 1.0 - self.f1
        self.mode = LaminationMode(mode)
        self.solver_tol = solver_tol
        self.name = name if name is not None else f"laminated[{self.mode.value}, f1={self.f1:g}]({inner.describe()})"

    def _steel_flux(self, b, b1x: float, b1y: float) -> tuple[float, float, float]:
        return ((b[0] - self.f1 * b1x) / self.f2, (b[1] - self.f1 * b1y) / self.f2, b[2])

    def energy_star(self, b: Sequence[float], b1x: float, b1y: float) -> float:
        b = as_flux(b)
        w2 = self.inner.energy(self._steel_flux(b, b1x, b1y))
        return self.f1 * NU0 / 2.0 * (b1x * b1x + b1y * b1y + b[2] * b[2]) + self.f2 * w2

    def _solve(self, b):
        """Minimize w* over B1; returns (b1x, b1y, w*, inner field, inner reluctivity)."""
        f1, f2 = self.f1, self.f2
        w2, h2, n2 = self.inner.evaluate((b[0] / f2, b[1] / f2, b[2]))
        x, y = MU0 * h2[0], MU0 * h2[1]
        if f1 == 0.0:
            return x, y, w2, h2, n2
        w2, h2, n2 = self.inner.evaluate(self._steel_flux(b, x, y))
        phi = f1 * NU0 / 2.0 * (x * x + y * y + b[2] * b[2]) + f2 * w2
        tol = self.solver_tol
        for _ in range(_MAX_NEWTON):
            # grad w* = f1 * g,  Hessian = f1 * A
            gx = x * NU0 - h2[0]
            gy = y * NU0 - h2[1]
            k = f1 / f2
            axx = NU0 + k * n2.xx
            axy = k * n2.xy
            ayy = NU0 + k * n2.yy
            det = axx * ayy - axy * axy
            dx = -(ayy * gx - axy * gy) / det
            dy = -(axx * gy - axy * gx) / det
            if math.hypot(gx, gy) <= tol * NU0 and math.hypot(dx, dy) <= tol:
                return x, y, phi, h2, n2
            t = 1.0
            for _ in range(_MAX_HALVINGS):
                xn, yn = x + t * dx, y + t * dy
                w2n, h2n, n2n = self.inner.evaluate(self._steel_flux(b, xn, yn))
                phin = f1 * NU0 / 2.0 * (xn * xn + yn * yn + b[2] * b[2]) + f2 * w2n
                # Accept round-off level increases once the step is tiny.
                if phin <= phi or phin - phi <= 1e-15 * abs(phi) or t * math.hypot(dx, dy) <= tol:
                    break
                t *= 0.5
            else:
                raise NoConvergence(f"line search failed for {self.describe()} at B={tuple(b)}")
            x, y, phi, h2, n2 = xn, yn, phin, h2n, n2n
        raise NoConvergence(f"insulation flux did not converge for {self.describe()} at B={tuple(b)}")

    def kink_levels(self):
        return self.inner.kink_levels()

    def kink_coordinate(self, b):
        b = as_flux(b)
        if self.f1 == 0.0:
            return self.inner.kink_coordinate(b)
        if self.mode is LaminationMode.LINEARIZED:
            return self.inner.kink_coordinate((b[0] / self.f2, b[1] / self.f2, b[2]))
        x, y, *_ = self._solve(b)
        return self.inner.kink_coordinate(self._steel_flux(b, x, y))

    def segment_breakpoints(self, p0, p1):
        if self.f1 == 0.0:
            return self.inner.segment_breakpoints(p0, p1)
        if self.mode is LaminationMode.LINEARIZED:
            # The steel flux is a linear image of B here.
            f2 = self.f2
            return self.inner.segment_breakpoints((p0[0] / f2, p0[1] / f2, p0[2]), (p1[0] / f2, p1[1] / f2, p1[2]))
        return None if self.kink_levels() else []

    def solve_insulation_flux(self, b: Sequence[float]) -> tuple[float, float]:
        x, y, *_ = self._solve(as_flux(b))
        return x, y

    def energy(self, b):
        b = as_flux(b)
        if self.f1 == 0.0:
            return self.inner.energy(b)
        if self.mode is LaminationMode.LINEARIZED:
            return self.f1 * NU0 / 2.0 * b[2] * b[2] + self.f2 * self.inner.energy((b[0] / self.f2, b[1] / self.f2, b[2]))
        return self._solve(b)[2]

    def field(self, b):
        return self.evaluate(b)[1]

    def reluctivity(self, b):
        return self.evaluate(b)[2]

    def evaluate(self, b):
        b = as_flux(b)
        f1, f2 = self.f1, self.f2
        if f1 == 0.0:
            # No insulation: the stack is the inner material.
            return self.inner.evaluate(b)
        if self.mode is LaminationMode.LINEARIZED:
            w2, h2, n = self.inner.evaluate((b[0] / f2, b[1] / f2, b[2]))
            w = f1 * NU0 / 2.0 * b[2] * b[2] + f2 * w2
            field = FieldStrength(h2[0], h2[1], f1 * NU0 * b[2] + f2 * h2[2])
            nu = SymTensor3(n.xx / f2, n.xy / f2, n.xz, n.yy / f2, n.yz, f1 * NU0 + f2 * n.zz)
            return w, field, nu
        x, y, w, h2, n = self._solve(b)
        field = FieldStrength(x * NU0, y * NU0, f1 * NU0 * b[2] + f2 * h2[2])
        return w, field, _exact_reluctivity(n, f1, f2)


def _exact_reluctivity(n: SymTensor3, f1: float, f2: float) -> SymTensor3:
    """
    Implicit derivative of the stack field.

    With N the inner reluctivity at the steel flux and A = I/mu0 + (f1/f2) N_pp (in-plane block):
    nu_pp = A^-1 N_pp / (mu0 f2), nu_pz = A^-1 N_pz / mu0,
    nu_zz = f1/mu0 + f2 N_zz - f1 N_zp A^-1 N_pz.
    """
    k = f1 / f2
    axx, axy, ayy = NU0 + k * n.xx, k * n.xy, NU0 + k * n.yy
    det = axx * ayy - axy * axy
    ixx, ixy, iyy = ayy / det, -axy / det, axx / det
    # A^-1 N_pp
    pxx = ixx * n.xx + ixy * n.xy
    pxy = ixx * n.xy + ixy * n.yy
    pyy = ixy * n.xy + iyy * n.yy
    # A^-1 N_pz
    qx = ixx * n.xz + ixy * n.yz
    qy = ixy * n.xz + iyy * n.yz
    c = NU0 / f2
    return SymTensor3(
        c * pxx,
        c * pxy,
        NU0 * qx,
        c * pyy,
        NU0 * qy,
        f1 * NU0 + f2 * n.zz - f1 * (n.xz * qx + n.yz * qy),
    )


def lam_energy_star(law: LaminatedLaw, b: Sequence[float], b1x: float, b1y: float) -> float:
    return law.energy_star(b, b1x, b1y)


def solve_insulation_flux(law: LaminatedLaw, b: Sequence[float]) -> tuple[float, float]:
    return law.solve_insulation_flux(b)


def lam_energy(law: LaminatedLaw, b: Sequence[float]) -> float:
    return law.energy(b)


def lam_field(law: LaminatedLaw, b: Sequence[float]) -> FieldStrength:
    return law.field(b)
