"""
Field vectors, symmetric 3x3 tensors and physical constants.

All values are immutable and use 64-bit floats. Units are documented, not enforced: flux density in
tesla, field strength in ampere/meter, reluctivity in meter/henry.
"""

from __future__ import annotations

import dataclasses
import math
from typing import NamedTuple, Sequence

import numpy as np

MU0 = 4e-7 * math.pi  # Vacuum permeability [V*s/(A*m)]
NU0 = 1.0 / MU0  # Vacuum reluctivity [m/H]


@dataclasses.dataclass(frozen=True)
class Constants:
    mu0: float = MU0


CONSTANTS = Constants()


def _finite3(name: str, x: float, y: float, z: float) -> tuple[float, float, float]:
    x, y, z = float(x), float(y), float(z)
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
        raise ValueError(f"{name} components must be finite, got ({x}, {y}, {z})")
    return x, y, z


class _Vec3(NamedTuple):
    x: float
    y: float
    z: float


class FluxDensity(_Vec3):
    """Magnetic flux density [T]."""

    __slots__ = ()

    def __new__(cls, bx: float = 0.0, by: float = 0.0, bz: float = 0.0):
        return super().__new__(cls, *_finite3("FluxDensity", bx, by, bz))

    @property
    def bx(self) -> float:
        return self[0]

    @property
    def by(self) -> float:
        return self[1]

    @property
    def bz(self) -> float:
        return self[2]

    @property
    def norm(self) -> float:
        return math.sqrt(self[0] * self[0] + self[1] * self[1] + self[2] * self[2])


class FieldStrength(_Vec3):
    """Magnetic field strength [A/m]."""

    __slots__ = ()

    def __new__(cls, hx: float = 0.0, hy: float = 0.0, hz: float = 0.0):
        return super().__new__(cls, *_finite3("FieldStrength", hx, hy, hz))

    @property
    def hx(self) -> float:
        return self[0]

    @property
    def hy(self) -> float:
        return self[1]

    @property
    def hz(self) -> float:
        return self[2]

    @property
    def norm(self) -> float:
        return math.sqrt(self[0] * self[0] + self[1] * self[1] + self[2] * self[2])


def as_flux(b: Sequence[float]) -> FluxDensity:
    if isinstance(b, FluxDensity):
        return b
    if len(b) != 3:
        raise ValueError(f"flux density needs 3 components, got {len(b)}")
    return FluxDensity(*b)


@dataclasses.dataclass(frozen=True)
class SymTensor3:
    """
    Symmetric 3x3 matrix stored as its upper triangle.

    The entry order ``(xx, xy, xz, yy, yz, zz)`` is also the order of :meth:`entries`, which round-trips
    through :meth:`from_entries` exactly.
    """

    xx: float
    xy: float
    xz: float
    yy: float
    yz: float
    zz: float

    @classmethod
    def from_entries(cls, entries: Sequence[float]) -> SymTensor3:
        if len(entries) != 6:
            raise ValueError(f"expected 6 entries, got {len(entries)}")
        return cls(*(float(e) for e in entries))

    @classmethod
    def from_matrix(cls, m, rtol: float = 1e-12) -> SymTensor3:
        """Build from a full 3x3 matrix, rejecting (not symmetrizing) asymmetric input."""
        a = np.asarray(m, dtype=float)
        if a.shape != (3, 3):
            raise ValueError(f"expected a 3x3 matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        scale = float(np.max(np.abs(a)))
        asym = float(np.max(np.abs(a - a.T)))
        if asym > rtol * scale:
            raise ValueError(f"matrix is not symmetric (max |m_ij - m_ji| = {asym:.3g}, scale {scale:.3g})")
        return cls(a[0, 0], a[0, 1], a[0, 2], a[1, 1], a[1, 2], a[2, 2])

    @classmethod
    def identity(cls, scale: float = 1.0) -> SymTensor3:
        return cls(scale, 0.0, 0.0, scale, 0.0, scale)

    @classmethod
    def diag(cls, a: float, b: float, c: float) -> SymTensor3:
        return cls(a, 0.0, 0.0, b, 0.0, c)

    def entries(self) -> tuple[float, float, float, float, float, float]:
        return (self.xx, self.xy, self.xz, self.yy, self.yz, self.zz)

    def to_matrix(self) -> np.ndarray:
        return np.array(
            [
                [self.xx, self.xy, self.xz],
                [self.xy, self.yy, self.yz],
                [self.xz, self.yz, self.zz],
            ]
        )

    def matvec(self, v: Sequence[float]) -> tuple[float, float, float]:
        x, y, z = v
        return (
            self.xx * x + self.xy * y + self.xz * z,
            self.xy * x + self.yy * y + self.yz * z,
            self.xz * x + self.yz * y + self.zz * z,
        )

    def scaled(self, factor: float) -> SymTensor3:
        return SymTensor3(*(factor * e for e in self.entries()))

    def eigenvalues(self) -> tuple[float, float, float]:
        return eigvalsh3(self)


def quadratic_form(m: SymTensor3, v: Sequence[float]) -> float:
    x, y, z = v
    return (
        m.xx * x * x
        + m.yy * y * y
        + m.zz * z * z
        + 2.0 * (m.xy * x * y + m.xz * x * z + m.yz * y * z)
    )


def is_positive_definite(m: SymTensor3) -> bool:
    """Sylvester's criterion: all leading principal minors strictly positive."""
    d1 = m.xx
    d2 = m.xx * m.yy - m.xy * m.xy
    d3 = (
        m.xx * (m.yy * m.zz - m.yz * m.yz)
        - m.xy * (m.xy * m.zz - m.yz * m.xz)
        + m.xz * (m.xy * m.yz - m.yy * m.xz)
    )
    return d1 > 0.0 and d2 > 0.0 and d3 > 0.0


def eigvalsh3(m: SymTensor3) -> tuple[float, float, float]:
    """
    Eigenvalues of a symmetric 3x3 matrix in ascending order.

    The trigonometric closed form is accurate for the eigenvalue farthest from the other two but
    loses half the digits inside a near-degenerate pair. That pair is therefore recomputed from the
    2x2 projection onto the orthogonal complement of the isolated eigenvector.
    """
    scale = max(abs(x) for x in m.entries())
    if scale == 0.0:
        return (0.0, 0.0, 0.0)
    xx, xy, xz, yy, yz, zz = (x / scale for x in m.entries())
    p1 = xy * xy + xz * xz + yz * yz
    if p1 == 0.0:
        a, b, c = sorted((xx, yy, zz))
        return (a * scale, b * scale, c * scale)
    q = (xx + yy + zz) / 3.0
    axx, ayy, azz = xx - q, yy - q, zz - q
    p = math.sqrt((axx * axx + ayy * ayy + azz * azz + 2.0 * p1) / 6.0)
    # det((A - qI) / p) / 2
    det = axx * (ayy * azz - yz * yz) - xy * (xy * azz - yz * xz) + xz * (xy * yz - ayy * xz)
    r = min(1.0, max(-1.0, det / (2.0 * p * p * p)))
    phi = math.acos(r) / 3.0
    e_max = q + 2.0 * p * math.cos(phi)
    e_min = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    lam = e_max if r >= 0.0 else e_min
    rows = ((xx - lam, xy, xz), (xy, yy - lam, yz), (xz, yz, zz - lam))
    best, v = 0.0, None
    for a, b in ((0, 1), (0, 2), (1, 2)):
        c = _cross(rows[a], rows[b])
        n2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2]
        if n2 > best:
            best, v = n2, c
    if v is None:
        e_mid = 3.0 * q - e_max - e_min
        return (e_min * scale, e_mid * scale, e_max * scale)
    n = math.sqrt(best)
    v = (v[0] / n, v[1] / n, v[2] / n)
    if abs(v[0]) > abs(v[1]):
        n = math.hypot(v[0], v[2])
        u = (-v[2] / n, 0.0, v[0] / n)
    else:
        n = math.hypot(v[1], v[2])
        u = (0.0, v[2] / n, -v[1] / n)
    w = _cross(v, u)
    mat = SymTensor3(xx, xy, xz, yy, yz, zz)
    au, aw = mat.matvec(u), mat.matvec(w)
    b11 = u[0] * au[0] + u[1] * au[1] + u[2] * au[2]
    b12 = u[0] * aw[0] + u[1] * aw[1] + u[2] * aw[2]
    b22 = w[0] * aw[0] + w[1] * aw[1] + w[2] * aw[2]
    lo, hi = eigvalsh2(b11, b12, b22)
    a, b, c = sorted((lam, lo, hi))
    return (a * scale, b * scale, c * scale)


def _cross(a, b) -> tuple[float, float, float]:
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def eigvalsh2(a: float, b: float, d: float) -> tuple[float, float]:
    """Eigenvalues of [[a, b], [b, d]] in ascending order."""
    mean = 0.5 * (a + d)
    rad = math.hypot(0.5 * (a - d), b)
    # The root of smaller magnitude suffers cancellation; recover it from the determinant.
    big = mean + rad if mean >= 0.0 else mean - rad
    small = (a * d - b * b) / big if big != 0.0 else 0.0
    return (small, big) if small <= big else (big, small)
