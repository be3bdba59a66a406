"""
Consistency checks and geometry for material laws.

The checks compare a law against itself through independent routes: finite differences of the energy
against the field, finite differences of the field for symmetry and positive definiteness, and line
integrals of the field along different paths. Points where a law raises a range error are skipped and
counted.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
import warnings
from typing import Sequence

import numpy as np
from scipy import integrate, optimize

from ._roots import solve_bracketed
from .errors import AllPointsOutOfRange, LevelUnreachable, NonMonotoneRay, RangeError
from .fieldcore import FieldStrength, FluxDensity, SymTensor3, eigvalsh2, eigvalsh3
from .laws import MaterialLaw

GRADIENT_STEP = 1e-6  # [T]
HESSIAN_STEP = 1e-5  # [T]
FIELD_FLOOR = 1.0  # [A/m], denominator floor for relative field errors

TOL_GRADIENT = 1e-5
TOL_ASYMMETRY = 1e-4
TOL_PATH = 1e-6

GENERATOR_NAME = "numpy.random.PCG64"


@dataclasses.dataclass
class ValidationReport:
    law_id: str
    points_tested: int = 0
    points_skipped: int = 0
    gradient_max_rel_err: float | None = None
    hessian_asym_max: float | None = None
    min_hessian_eigenvalue: float | None = None
    convexity_violations: list[FluxDensity] = dataclasses.field(default_factory=list)
    path_independence_max_rel_err: float | None = None
    seed: int | None = None
    generator: str = GENERATOR_NAME
    tol_gradient: float = TOL_GRADIENT
    tol_asymmetry: float = TOL_ASYMMETRY
    tol_path: float = TOL_PATH

    @property
    def passed(self) -> bool:
        checks = [not self.convexity_violations]
        if self.gradient_max_rel_err is not None:
            checks.append(self.gradient_max_rel_err <= self.tol_gradient)
        if self.hessian_asym_max is not None:
            checks.append(self.hessian_asym_max <= self.tol_asymmetry)
        if self.min_hessian_eigenvalue is not None:
            checks.append(self.min_hessian_eigenvalue > 0.0)
        if self.path_independence_max_rel_err is not None:
            checks.append(self.path_independence_max_rel_err <= self.tol_path)
        return all(checks)

    def merge(self, other: ValidationReport) -> ValidationReport:
        out = dataclasses.replace(self)
        for f in ("gradient_max_rel_err", "hessian_asym_max", "min_hessian_eigenvalue", "path_independence_max_rel_err"):
            if getattr(other, f) is not None:
                setattr(out, f, getattr(other, f))
        out.convexity_violations = self.convexity_violations + other.convexity_violations
        out.points_tested = max(self.points_tested, other.points_tested)
        out.points_skipped = max(self.points_skipped, other.points_skipped)
        return out

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["convexity_violations"] = [list(p) for p in self.convexity_violations]
        d["passed"] = self.passed
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def sample_points(rng: np.random.Generator, radius: float, n: int, planar: bool = False) -> list[FluxDensity]:
    """Uniform samples in the ball (disc for planar laws) of the given radius."""
    dim = 2 if planar else 3
    out = []
    for _ in range(n):
        v = rng.normal(size=dim)
        v *= radius * rng.random() ** (1.0 / dim) / np.linalg.norm(v)
        out.append(FluxDensity(v[0], v[1], v[2] if dim == 3 else 0.0))
    return out


def _axes(law: MaterialLaw) -> range:
    return range(2 if law.planar else 3)


def _shift(b: Sequence[float], k: int, dx: float) -> tuple[float, float, float]:
    v = list(b)
    v[k] += dx
    return (v[0], v[1], v[2])


def fd_gradient(law: MaterialLaw, b: Sequence[float], step: float = GRADIENT_STEP) -> list[float]:
    g = [0.0, 0.0, 0.0]
    for k in _axes(law):
        g[k] = (law.energy(_shift(b, k, step)) - law.energy(_shift(b, k, -step))) / (2.0 * step)
    return g


def fd_jacobian(law: MaterialLaw, b: Sequence[float], step: float = HESSIAN_STEP) -> np.ndarray:
    """Central-difference Jacobian of the field; entry [i, j] = dH_i/dB_j."""
    n = len(_axes(law))
    jac = np.zeros((n, n))
    for j in range(n):
        hp = law.field(_shift(b, j, step))
        hm = law.field(_shift(b, j, -step))
        for i in range(n):
            jac[i, j] = (hp[i] - hm[i]) / (2.0 * step)
    return jac


def min_eigenvalue(jac: np.ndarray) -> float:
    s = 0.5 * (jac + jac.T)
    if s.shape == (2, 2):
        return eigvalsh2(s[0, 0], s[0, 1], s[1, 1])[0]
    return eigvalsh3(SymTensor3(s[0, 0], s[0, 1], s[0, 2], s[1, 1], s[1, 2], s[2, 2]))[0]


def _rng(seed) -> tuple[np.random.Generator, int | None]:
    if isinstance(seed, np.random.Generator):
        return seed, None
    return np.random.default_rng(seed), seed


def check_gradient(
    law: MaterialLaw,
    domain_radius: float,
    n_points: int,
    seed: int | np.random.Generator | None = 0,
    step: float = GRADIENT_STEP,
    points: Sequence[FluxDensity] | None = None,
) -> ValidationReport:
    """Compare the field with central differences of the energy at random points."""
    rng, seed_value = _rng(seed)
    pts = points if points is not None else sample_points(rng, domain_radius, n_points, law.planar)
    worst = 0.0
    tested = skipped = 0
    for b in pts:
        try:
            h = law.field(b)
            g = fd_gradient(law, b, step)
        except RangeError:
            skipped += 1
            continue
        err = math.sqrt(sum((gi - hi) ** 2 for gi, hi in zip(g, h)))
        worst = max(worst, err / max(h.norm, FIELD_FLOOR))
        tested += 1
    if tested == 0:
        raise AllPointsOutOfRange(f"no sample point inside the domain of {law.describe()}")
    return ValidationReport(
        law_id=law.describe(), points_tested=tested, points_skipped=skipped, gradient_max_rel_err=worst, seed=seed_value
    )


def check_hessian(
    law: MaterialLaw,
    domain_radius: float,
    n_points: int,
    seed: int | np.random.Generator | None = 0,
    step: float = HESSIAN_STEP,
    points: Sequence[FluxDensity] | None = None,
) -> ValidationReport:
    """Symmetry and positive definiteness of the finite-difference reluctivity."""
    rng, seed_value = _rng(seed)
    pts = points if points is not None else sample_points(rng, domain_radius, n_points, law.planar)
    asym = 0.0
    min_eig = math.inf
    violations = []
    tested = skipped = 0
    for b in pts:
        try:
            jac = fd_jacobian(law, b, step)
        except RangeError:
            skipped += 1
            continue
        scale = float(np.max(np.abs(jac)))
        if scale > 0.0:
            asym = max(asym, float(np.max(np.abs(jac - jac.T))) / scale)
        e = min_eigenvalue(jac)
        min_eig = min(min_eig, e)
        if not e > 0.0:
            violations.append(FluxDensity(*b))
        tested += 1
    if tested == 0:
        raise AllPointsOutOfRange(f"no sample point inside the domain of {law.describe()}")
    return ValidationReport(
        law_id=law.describe(),
        points_tested=tested,
        points_skipped=skipped,
        hessian_asym_max=asym,
        min_hessian_eigenvalue=min_eig,
        convexity_violations=violations,
        seed=seed_value,
    )


_KINK_SAMPLES = 16


def segment_breakpoints(law: MaterialLaw, p0: Sequence[float], p1: Sequence[float]) -> list[float]:
    """
    Parameters t in (0, 1) where the field of ``law`` has a kink on the segment p0 -> p1.

    Laws that cannot place their kinks in closed form are sampled along the segment; the minimum of
    the kink coordinate is located first so that each remaining piece is monotone, then every level
    crossing is bracketed and refined.
    """
    known = law.segment_breakpoints(p0, p1)
    if known is not None:
        return list(known)
    levels = law.kink_levels()
    d = [q - p for p, q in zip(p0, p1)]

    def coord(t):
        return law.kink_coordinate((p0[0] + t * d[0], p0[1] + t * d[1], p0[2] + t * d[2]))

    ts = [k / _KINK_SAMPLES for k in range(_KINK_SAMPLES + 1)]
    vals = [coord(t) for t in ts]
    k = int(np.argmin(vals))
    if 0 < k < _KINK_SAMPLES:
        res = optimize.minimize_scalar(coord, bounds=(ts[k - 1], ts[k + 1]), method="bounded", options={"xatol": 1e-12})
        if res.fun < vals[k]:
            ts.insert(k + 1 if res.x > ts[k] else k, float(res.x))
            vals.insert(k + 1 if res.x > ts[k] else k, float(res.fun))
    out = []
    for (ta, va), (tb, vb) in zip(zip(ts, vals), zip(ts[1:], vals[1:])):
        lo, hi = min(va, vb), max(va, vb)
        for level in levels:
            if lo < level < hi:
                out.append(optimize.brentq(lambda t: coord(t) - level, ta, tb, xtol=1e-14))
            elif level == va and 0.0 < ta:
                out.append(ta)
    return sorted(set(out))


def _segment_integral(law: MaterialLaw, p0: Sequence[float], p1: Sequence[float], rtol: float) -> float:
    d = [q - p for p, q in zip(p0, p1)]
    if not any(d):
        return 0.0

    # Segments along an iso-surface integrate to nearly zero; bound the error by the energy scale instead.
    scale = max(law.energy(p0), law.energy(p1))

    def integrand(t):
        h = law.field((p0[0] + t * d[0], p0[1] + t * d[1], p0[2] + t * d[2]))
        return h[0] * d[0] + h[1] * d[1] + h[2] * d[2]

    with warnings.catch_warnings():
        # Round-off warnings near the tolerance floor; the comparisons judge the accuracy.
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        kinks = segment_breakpoints(law, p0, p1)
        value, _ = integrate.quad(
            integrand, 0.0, 1.0, epsabs=rtol * scale, epsrel=rtol, limit=200 + 4 * len(kinks), points=kinks or None
        )
    return value


def path_energy(law: MaterialLaw, path: Sequence[Sequence[float]], rtol: float = 1e-9) -> float:
    """Line integral of H . dB along a polyline (adaptive Gauss-Kronrod per segment)."""
    pts = [tuple(float(x) for x in p) for p in path]
    return sum(_segment_integral(law, a, b, rtol) for a, b in zip(pts, pts[1:]))


def loop_integral(law: MaterialLaw, vertices: Sequence[Sequence[float]], rtol: float = 1e-9) -> float:
    """Line integral of H . dB around the closed polygon through ``vertices``; zero for an energy law."""
    pts = list(vertices)
    return path_energy(law, pts + [pts[0]], rtol)


def staircase(b: Sequence[float]) -> list[tuple[float, float, float]]:
    """Axis-aligned path 0 -> (Bx,0,0) -> (Bx,By,0) -> B."""
    return [(0.0, 0.0, 0.0), (b[0], 0.0, 0.0), (b[0], b[1], 0.0), (b[0], b[1], b[2])]


def check_path_independence(
    law: MaterialLaw,
    domain_radius: float,
    n_points: int,
    seed: int | np.random.Generator | None = 0,
    points: Sequence[FluxDensity] | None = None,
) -> ValidationReport:
    """Staircase versus straight-ray integrals from the origin."""
    rng, seed_value = _rng(seed)
    pts = points if points is not None else sample_points(rng, domain_radius, n_points, law.planar)
    worst = 0.0
    tested = skipped = 0
    for b in pts:
        try:
            ray = path_energy(law, [(0.0, 0.0, 0.0), b])
            stairs = path_energy(law, staircase(b))
        except RangeError:
            skipped += 1
            continue
        worst = max(worst, abs(ray - stairs) / max(abs(ray), 1e-300))
        tested += 1
    if tested == 0:
        raise AllPointsOutOfRange(f"no sample point inside the domain of {law.describe()}")
    return ValidationReport(
        law_id=law.describe(),
        points_tested=tested,
        points_skipped=skipped,
        path_independence_max_rel_err=worst,
        seed=seed_value,
    )


def validate_law(
    law: MaterialLaw,
    domain_radius: float,
    n_points: int,
    seed: int = 0,
    n_paths: int | None = None,
    tol_gradient: float = TOL_GRADIENT,
    tol_asymmetry: float = TOL_ASYMMETRY,
    tol_path: float = TOL_PATH,
) -> ValidationReport:
    """Full report: gradient, Hessian and path checks on one seeded point set."""
    rng = np.random.default_rng(seed)
    pts = sample_points(rng, domain_radius, n_points, law.planar)
    report = check_gradient(law, domain_radius, n_points, points=pts)
    report = report.merge(check_hessian(law, domain_radius, n_points, points=pts))
    n_paths = n_points if n_paths is None else n_paths
    if n_paths > 0:
        report = report.merge(check_path_independence(law, domain_radius, n_paths, points=pts[:n_paths]))
    report.seed = seed
    report.tol_gradient = tol_gradient
    report.tol_asymmetry = tol_asymmetry
    report.tol_path = tol_path
    return report


class Plane(str, enum.Enum):
    XY = "xy"
    XZ = "xz"
    YZ = "yz"

    def embed(self, u: float, v: float, fixed: float) -> tuple[float, float, float]:
        if self is Plane.XY:
            return (u, v, fixed)
        if self is Plane.XZ:
            return (u, fixed, v)
        return (fixed, u, v)


@dataclasses.dataclass(frozen=True)
class IsoContour:
    plane: Plane
    fixed_component: float
    level: float
    points: tuple[tuple[float, float], ...]

    def cross_products(self) -> list[float]:
        p = self.points
        n = len(p)
        out = []
        for k in range(n):
            a, b, c = p[k - 1], p[k], p[(k + 1) % n]
            out.append((b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]))
        return out

    def is_convex(self) -> bool:
        cp = self.cross_products()
        return all(c > 0 for c in cp) or all(c < 0 for c in cp)

    def contains(self, q: Sequence[float]) -> bool:
        """Strict interior test for a convex, counter-clockwise polygon."""
        p = self.points
        n = len(p)
        for k in range(n):
            a, b = p[k], p[(k + 1) % n]
            if (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]) <= 0.0:
                return False
        return True


def extract_contour(
    law: MaterialLaw,
    plane: Plane | str,
    fixed_component: float,
    level: float,
    n_angles: int = 720,
    rtol: float = 1e-12,
) -> IsoContour:
    """
    Iso-energy line in a plane by radial root finding.

    Along every ray from the in-plane origin the energy increases strictly for a convex law with its
    minimum at the origin, so each ray meets the level exactly once.
    """
    plane = Plane(plane)
    if law.planar and plane is not Plane.XY:
        raise ValueError(f"planar law {law.describe()} only supports the xy plane")
    if not level > 0:
        raise ValueError(f"level must be positive, got {level}")
    center = law.energy(plane.embed(0.0, 0.0, fixed_component))
    if center >= level:
        raise LevelUnreachable(f"level {level!r} is below the energy {center!r} at the plane origin")
    pts = []
    r_guess = None
    for k in range(n_angles):
        theta = 2.0 * math.pi * k / n_angles
        r = _ray_radius(law, plane, fixed_component, level, theta, r_guess, rtol)
        r_guess = r
        pts.append((r * math.cos(theta), r * math.sin(theta)))
    return IsoContour(plane, float(fixed_component), float(level), tuple(pts))


def _ray_radius(law, plane: Plane, fixed: float, level: float, theta: float, r_guess: float | None, rtol: float) -> float:
    """Distance from the plane origin at which the energy reaches ``level`` along direction ``theta``."""
    c, s = math.cos(theta), math.sin(theta)
    direction = plane.embed(c, s, 0.0)

    def residual(r):
        w, h, _ = law.evaluate(plane.embed(r * c, r * s, fixed))
        return w - level, h[0] * direction[0] + h[1] * direction[1] + h[2] * direction[2]

    r_hi = r_guess or 1.0
    prev = -math.inf
    while True:
        try:
            f = residual(r_hi)[0]
        except RangeError as ex:
            raise LevelUnreachable(f"ray at {math.degrees(theta):.3f} deg leaves the valid range below level {level!r}: {ex}") from ex
        if f >= 0.0:
            break
        if f < prev:
            raise NonMonotoneRay(f"energy decreases along the ray at {math.degrees(theta):.3f} deg", direction)
        prev = f
        r_hi *= 2.0
        if r_hi > 1e6:
            raise LevelUnreachable(f"level {level!r} not reached along ray at {math.degrees(theta):.3f} deg")
    return solve_bracketed(residual, 0.0, r_hi, increasing=True, x0=min(r_guess or r_hi, r_hi), xtol=rtol * r_hi)


def contour_normal_error(law: MaterialLaw, contour: IsoContour, delta: float = 1e-6) -> float:
    """
    Largest |H.t| / (|H| |t|) over the contour points.

    The tangent t is the chord between the contour crossings at angles theta +- delta, found by the
    same radial solve as the contour itself, so it does not depend on the field.
    """
    plane, fixed, level = contour.plane, contour.fixed_component, contour.level
    worst = 0.0
    for u, v in contour.points:
        theta = math.atan2(v, u)
        r = math.hypot(u, v)
        ends = []
        for t in (theta - delta, theta + delta):
            rt = _ray_radius(law, plane, fixed, level, t, r, 1e-15)
            ends.append((rt * math.cos(t), rt * math.sin(t)))
        tu, tv = ends[1][0] - ends[0][0], ends[1][1] - ends[0][1]
        h = law.field(plane.embed(u, v, fixed))
        hu, hv = _in_plane(plane, h)
        hn = math.sqrt(h[0] * h[0] + h[1] * h[1] + h[2] * h[2])
        if hn == 0.0:
            continue
        worst = max(worst, abs(hu * tu + hv * tv) / (hn * math.hypot(tu, tv)))
    return worst


def _in_plane(plane: Plane, v: Sequence[float]) -> tuple[float, float]:
    if plane is Plane.XY:
        return v[0], v[1]
    if plane is Plane.XZ:
        return v[0], v[2]
    return v[1], v[2]


def format_contours(contours: Sequence[IsoContour]) -> str:
    """Two columns per point, one blank line between contours; ``#`` lines describe each block."""
    blocks = []
    for c in contours:
        lines = [f"# plane={c.plane.value} fixed={c.fixed_component:.17g} level={c.level:.17g} points={len(c.points)}"]
        lines += [f"{u:.17g} {v:.17g}" for u, v in c.points]
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


class SecantReluctivityLaw(MaterialLaw):
    """
    H = N.B with a constant, possibly non-symmetric matrix N.

    This is the secant-reluctivity form that cannot come from an energy when N is not symmetric; it
    exists to make the validators fail on purpose. ``energy`` and ``reluctivity`` use the symmetric
    part of N.
    """

    def __init__(self, matrix, name: str = "secant_reluctivity"):
        self.matrix = np.asarray(matrix, dtype=float)
        if self.matrix.shape != (3, 3):
            raise ValueError("secant reluctivity needs a 3x3 matrix")
        self.name = name

    def energy(self, b):
        v = np.asarray(FluxDensity(*b))
        return 0.5 * float(v @ self.matrix @ v)

    def field(self, b):
        return FieldStrength(*(self.matrix @ np.asarray(FluxDensity(*b))))

    def reluctivity(self, b):
        s = 0.5 * (self.matrix + self.matrix.T)
        return SymTensor3.from_matrix(s)


class ScaledFieldLaw(MaterialLaw):
    """Wraps a law and scales its field only; a gradient-check fault injection."""

    def __init__(self, inner: MaterialLaw, factor: float):
        self.inner = inner
        self.factor = factor
        self.planar = inner.planar
        self.name = f"scaled_field({inner.describe()}, {factor:g})"

    def energy(self, b):
        return self.inner.energy(b)

    def field(self, b):
        return FieldStrength(*(self.factor * x for x in self.inner.field(b)))

    def reluctivity(self, b):
        return self.inner.reluctivity(b).scaled(self.factor)
