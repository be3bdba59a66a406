"""
Scalar BH measurement curves.

A :class:`BHCurve` interpolates H as a function of B with a monotone piecewise cubic, so the magnetic
energy ``w(b) = int_0^b H dB`` is convex. Energies are integrated exactly from the cubic coefficients,
and ``b_of_w`` inverts them with a safeguarded Newton iteration. Beyond the last sample a curve can carry
one of two saturation extensions (see :func:`extrapolate`).
"""

from __future__ import annotations

import bisect
import csv
import dataclasses
import enum
import io
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._roots import solve_bracketed
from .errors import (
    BSatTooSmall,
    CurveFormatError,
    NegativeB,
    NonConvexExtension,
    NonMonotone,
    OutOfRange,
    TooFewSamples,
)
from .fieldcore import MU0

CSV_HEADER = ("H_A_per_m", "B_T")
DEFAULT_TAU = 5000.0  # Transverse approach rate [A/m]; a fixture choice, not a material constant.

_DUPLICATE_RTOL = 1e-12


@dataclasses.dataclass(frozen=True)
class BHSample:
    h: float
    b: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.h) and math.isfinite(self.b)):
            raise ValueError(f"sample must be finite, got h={self.h}, b={self.b}")
        if self.h < 0 or self.b < 0:
            raise ValueError(f"sample must be non-negative, got h={self.h}, b={self.b}")


class ExtrapolationMode(str, enum.Enum):
    ROLLING_LINEAR = "rolling_linear"
    TRANSVERSE_APPROACH = "transverse_approach"


@dataclasses.dataclass(frozen=True)
class ExtrapolationSpec:
    """
    How to continue a curve beyond its last sample.

    ``rolling_linear`` continues with dB/dH = mu0 from the last sample; ``b_sat`` is only checked
    against the last sample there. ``transverse_approach`` follows ``B = b_sat + mu0*H - dB*exp(-(H - H_end)/tau)``,
    which meets the last sample and approaches the saturation line ``b_sat + mu0*H``.
    """

    b_sat: float
    mode: ExtrapolationMode = ExtrapolationMode.ROLLING_LINEAR
    tau: float = DEFAULT_TAU

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", ExtrapolationMode(self.mode))
        if not math.isfinite(self.b_sat):
            raise ValueError(f"b_sat must be finite, got {self.b_sat}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"tau must be positive, got {self.tau}")


class _RollingExtension:
    """H(B) = H_end + (B - B_end)/mu0."""

    def __init__(self, h_end: float, b_end: float, w_end: float):
        self.h_end, self.b_end, self.w_end = h_end, b_end, w_end

    def h(self, b: float) -> float:
        return self.h_end + (b - self.b_end) / MU0

    def dh(self, b: float) -> float:
        return 1.0 / MU0

    def w(self, b: float) -> float:
        s = b - self.b_end
        return self.w_end + self.h_end * s + 0.5 * s * s / MU0

    def b_of_w(self, w: float) -> float:
        dw = w - self.w_end
        # Positive root of s^2/(2 mu0) + h_end*s - dw = 0, written without cancellation.
        return self.b_end + 2.0 * dw / (self.h_end + math.sqrt(self.h_end * self.h_end + 2.0 * dw / MU0))

    def b_of_h(self, h: float) -> float:
        return self.b_end + MU0 * (h - self.h_end)

    def b_and_h_of_w(self, w: float) -> tuple[float, float]:
        b = self.b_of_w(w)
        return b, self.h(b)


class _TransverseExtension:
    """B(H) = b_sat + mu0*H - delta*exp(-(H - H_end)/tau) for H >= H_end."""

    def __init__(self, h_end: float, b_end: float, w_end: float, b_sat: float, tau: float):
        self.h_end, self.b_end, self.w_end = h_end, b_end, w_end
        self.b_sat, self.tau = b_sat, tau
        self.delta = b_sat + MU0 * h_end - b_end

    def b_of_h(self, h: float) -> float:
        return self.b_sat + MU0 * h - self.delta * math.exp(-(h - self.h_end) / self.tau)

    def db_dh(self, h: float) -> float:
        return MU0 + self.delta / self.tau * math.exp(-(h - self.h_end) / self.tau)

    def h(self, b: float) -> float:
        if b == self.b_end:
            return self.h_end
        # b_sat + mu0*H - delta <= B(H) <= b_sat + mu0*H
        lo = max(self.h_end, (b - self.b_sat) / MU0)
        hi = max(lo, (b - self.b_sat + self.delta) / MU0)
        return solve_bracketed(
            lambda x: (self.b_of_h(x) - b, self.db_dh(x)),
            lo,
            hi,
            increasing=True,
            x0=lo,
            xtol=4e-16 * hi,
        )

    def dh(self, b: float) -> float:
        return 1.0 / self.db_dh(self.h(b))

    def _w_at_h(self, h: float) -> float:
        # Integration by parts: int H dB = [H B] - int B dH.
        s = h - self.h_end
        int_b_dh = (
            self.b_sat * s
            + 0.5 * MU0 * s * (h + self.h_end)
            - self.delta * self.tau * -math.expm1(-s / self.tau)
        )
        return self.w_end + h * self.b_of_h(h) - self.h_end * self.b_end - int_b_dh

    def w(self, b: float) -> float:
        return self._w_at_h(self.h(b))

    def h_of_w(self, w: float) -> float:
        # w(H) is closed-form with dw/dH = H * dB/dH; w is convex in B with slope >= h_end.
        b_hi = self.b_end + (w - self.w_end) / self.h_end
        h_hi = self.h(b_hi) if b_hi > self.b_end else self.h_end
        return solve_bracketed(
            lambda x: (self._w_at_h(x) - w, x * self.db_dh(x)),
            self.h_end,
            h_hi,
            increasing=True,
            x0=self.h_end,
            xtol=4e-16 * h_hi,
        )

    def b_of_w(self, w: float) -> float:
        return self.b_of_h(self.h_of_w(w))

    def b_and_h_of_w(self, w: float) -> tuple[float, float]:
        h = self.h_of_w(w)
        return self.b_of_h(h), h


def _pchip_slopes(x: Sequence[float], y: Sequence[float]) -> list[float]:
    """Shape-preserving knot slopes (Fritsch-Carlson limiting, harmonic-mean interior)."""
    n = len(x)
    dx = [x[i + 1] - x[i] for i in range(n - 1)]
    m = [(y[i + 1] - y[i]) / dx[i] for i in range(n - 1)]
    if n == 2:
        return [m[0], m[0]]
    d = [0.0] * n
    for k in range(1, n - 1):
        if m[k - 1] * m[k] <= 0.0:
            d[k] = 0.0
        else:
            w1 = 2.0 * dx[k] + dx[k - 1]
            w2 = dx[k] + 2.0 * dx[k - 1]
            d[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k])

    def end_slope(h0, h1, m0, m1):
        s = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1)
        if s * m0 <= 0.0:
            return 0.0
        if m0 * m1 <= 0.0 and abs(s) > abs(3.0 * m0):
            return 3.0 * m0
        return s

    d[0] = end_slope(dx[0], dx[1], m[0], m[1])
    d[-1] = end_slope(dx[-1], dx[-2], m[-1], m[-2])
    return d


class BHCurve:
    """
    Monotone B->H interpolant of a measured curve, anchored at the origin.

    Build instances with :func:`load_curve`; :func:`extrapolate` returns an extended copy.
    """

    __slots__ = ("samples", "name", "extrapolation", "_b", "_h", "_c", "_w", "_ext")

    def __init__(
        self,
        samples: Sequence[BHSample],
        *,
        name: str = "",
        extrapolation: ExtrapolationSpec | None = None,
    ):
        self.samples = tuple(samples)
        self.name = name
        b = [s.b for s in self.samples]
        h = [s.h for s in self.samples]
        d = _pchip_slopes(b, h)
        coeffs = []
        energy = [0.0]
        for i in range(len(b) - 1):
            dx = b[i + 1] - b[i]
            m = (h[i + 1] - h[i]) / dx
            c2 = (3.0 * m - 2.0 * d[i] - d[i + 1]) / dx
            c3 = (d[i] + d[i + 1] - 2.0 * m) / (dx * dx)
            coeffs.append((h[i], d[i], c2, c3))
            energy.append(energy[-1] + dx * (h[i] + dx * (d[i] / 2.0 + dx * (c2 / 3.0 + dx * c3 / 4.0))))
        self._b = b
        self._h = h
        self._c = coeffs
        self._w = energy
        self.extrapolation = extrapolation
        self._ext = None
        if extrapolation is not None:
            if extrapolation.mode is ExtrapolationMode.ROLLING_LINEAR:
                self._ext = _RollingExtension(h[-1], b[-1], energy[-1])
            else:
                self._ext = _TransverseExtension(h[-1], b[-1], energy[-1], extrapolation.b_sat, extrapolation.tau)

    def __repr__(self) -> str:
        ext = f", extrapolation={self.extrapolation.mode.value}" if self.extrapolation else ""
        return f"BHCurve({self.label!r}, {len(self.samples)} samples{ext})"

    @property
    def label(self) -> str:
        return self.name or "<unnamed curve>"

    @property
    def knots_b(self) -> tuple[float, ...]:
        return tuple(self._b)

    @property
    def knots_h(self) -> tuple[float, ...]:
        return tuple(self._h)

    @property
    def energy_table(self) -> tuple[float, ...]:
        return tuple(self._w)

    @property
    def b_end(self) -> float:
        return self._b[-1]

    @property
    def h_end(self) -> float:
        return self._h[-1]

    @property
    def b_max(self) -> float:
        return math.inf if self._ext is not None else self._b[-1]

    @property
    def w_max(self) -> float:
        return math.inf if self._ext is not None else self._w[-1]

    def _locate(self, b: float) -> int:
        """Interval index for ``b``; ``-1`` past the last knot."""
        if b < 0.0:
            raise NegativeB(f"negative flux density {b!r} for curve {self.label}")
        i = bisect.bisect_right(self._b, b) - 1
        if i >= len(self._b) - 1:
            if b == self._b[-1]:
                return len(self._b) - 2
            if self._ext is None:
                raise OutOfRange(
                    f"B={b!r} T exceeds the measured range of curve {self.label} "
                    f"(max {self._b[-1]!r} T) and no extrapolation is attached"
                )
            return -1
        return i

    def h_of_b(self, b: float) -> float:
        i = self._locate(b)
        if i < 0:
            return self._ext.h(b)
        s = b - self._b[i]
        if s == 0.0:
            return self._h[i]
        if b == self._b[i + 1]:
            return self._h[i + 1]
        c0, c1, c2, c3 = self._c[i]
        return c0 + s * (c1 + s * (c2 + s * c3))

    def dh_db(self, b: float) -> float:
        """Differential reluctivity dH/dB of the scalar curve."""
        i = self._locate(b)
        if i < 0:
            return self._ext.dh(b)
        s = b - self._b[i]
        _, c1, c2, c3 = self._c[i]
        return c1 + s * (2.0 * c2 + 3.0 * s * c3)

    def w_of_b(self, b: float) -> float:
        i = self._locate(b)
        if i < 0:
            return self._ext.w(b)
        s = b - self._b[i]
        if s == 0.0:
            return self._w[i]
        if b == self._b[i + 1]:
            return self._w[i + 1]
        c0, c1, c2, c3 = self._c[i]
        return self._w[i] + s * (c0 + s * (c1 / 2.0 + s * (c2 / 3.0 + s * c3 / 4.0)))

    def w_and_h(self, b: float) -> tuple[float, float]:
        i = self._locate(b)
        if i < 0:
            return self._ext.w(b), self._ext.h(b)
        s = b - self._b[i]
        c0, c1, c2, c3 = self._c[i]
        return (
            self._w[i] + s * (c0 + s * (c1 / 2.0 + s * (c2 / 3.0 + s * c3 / 4.0))),
            c0 + s * (c1 + s * (c2 + s * c3)),
        )

    def b_of_w(self, w: float) -> float:
        return self.b_and_h_of_w(w)[0]

    def b_and_h_of_w(self, w: float) -> tuple[float, float]:
        """Inverse energy b and the field h at b."""
        if not w >= 0.0:
            raise OutOfRange(f"energy density {w!r} must be non-negative (curve {self.label})")
        if w == 0.0:
            return 0.0, 0.0
        j = bisect.bisect_left(self._w, w)
        if j >= len(self._w):
            if self._ext is None:
                raise OutOfRange(
                    f"energy density {w!r} J/m^3 exceeds the range of curve {self.label} "
                    f"(max {self._w[-1]!r} J/m^3) and no extrapolation is attached"
                )
            return self._ext.b_and_h_of_w(w)
        if self._w[j] == w:
            return self._b[j], self._h[j]
        lo, hi = self._b[j - 1], self._b[j]
        c0, c1, c2, c3 = self._c[j - 1]
        w_lo = self._w[j - 1]

        def residual(b):
            s = b - lo
            return (
                w_lo + s * (c0 + s * (c1 / 2.0 + s * (c2 / 3.0 + s * c3 / 4.0))) - w,
                c0 + s * (c1 + s * (c2 + s * c3)),
            )

        # Start from the quadratic model w ~ w_lo + c0*s + c1*s^2/2.
        dw = w - w_lo
        disc = c0 * c0 + 2.0 * c1 * dw
        x0 = lo + (2.0 * dw / (c0 + math.sqrt(disc)) if disc > 0.0 and c0 + math.sqrt(disc) > 0.0 else 0.5 * (hi - lo))
        b = solve_bracketed(residual, lo, hi, increasing=True, x0=x0, xtol=4e-16 * hi)
        s = b - lo
        return b, c0 + s * (c1 + s * (c2 + s * c3))

    def w_of_b_array(self, b) -> np.ndarray:
        """Vectorized :meth:`w_of_b` for brute-force oracles; ``b`` must be non-negative."""
        b = np.asarray(b, dtype=float)
        if np.any(b < 0):
            raise NegativeB(f"negative flux density for curve {self.label}")
        knots = np.asarray(self._b)
        out = np.empty_like(b)
        inside = b <= knots[-1]
        bi = b[inside]
        idx = np.clip(np.searchsorted(knots, bi, side="right") - 1, 0, len(knots) - 2)
        c = np.asarray(self._c)[idx]
        s = bi - knots[idx]
        out[inside] = np.asarray(self._w)[idx] + s * (
            c[:, 0] + s * (c[:, 1] / 2.0 + s * (c[:, 2] / 3.0 + s * c[:, 3] / 4.0))
        )
        if not np.all(inside):
            if self._ext is None:
                raise OutOfRange(f"flux density exceeds the range of curve {self.label}")
            out[~inside] = [self._ext.w(float(x)) for x in b[~inside]]
        return out

    def b_of_h(self, h: float) -> float:
        """Inverse interpolation H -> B (used for sampling and export)."""
        if h < 0.0:
            raise OutOfRange(f"negative field strength {h!r} for curve {self.label}")
        if h > self._h[-1]:
            if self._ext is None:
                raise OutOfRange(f"H={h!r} A/m exceeds the range of curve {self.label}")
            return self._ext.b_of_h(h)
        j = bisect.bisect_left(self._h, h)
        if self._h[j] == h:
            return self._b[j]
        lo, hi = self._b[j - 1], self._b[j]
        return solve_bracketed(
            lambda b: (self.h_of_b(b) - h, self.dh_db(b)), lo, hi, increasing=True, xtol=4e-16 * hi
        )


def load_curve(rows: Iterable[Sequence[float]], name: str = "") -> BHCurve:
    """
    Normalize measured ``(h, b)`` rows into a curve.

    Rows are sorted by h, repeated set-points (h equal within 1e-12 relative) are merged by averaging
    b, and the origin is prepended when missing.
    """
    pts = [(float(h), float(b)) for h, b in rows]
    if len(pts) < 2:
        raise TooFewSamples(f"a BH curve needs at least 2 samples, got {len(pts)}")
    for h, b in pts:
        if not (math.isfinite(h) and math.isfinite(b)):
            raise NonMonotone(f"non-finite sample (h={h}, b={b})", (h, b))
        if h < 0 or b < 0:
            raise NonMonotone(f"negative sample (h={h}, b={b}); curves start at the origin", (h, b))
    pts.sort(key=lambda p: p[0])

    merged: list[list[float]] = []
    for h, b in pts:
        if merged and abs(h - merged[-1][0]) <= _DUPLICATE_RTOL * max(abs(h), abs(merged[-1][0])):
            merged[-1][2] += 1
            merged[-1][1] += (b - merged[-1][1]) / merged[-1][2]
        else:
            merged.append([h, b, 1])
    if merged[0][0] != 0.0:
        merged.insert(0, [0.0, 0.0, 1])
    elif merged[0][1] != 0.0:
        raise NonMonotone(f"curve has B={merged[0][1]} at H=0 (remanence)", (0.0, merged[0][1]))
    if len(merged) < 2:
        raise TooFewSamples("a BH curve needs at least one sample besides the origin")

    for prev, cur in zip(merged, merged[1:]):
        if not cur[1] > prev[1]:
            raise NonMonotone(
                f"B does not increase with H at (H={cur[0]!r}, B={cur[1]!r}) "
                f"after (H={prev[0]!r}, B={prev[1]!r})",
                (cur[0], cur[1]),
            )
    return BHCurve([BHSample(h, b) for h, b, _ in merged], name=name)


def extrapolate(curve: BHCurve, spec: ExtrapolationSpec) -> BHCurve:
    """Attach a saturation extension; the result is checked to keep H(B) non-decreasing."""
    if spec.b_sat < curve.b_end:
        raise BSatTooSmall(
            f"b_sat={spec.b_sat!r} T is below the last sample B={curve.b_end!r} T of curve {curve.label}"
        )
    if curve.h_end <= 0.0:
        raise NonConvexExtension(f"curve {curve.label} ends at H=0; cannot extend")
    out = BHCurve(curve.samples, name=curve.name, extrapolation=spec)
    ext = out._ext
    if spec.mode is ExtrapolationMode.TRANSVERSE_APPROACH:
        if not ext.db_dh(curve.h_end) > 0.0 or ext.delta < 0.0:
            raise NonConvexExtension(f"transverse extension of {curve.label} is not monotone (tau={spec.tau})")
    # A coarse scan past the junction guards against round-off driven inversions.
    bs = curve.b_end + np.linspace(0.0, 1.0 + spec.b_sat - curve.b_end, 64)
    hs = [ext.h(float(b)) for b in bs]
    if any(h2 < h1 for h1, h2 in zip(hs, hs[1:])) or hs[0] < curve.h_end:
        raise NonConvexExtension(f"extension of {curve.label} produces decreasing H(B) (tau={spec.tau})")
    return out


def h_of_b(curve: BHCurve, b: float) -> float:
    return curve.h_of_b(b)


def w_of_b(curve: BHCurve, b: float) -> float:
    return curve.w_of_b(b)


def b_of_w(curve: BHCurve, w: float) -> float:
    return curve.b_of_w(w)


def parse_curve_csv(text: str, name: str = "") -> BHCurve:
    """Parse the ``H_A_per_m,B_T`` CSV format; ``#`` lines are comments."""
    rows = []
    line_of: dict[tuple[float, float], int] = {}
    header_seen = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = next(csv.reader([stripped]))
        if not header_seen:
            if tuple(f.strip() for f in fields[:2]) != CSV_HEADER:
                raise CurveFormatError(f"expected header {','.join(CSV_HEADER)!r}, got {stripped!r}", lineno)
            header_seen = True
            continue
        if len(fields) < 2:
            raise CurveFormatError(f"expected 2 columns, got {len(fields)}", lineno)
        try:
            h, b = float(fields[0]), float(fields[1])
        except ValueError:
            raise CurveFormatError(f"non-numeric value in {stripped!r}", lineno) from None
        if not (math.isfinite(h) and math.isfinite(b)):
            raise CurveFormatError(f"non-finite value in {stripped!r}", lineno)
        if h < 0 or b < 0:
            raise CurveFormatError(f"negative value in {stripped!r}", lineno)
        rows.append((h, b))
        line_of.setdefault((h, b), lineno)
    if not header_seen:
        raise CurveFormatError("missing header line", 1)
    try:
        return load_curve(rows, name=name)
    except NonMonotone as ex:
        line = line_of.get(ex.row) if ex.row is not None else None
        raise CurveFormatError(str(ex), line) from ex
    except TooFewSamples as ex:
        raise CurveFormatError(str(ex)) from ex


def read_curve_csv(path: str | Path) -> BHCurve:
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as f:
        return parse_curve_csv(f.read(), name=path.name)


def format_curve_csv(rows: Iterable[Sequence[float]], extra_columns: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_HEADER + tuple(extra_columns)) + "\n")
    for row in rows:
        buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return buf.getvalue()


def sample_extension(curve: BHCurve, h_max: float, n: int) -> list[tuple[float, float]]:
    """Samples of the extended part of ``curve`` on ``n`` equispaced H values in ``(H_end, h_max]``."""
    if curve.extrapolation is None:
        raise ValueError(f"curve {curve.label} has no extrapolation attached")
    if not h_max > curve.h_end:
        raise ValueError(f"h_max={h_max} must exceed the last sample H={curve.h_end}")
    hs = np.linspace(curve.h_end, h_max, n + 1)[1:]
    return [(float(h), curve._ext.b_of_h(float(h))) for h in hs]
