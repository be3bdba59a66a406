"""
Synthetic curves and laws used by the test suite, the CLI examples and the acceptance run.

Measured steel data is not available, so the curves are sampled from a smooth anhysteretic shape

    B(H) = mu0*H + Js * (2/pi) * atan(H / a)

with parameters chosen to resemble mild steel and grain-oriented steel in rolling and transverse
direction. Running ``python -m bhenergy.fixtures DIR`` writes the CSV and law documents to DIR.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

from .bhcurve import BHCurve, ExtrapolationMode, ExtrapolationSpec, extrapolate, format_curve_csv, load_curve
from .fieldcore import MU0, SymTensor3
from .golaw import GrainOrientedLaw
from .lamination import LaminatedLaw
from .laws import IsotropicLaw, LinearAnisotropicLaw, MaterialLaw, VacuumLaw

LINEAR_NU = 1000.0  # [m/H]
FILL_FACTOR = 0.97  # steel fraction f2 of the laminated fixtures
INSULATION_FRACTION = 1.0 - FILL_FACTOR

_MILD_STEEL_H = [25, 50, 100, 150, 200, 300, 400, 500, 700, 1000, 1500, 2000, 3000, 5000, 7500, 10000, 15000, 20000, 30000, 40000]
_ROLLING_H = [2, 5, 10, 15, 20, 30, 40, 50, 75, 100, 150, 200, 300, 500, 1000, 2000, 5000, 10000, 20000, 40000]
_TRANSVERSE_H = [50, 100, 200, 300, 500, 750, 1000, 1500, 2000, 3000, 5000, 7500, 10000, 15000, 20000, 30000, 40000]


def atan_rows(js: float, a: float, h_values) -> list[tuple[float, float]]:
    return [(float(h), MU0 * h + js * 2.0 / math.pi * math.atan(h / a)) for h in h_values]


def linear_rows(nu: float = LINEAR_NU, b_max: float = 3.0, n: int = 12) -> list[tuple[float, float]]:
    return [(nu * b_max * k / n, b_max * k / n) for k in range(1, n + 1)]


def linear_curve(nu: float = LINEAR_NU) -> BHCurve:
    return load_curve(linear_rows(nu), name="linear_nu1000.csv")


def mild_steel_rows():
    return atan_rows(1.6, 400.0, _MILD_STEEL_H)


def rolling_rows():
    return atan_rows(2.0, 50.0, _ROLLING_H)


def transverse_rows():
    return atan_rows(1.8, 1500.0, _TRANSVERSE_H)


def matching_tau(curve: BHCurve, b_sat: float) -> float:
    """Approach rate that joins the transverse extension to ``curve`` with a continuous slope."""
    delta = b_sat + MU0 * curve.h_end - curve.b_end
    end_slope = 1.0 / curve.dh_db(curve.b_end)
    if not end_slope > MU0:
        raise ValueError("curve already ends with vacuum permeability")
    return delta / (end_slope - MU0)


def mild_steel_curve(extended: bool = True) -> BHCurve:
    c = load_curve(mild_steel_rows(), name="mild_steel.csv")
    if extended:
        c = extrapolate(c, ExtrapolationSpec(b_sat=c.b_end, mode=ExtrapolationMode.ROLLING_LINEAR))
    return c


def rolling_curve(extended: bool = True) -> BHCurve:
    c = load_curve(rolling_rows(), name="go_rolling.csv")
    if extended:
        c = extrapolate(c, ExtrapolationSpec(b_sat=c.b_end, mode=ExtrapolationMode.ROLLING_LINEAR))
    return c


def common_b_sat() -> float:
    """Intercept of the rolling curve's saturation line B = b_sat + mu0*H."""
    r = rolling_curve(extended=False)
    return r.b_end - MU0 * r.h_end


def transverse_spec() -> ExtrapolationSpec:
    t = load_curve(transverse_rows())
    b_sat = common_b_sat()
    return ExtrapolationSpec(b_sat=b_sat, mode=ExtrapolationMode.TRANSVERSE_APPROACH, tau=matching_tau(t, b_sat))


def transverse_curve(extended: bool = True) -> BHCurve:
    c = load_curve(transverse_rows(), name="go_transverse.csv")
    if extended:
        c = extrapolate(c, transverse_spec())
    return c


def linear_nu() -> SymTensor3:
    return SymTensor3.from_matrix([[1200.0, 150.0, 0.0], [150.0, 3000.0, -200.0], [0.0, -200.0, 800.0]])


def shipped_laws() -> dict[str, MaterialLaw]:
    """The nine fixture laws, keyed by fixture name."""
    iso_steel = IsotropicLaw(mild_steel_curve(), name="isotropic_saturating")
    go3 = GrainOrientedLaw(rolling_curve(), transverse_curve(), rolling_curve(), name="go_three_curve")
    return {
        "vacuum": VacuumLaw(),
        "linear_anisotropic": LinearAnisotropicLaw(linear_nu(), name="linear_anisotropic"),
        "isotropic_linear": IsotropicLaw(linear_curve(), name="isotropic_linear"),
        "isotropic_saturating": iso_steel,
        "go_two_curve": GrainOrientedLaw(rolling_curve(), transverse_curve(), name="go_two_curve"),
        "go_three_curve": go3,
        "laminated_exact": LaminatedLaw(iso_steel, INSULATION_FRACTION, "exact", name="laminated_exact"),
        "laminated_linearized": LaminatedLaw(iso_steel, INSULATION_FRACTION, "linearized", name="laminated_linearized"),
        "laminated_go": LaminatedLaw(go3, INSULATION_FRACTION, "exact", name="laminated_go"),
    }


def _ext_doc(spec: ExtrapolationSpec) -> dict:
    doc = {"mode": spec.mode.value, "b_sat": spec.b_sat}
    if spec.mode is ExtrapolationMode.TRANSVERSE_APPROACH:
        doc["tau"] = spec.tau
    return doc


def law_documents() -> dict[str, dict]:
    """Law composition documents matching :func:`shipped_laws`, referencing the CSV files."""
    steel = mild_steel_curve()
    rolling = rolling_curve()
    steel_doc = {"type": "isotropic", "curve": "mild_steel.csv", "extrapolation": _ext_doc(steel.extrapolation)}
    go3 = {
        "type": "grain_oriented",
        "rolling": "go_rolling.csv",
        "transverse": "go_transverse.csv",
        "normal": "go_rolling.csv",
        "extrapolation": {
            "rolling": _ext_doc(rolling.extrapolation),
            "transverse": _ext_doc(transverse_spec()),
            "normal": _ext_doc(rolling.extrapolation),
        },
    }
    go2 = {k: v for k, v in go3.items() if k != "normal"}
    go2["extrapolation"] = {k: v for k, v in go3["extrapolation"].items() if k != "normal"}
    nu = linear_nu().to_matrix().tolist()
    return {
        "vacuum": {"type": "vacuum"},
        "linear_anisotropic": {"type": "linear", "nu": nu},
        "isotropic_linear": {"type": "isotropic", "curve": "linear_nu1000.csv"},
        "isotropic_saturating": steel_doc,
        "go_two_curve": go2,
        "go_three_curve": go3,
        "laminated_exact": {"type": "laminated", "f1": INSULATION_FRACTION, "mode": "exact", "inner": steel_doc},
        "laminated_linearized": {"type": "laminated", "f1": INSULATION_FRACTION, "mode": "linearized", "inner": steel_doc},
        "laminated_go": {"type": "laminated", "f1": INSULATION_FRACTION, "mode": "exact", "inner": go3},
        "secant_asymmetric": {
            "type": "secant_reluctivity",
            "nu": [[1000.0, 300.0, 0.0], [0.0, 1000.0, 0.0], [0.0, 0.0, 1000.0]],
        },
    }


def write_fixture_files(directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    csvs = {
        "linear_nu1000.csv": linear_rows(),
        "mild_steel.csv": mild_steel_rows(),
        "go_rolling.csv": rolling_rows(),
        "go_transverse.csv": transverse_rows(),
    }
    for fname, rows in csvs.items():
        (directory / fname).write_text(format_curve_csv(rows), encoding="utf-8")
    for name, doc in law_documents().items():
        (directory / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return directory


if __name__ == "__main__":
    out = write_fixture_files(sys.argv[1] if len(sys.argv) > 1 else "fixtures")
    print(f"fixtures written to {out}")
