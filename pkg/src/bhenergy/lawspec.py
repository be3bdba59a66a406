"""
Law composition documents.

A document is a JSON tree tagged by ``type``::

    {"type": "vacuum"}
    {"type": "linear", "nu": [[...], [...], [...]]}
    {"type": "isotropic", "curve": "steel.csv", "extrapolation": {"mode": "rolling_linear", "b_sat": 2.0}}
    {"type": "grain_oriented", "rolling": "rd.csv", "transverse": "td.csv", "normal": "rd.csv",
     "extrapolation": {"rolling": {...}, "transverse": {...}}}
    {"type": "laminated", "f1": 0.03, "mode": "exact", "inner": {...}}
    {"type": "secant_reluctivity", "nu": [[...], [...], [...]]}

A curve is either a CSV path, resolved relative to the document, or ``{"rows": [[H, B], ...]}``.
Unknown keys are rejected.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import jsonschema

from .analysis import SecantReluctivityLaw
from .bhcurve import BHCurve, ExtrapolationSpec, extrapolate, load_curve, read_curve_csv
from .errors import LawSpecError
from .fieldcore import SymTensor3, is_positive_definite
from .golaw import GrainOrientedLaw
from .lamination import LaminatedLaw
from .laws import IsotropicLaw, LinearAnisotropicLaw, MaterialLaw, VacuumLaw

_NUMBER = {"type": "number"}
_MATRIX = {
    "type": "array",
    "minItems": 3,
    "maxItems": 3,
    "items": {"type": "array", "minItems": 3, "maxItems": 3, "items": _NUMBER},
}
_CURVE = {
    "oneOf": [
        {"type": "string", "minLength": 1},
        {
            "type": "object",
            "properties": {
                "rows": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": _NUMBER}},
                "name": {"type": "string"},
            },
            "required": ["rows"],
            "additionalProperties": False,
        },
    ]
}
_EXTRAPOLATION = {
    "type": "object",
    "properties": {
        "mode": {"enum": ["rolling_linear", "transverse_approach"]},
        "b_sat": _NUMBER,
        "tau": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["mode", "b_sat"],
    "additionalProperties": False,
}


def _law(type_name: str, properties: dict, required: tuple[str, ...] = ()) -> dict:
    props = {"type": {"const": type_name}, "name": {"type": "string"}, **properties}
    return {
        "type": "object",
        "properties": props,
        "required": ["type", *required],
        "additionalProperties": False,
    }


SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$defs": {
        "law": {
            "type": "object",
            "required": ["type"],
            "properties": {
                "type": {"enum": ["vacuum", "linear", "isotropic", "grain_oriented", "laminated", "secant_reluctivity"]}
            },
            "allOf": [
                {"if": {"properties": {"type": {"const": "vacuum"}}}, "then": _law("vacuum", {})},
                {"if": {"properties": {"type": {"const": "linear"}}}, "then": _law("linear", {"nu": _MATRIX}, ("nu",))},
                {
                    "if": {"properties": {"type": {"const": "isotropic"}}},
                    "then": _law("isotropic", {"curve": _CURVE, "extrapolation": _EXTRAPOLATION}, ("curve",)),
                },
                {
                    "if": {"properties": {"type": {"const": "grain_oriented"}}},
                    "then": _law(
                        "grain_oriented",
                        {
                            "rolling": _CURVE,
                            "transverse": _CURVE,
                            "normal": _CURVE,
                            "extrapolation": {
                                "type": "object",
                                "properties": {k: _EXTRAPOLATION for k in ("rolling", "transverse", "normal")},
                                "additionalProperties": False,
                            },
                        },
                        ("rolling", "transverse"),
                    ),
                },
                {
                    "if": {"properties": {"type": {"const": "laminated"}}},
                    "then": _law(
                        "laminated",
                        {
                            "f1": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                            "mode": {"enum": ["exact", "linearized"]},
                            "solver_tol": {"type": "number", "exclusiveMinimum": 0},
                            "inner": {"$ref": "#/$defs/law"},
                        },
                        ("f1", "inner"),
                    ),
                },
                {
                    "if": {"properties": {"type": {"const": "secant_reluctivity"}}},
                    "then": _law("secant_reluctivity", {"nu": _MATRIX}, ("nu",)),
                },
            ],
        }
    },
    "$ref": "#/$defs/law",
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


def validate_document(doc: Any) -> None:
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        # The deepest error is the most specific one.
        err = max(errors, key=lambda e: len(e.absolute_path))
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise LawSpecError(f"invalid law document at {where}: {err.message}")


def _curve(ref, ext_doc: dict | None, base: Path) -> BHCurve:
    if isinstance(ref, str):
        path = base / ref
        if not path.is_file():
            raise LawSpecError(f"curve file not found: {path}")
        curve = read_curve_csv(path)
    else:
        curve = load_curve(ref["rows"], name=ref.get("name", "inline"))
    if ext_doc is not None:
        kwargs = {"b_sat": ext_doc["b_sat"], "mode": ext_doc["mode"]}
        if "tau" in ext_doc:
            kwargs["tau"] = ext_doc["tau"]
        curve = extrapolate(curve, ExtrapolationSpec(**kwargs))
    return curve


def _build(doc: dict, base: Path) -> MaterialLaw:
    kind = doc["type"]
    name = doc.get("name")
    if kind == "vacuum":
        return VacuumLaw()
    if kind == "linear":
        try:
            nu = SymTensor3.from_matrix(doc["nu"], rtol=1e-12)
        except ValueError as ex:
            raise LawSpecError(f"linear law: {ex}") from ex
        if not is_positive_definite(nu):
            raise LawSpecError("linear law: reluctivity is not positive definite")
        return LinearAnisotropicLaw(nu, name=name or "linear")
    if kind == "isotropic":
        return IsotropicLaw(_curve(doc["curve"], doc.get("extrapolation"), base), name=name)
    if kind == "grain_oriented":
        ext = doc.get("extrapolation", {})
        curves = [
            _curve(doc[k], ext.get(k), base) if k in doc else None for k in ("rolling", "transverse", "normal")
        ]
        if "normal" in ext and curves[2] is None:
            raise LawSpecError("grain_oriented law: extrapolation given for a missing normal curve")
        return GrainOrientedLaw(*curves, name=name or "grain_oriented")
    if kind == "laminated":
        inner = _build(doc["inner"], base)
        try:
            return LaminatedLaw(
                inner, doc["f1"], doc.get("mode", "exact"), solver_tol=doc.get("solver_tol", 1e-12), name=name
            )
        except ValueError as ex:
            raise LawSpecError(f"laminated law: {ex}") from ex
    return SecantReluctivityLaw(doc["nu"], name=name or "secant_reluctivity")


def build_law(doc: Any, base_dir: str | Path = ".") -> MaterialLaw:
    """Validate ``doc`` and build the law; CSV paths are resolved against ``base_dir``."""
    validate_document(doc)
    return _build(doc, Path(base_dir))


def load_law_spec(path: str | Path) -> MaterialLaw:
    """Read a law document; the law is named after the file unless the document names it."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as ex:
        raise LawSpecError(f"law document not found: {path}") from ex
    except (json.JSONDecodeError, UnicodeDecodeError) as ex:
        raise LawSpecError(f"{path}: not valid JSON: {ex}") from ex
    law = build_law(doc, path.parent)
    if isinstance(doc, dict) and "name" not in doc:
        law.name = path.stem
    return law
