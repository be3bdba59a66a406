"""
``bhlaw`` command line.

Exit codes: 0 success, 1 validation failure (``check``), 2 invalid input (arguments, law
documents, curve CSV files), 3 evaluation outside the valid range, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from . import analysis
from .bhcurve import ExtrapolationMode, ExtrapolationSpec, extrapolate, format_curve_csv, read_curve_csv, sample_extension
from .errors import AllPointsOutOfRange, CurveError, LawSpecError, LevelUnreachable, NoConvergence, NonMonotoneRay, RangeError
from .lawspec import load_law_spec

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_RANGE = 3
EXIT_NUMERIC = 4

_NU_KEYS = ("xx", "xy", "xz", "yy", "yz", "zz")
_GLOBAL_DEFAULTS = {"format": "json", "seed": 0, "tol_grad": analysis.TOL_GRADIENT, "tol_asym": analysis.TOL_ASYMMETRY}
_MODES = {"rolling": ExtrapolationMode.ROLLING_LINEAR, "transverse": ExtrapolationMode.TRANSVERSE_APPROACH}


class _InputError(Exception):
    """Bad command-line value detected after argparse."""


def _floats(text: str, what: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise _InputError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise _InputError(f"{what}: values must be finite, got {text!r}")
    return vals


def _g6(x: float) -> str:
    return f"{x:.6g}"


def _emit_json(obj) -> None:
    # repr-based float output is the shortest string that round-trips exactly
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def cmd_eval(args) -> int:
    law = load_law_spec(args.spec)
    b = _floats(args.b, "--b")
    if len(b) != 3:
        raise _InputError(f"--b: expected 3 components, got {len(b)}")
    w, h, nu = law.evaluate(b)
    if args.format == "json":
        _emit_json(
            {
                "law": law.describe(),
                "B_T": list(b),
                "w_J_per_m3": w,
                "H_A_per_m": list(h),
                "nu_m_per_H": dict(zip(_NU_KEYS, nu.entries())),
            }
        )
    else:
        rows = [("law", law.describe()), ("B [T]", " ".join(_g6(x) for x in b)), ("w [J/m^3]", _g6(w))]
        rows.append(("H [A/m]", " ".join(_g6(x) for x in h)))
        rows += [(f"nu_{k} [m/H]", _g6(v)) for k, v in zip(_NU_KEYS, nu.entries())]
        width = max(len(k) for k, _ in rows)
        sys.stdout.write("".join(f"{k.ljust(width)}  {v}\n" for k, v in rows))
    return EXIT_OK


def cmd_contour(args) -> int:
    law = load_law_spec(args.spec)
    levels = _floats(args.levels, "--levels")
    if any(lv <= 0 for lv in levels) or any(b <= a for a, b in zip(levels, levels[1:])):
        raise _InputError(f"--levels must be positive and strictly ascending, got {args.levels!r}")
    if args.n_angles < 3:
        raise _InputError("--n-angles must be at least 3")
    contours = []
    for lv in levels:
        try:
            contours.append(analysis.extract_contour(law, args.plane, args.fixed, lv, n_angles=args.n_angles))
        except (LevelUnreachable, NonMonotoneRay) as ex:
            print(f"bhlaw: level {lv!r} skipped: {ex}", file=sys.stderr)
    if not contours:
        print("bhlaw: no contour level could be extracted", file=sys.stderr)
        return EXIT_RANGE
    text = analysis.format_contours(contours)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_check(args) -> int:
    law = load_law_spec(args.spec)
    if args.n_points < 1:
        raise _InputError("--n-points must be at least 1")
    if not args.radius > 0:
        raise _InputError("--radius must be positive")
    report = analysis.validate_law(
        law,
        args.radius,
        args.n_points,
        seed=args.seed,
        n_paths=args.n_paths,
        tol_gradient=args.tol_grad,
        tol_asymmetry=args.tol_asym,
    )
    if args.format == "json":
        sys.stdout.write(report.to_json() + "\n")
    else:
        d = report.to_dict()
        width = max(len(k) for k in d)
        for k, v in d.items():
            v = _g6(v) if isinstance(v, float) else v
            sys.stdout.write(f"{k.ljust(width)}  {v}\n")
    return EXIT_OK if report.passed else EXIT_FAILED


def _write_curve(args, rows, extra=()) -> None:
    if args.format == "json":
        cols = ["H_A_per_m", "B_T", *extra]
        _emit_json({"columns": cols, "rows": [list(r) for r in rows]})
    else:
        sys.stdout.write(format_curve_csv(rows, extra))


def cmd_curve(args) -> int:
    curve = read_curve_csv(args.csv)
    rows = [(s.h, s.b) for s in curve.samples]
    if args.action == "show":
        _write_curve(args, rows)
    elif args.action == "integrate":
        _write_curve(args, [(h, b, w) for (h, b), w in zip(rows, curve.energy_table)], ("w_J_per_m3",))
    else:
        kwargs = {"b_sat": args.bsat, "mode": _MODES[args.mode]}
        if args.tau is not None:
            kwargs["tau"] = args.tau
        try:
            spec = ExtrapolationSpec(**kwargs)
        except ValueError as ex:
            raise _InputError(str(ex)) from ex
        ext = extrapolate(curve, spec)
        h_max = args.hmax if args.hmax is not None else 10.0 * curve.h_end
        if not h_max > curve.h_end:
            raise _InputError(f"--hmax must exceed the last sample H={curve.h_end!r}")
        if args.points < 1:
            raise _InputError("--points must be at least 1")
        _write_curve(args, rows + sample_extension(ext, h_max, args.points))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    # Global flags are accepted before and after the subcommand.
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--format", choices=("json", "text"), help="output format (default json)")
    common.add_argument("--seed", type=int, help="seed of the validation point generator (default 0)")
    common.add_argument("--tol-grad", type=float, help="gradient relative tolerance")
    common.add_argument("--tol-asym", type=float, help="Hessian asymmetry tolerance")
    p = argparse.ArgumentParser(prog="bhlaw", description="Energy-based magnetic material laws.", parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="energy, field and reluctivity at one flux density")
    e.add_argument("spec")
    e.add_argument("--b", required=True, help="flux density Bx,By,Bz in T")
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("contour", parents=[common], help="iso-energy lines in a coordinate plane")
    c.add_argument("spec")
    c.add_argument("--plane", choices=[pl.value for pl in analysis.Plane], default="xy")
    c.add_argument("--fixed", type=float, default=0.0, help="out-of-plane flux component in T")
    c.add_argument("--levels", required=True, help="ascending energy levels in J/m^3, comma-separated")
    c.add_argument("--n-angles", type=int, default=720)
    c.add_argument("--output", help="write to this file instead of standard output")
    c.set_defaults(func=cmd_contour)

    k = sub.add_parser("check", parents=[common], help="gradient, convexity and path-independence validation")
    k.add_argument("spec")
    k.add_argument("--radius", type=float, required=True, help="sampling ball radius in T")
    k.add_argument("--n-points", type=int, default=200)
    k.add_argument("--n-paths", type=int, default=None, help="path-independence endpoints (default: all points)")
    k.set_defaults(func=cmd_check)

    cv = sub.add_parser("curve", parents=[common], help="inspect, integrate or extend a BH curve CSV")
    cv.add_argument("action", choices=("show", "integrate", "extrapolate"))
    cv.add_argument("csv")
    cv.add_argument("--bsat", type=float, help="saturation intercept in T (extrapolate)")
    cv.add_argument("--mode", choices=tuple(_MODES), default="rolling")
    cv.add_argument("--tau", type=float, help="transverse approach length in A/m")
    cv.add_argument("--hmax", type=float, help="largest sampled H of the extension (default 10 H_end)")
    cv.add_argument("--points", type=int, default=20, help="number of extension samples")
    cv.set_defaults(func=cmd_curve)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    # Defaults go here: the flag actions are shared with the subparsers, so parser defaults would leak.
    for key, value in _GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    if args.command == "curve" and args.action == "extrapolate" and args.bsat is None:
        parser.error("curve extrapolate requires --bsat")
    try:
        return args.func(args)
    except (LawSpecError, CurveError, _InputError) as ex:
        code, msg = EXIT_INPUT, str(ex)
    except (RangeError, AllPointsOutOfRange) as ex:
        code, msg = EXIT_RANGE, str(ex)
    except NoConvergence as ex:
        code, msg = EXIT_NUMERIC, str(ex)
    except OSError as ex:
        code, msg = EXIT_INPUT, f"{ex.filename}: {ex.strerror}"
    print(f"bhlaw: {msg}".splitlines()[0], file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
