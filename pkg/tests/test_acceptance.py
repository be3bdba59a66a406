"""
Acceptance run: one pass/fail line per criterion.

Run standalone with ``python3 tests/test_acceptance.py`` or through pytest, which prints the same
lines outside output capture.
"""

import contextlib
import io
import json
import math
import sys
import tempfile
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from bhenergy import fixtures as fx
from bhenergy.analysis import (
    Plane,
    SecantReluctivityLaw,
    check_gradient,
    check_hessian,
    check_path_independence,
    contour_normal_error,
    extract_contour,
    loop_integral,
    sample_points,
)
from bhenergy.bhcurve import ExtrapolationMode, ExtrapolationSpec, extrapolate, load_curve
from bhenergy.cli import EXIT_FAILED, EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, EXIT_RANGE, main
from bhenergy.fieldcore import MU0
from bhenergy.golaw import GrainOrientedLaw, solve_axes
from bhenergy.lamination import LaminatedLaw, solve_insulation_flux
from bhenergy.laws import IsotropicLaw, VacuumLaw

LAW_NAMES = [
    "vacuum",
    "linear_anisotropic",
    "isotropic_linear",
    "isotropic_saturating",
    "go_two_curve",
    "go_three_curve",
    "laminated_exact",
    "laminated_linearized",
    "laminated_go",
]
RADIUS = 2.0  # [T], sampling ball of the property checks
SEED = 2024
F2 = 0.97

_LAWS = None


def shipped():
    global _LAWS
    if _LAWS is None:
        _LAWS = fx.shipped_laws()
    return _LAWS


# ---------------------------------------------------------------- criteria


def criterion_1():
    worst = {}
    for name in LAW_NAMES:
        r = check_gradient(shipped()[name], RADIUS, 200, seed=SEED)
        if r.points_tested != 200:
            return False, f"{name}: only {r.points_tested} of 200 points in range"
        worst[name] = r.gradient_max_rel_err
    top = max(worst, key=worst.get)
    ok = all(v <= 1e-5 for v in worst.values())
    return ok, f"gradient vs central differences at 200 points, worst {worst[top]:.2e} ({top})"


def criterion_2():
    details = []
    for name in LAW_NAMES:
        r = check_hessian(shipped()[name], RADIUS, 200, seed=SEED)
        if not (r.hessian_asym_max <= 1e-4 and r.min_hessian_eigenvalue > 0 and not r.convexity_violations):
            return False, f"{name}: asym {r.hessian_asym_max:.2e}, min eigenvalue {r.min_hessian_eigenvalue:.3g}"
        details.append(r.hessian_asym_max)
    fault = SecantReluctivityLaw(fx.law_documents()["secant_asymmetric"]["nu"])
    fr = check_hessian(fault, RADIUS, 200, seed=SEED)
    if fr.passed:
        return False, "asymmetric secant fixture was not rejected"
    return True, f"worst asymmetry {max(details):.2e}; asymmetric fault rejected (asym {fr.hessian_asym_max:.2e})"


def criterion_3():
    worst_path = worst_loop = 0.0
    rng = np.random.default_rng(SEED)
    for name in LAW_NAMES:
        law = shipped()[name]
        r = check_path_independence(law, RADIUS, 50, seed=SEED)
        if r.points_tested != 50:
            return False, f"{name}: only {r.points_tested} of 50 endpoints in range"
        worst_path = max(worst_path, r.path_independence_max_rel_err)
        for _ in range(5):
            tri = sample_points(rng, RADIUS, 3, law.planar)
            worst_loop = max(worst_loop, abs(loop_integral(law, tri)) / law.energy(tri[0]))
    ok = worst_path <= 1e-6 and worst_loop <= 1e-8
    return ok, f"staircase vs ray worst {worst_path:.2e} on 50 endpoints per law; triangle loops worst {worst_loop:.2e} w(a)"


def criterion_4():
    law = VacuumLaw()
    w = law.energy((1.0, 0.0, 0.0))
    h = law.field((0.0, 1.0, 0.0)).norm
    ew = abs(w - 397887.35772973835) / w
    eh = abs(h - 795774.7154594767) / h
    ok = MU0 == 4e-7 * math.pi and ew <= 1e-12 and eh <= 1e-12
    return ok, f"w(1 T) = {w!r} J/m^3, |H|(1 T) = {h!r} A/m"


def _grid_minimizer(b, w_inner, f1, n, stages, half_width=0.1):
    """Minimize w*(B, B1) over B1 on zooming n x n grids; w_inner maps |B2|^2 arrays to energy."""
    f2 = 1.0 - f1
    cx = cy = 0.0
    for _ in range(stages):
        xs = np.linspace(cx - half_width, cx + half_width, n)
        ys = np.linspace(cy - half_width, cy + half_width, n)
        x, y = np.meshgrid(xs, ys, indexing="ij")
        b2sq = ((b[0] - f1 * x) / f2) ** 2 + ((b[1] - f1 * y) / f2) ** 2 + b[2] ** 2
        phi = f1 / (2 * MU0) * (x * x + y * y + b[2] ** 2) + f2 * w_inner(b2sq)
        i, j = np.unravel_index(np.argmin(phi), phi.shape)
        cx, cy = xs[i], ys[j]
        half_width *= 8.0 / (n - 1)
    return cx, cy


def criterion_5():
    f1 = 1.0 - F2
    nu = fx.LINEAR_NU
    lin = LaminatedLaw(shipped()["isotropic_linear"], f1)
    k = nu / (F2 / MU0 + f1 * nu)
    err_closed = err_grid = 0.0
    for b in [(0.6, -0.4, 0.2), (1.3, 0.9, 0.0), (-0.2, 1.7, -0.5)]:
        x, y = solve_insulation_flux(lin, b)
        err_closed = max(err_closed, abs(x - k * b[0]), abs(y - k * b[1]))
        gx, gy = _grid_minimizer(b, lambda s: 0.5 * nu * s, f1, 2001, 3)
        err_grid = max(err_grid, abs(x - gx), abs(y - gy))
    steel = fx.mild_steel_curve(False)
    w_of_b = PchipInterpolator(steel.knots_b, steel.knots_h).antiderivative()
    sat = LaminatedLaw(IsotropicLaw(fx.mild_steel_curve()), f1)
    err_sat = 0.0
    for b in sample_points(np.random.default_rng(SEED), 1.5, 20):
        x, y = solve_insulation_flux(sat, b)
        gx, gy = _grid_minimizer(b, lambda s: w_of_b(np.sqrt(s)), f1, 1001, 4)
        err_sat = max(err_sat, abs(x - gx), abs(y - gy))
    ok = F2 == 0.97 and err_closed <= 1e-6 and err_grid <= 1e-6 and err_sat <= 1e-5
    return ok, (
        f"f2 = {F2}: linear inner vs closed form {err_closed:.1e} T, vs 2001x2001 grid {err_grid:.1e} T; "
        f"saturating inner vs grid at 20 points {err_sat:.1e} T"
    )


def criterion_6():
    laws = shipped()
    probes = [(0.4, 1.1, -0.2), (1.5, 0.0, 0.3), (-0.9, -0.8, 1.2)]
    f1 = 1.0 - F2
    for name in ("isotropic_saturating", "go_three_curve"):
        inner = laws[name]
        zero = LaminatedLaw(inner, 0.0)
        for b in probes:
            w, h, nu = zero.evaluate(b)
            w2, h2, nu2 = inner.evaluate(b)
            if not (w == w2 and tuple(h) == tuple(h2) and nu == nu2):
                return False, f"f1 = 0 differs from {name} at {b}"
    vac = VacuumLaw()
    vstack = LaminatedLaw(vac, f1)
    err_vac = max(abs(vstack.energy(b) - vac.energy(b)) / vac.energy(b) for b in probes)
    err_z = 0.0
    for name in ("laminated_exact", "laminated_linearized", "laminated_go"):
        law = laws[name]
        for bz in (0.2, 1.0, 1.7, 2.5):
            hz = law.field((0.0, 0.0, bz))[2]
            expect = f1 * bz / MU0 + F2 * law.inner.field((0.0, 0.0, bz))[2]
            err_z = max(err_z, abs(hz - expect) / expect)
    ok = err_vac <= 1e-12 and err_z <= 1e-12
    return ok, f"f1 = 0 exact; vacuum inner {err_vac:.1e}; pure-z series mixing {err_z:.1e}"


def criterion_7():
    law = shipped()["go_three_curve"]
    worst = 0.0
    for axis, curve in enumerate(law.curves):
        for b in curve.knots_b[1:]:
            v = [0.0, 0.0, 0.0]
            v[axis] = b
            w, h, _ = law.evaluate(v)
            worst = max(worst, abs(w - curve.w_of_b(b)) / curve.w_of_b(b), abs(h[axis] - curve.h_of_b(b)) / curve.h_of_b(b))
    steel = fx.mild_steel_curve()
    same = GrainOrientedLaw(steel, steel, steel)
    iso = IsotropicLaw(steel)
    worst_iso = 0.0
    for b in sample_points(np.random.default_rng(SEED), RADIUS, 50):
        worst_iso = max(worst_iso, abs(same.energy(b) - iso.energy(b)) / iso.energy(b))
        hs, hi = np.array(same.field(b)), np.array(iso.field(b))
        worst_iso = max(worst_iso, np.linalg.norm(hs - hi) / np.linalg.norm(hi))
    ok = worst <= 1e-9 and worst_iso <= 1e-9
    return ok, f"on-axis knots worst {worst:.1e}; identical curves vs isotropic at 50 points {worst_iso:.1e}"


def criterion_8():
    worst = 0.0
    for name in ("go_two_curve", "go_three_curve"):
        r = check_gradient(shipped()[name], RADIUS, 200, seed=SEED + 1)
        if r.points_tested != 200:
            return False, f"{name}: only {r.points_tested} of 200 points in range"
        worst = max(worst, r.gradient_max_rel_err)
    return worst <= 1e-5, f"GO field vs differences of GO energy at 200 points, worst {worst:.2e}"


def criterion_9():
    laws = shipped()
    cases = [
        ("isotropic_saturating", "xy", 0.0),
        ("linear_anisotropic", "yz", 0.1),
        ("go_two_curve", "xy", 0.0),
        ("go_three_curve", "xz", 0.0),
        ("laminated_go", "xy", 0.0),
    ]
    worst_level = worst_normal = 0.0
    count = 0
    for name, plane, fixed in cases:
        law = laws[name]
        levels = [law.energy(Plane(plane).embed(b, 0.0, fixed)) for b in (0.7, 1.4, 1.9)]
        contours = [extract_contour(law, plane, fixed, lv, n_angles=720) for lv in levels]
        for c in contours:
            count += 1
            if len(c.points) != 720 or not c.is_convex():
                return False, f"{name}: contour at level {c.level:.4g} is not convex"
            for u, v in c.points:
                worst_level = max(worst_level, abs(law.energy(Plane(plane).embed(u, v, fixed)) - c.level) / c.level)
        for inner, outer in zip(contours, contours[1:]):
            if not all(outer.contains(p) for p in inner.points):
                return False, f"{name}: contours are not nested"
        worst_normal = max(worst_normal, contour_normal_error(law, contours[1], delta=1e-6))
    vac = extract_contour(VacuumLaw(), "xy", 0.0, 1.0 / (2.0 * MU0), n_angles=720)
    radius_err = max(abs(math.hypot(u, v) - 1.0) for u, v in vac.points)
    ok = worst_level <= 1e-6 and radius_err <= 1e-9
    return ok, (
        f"{count} contours at 720 angles convex and nested, level error {worst_level:.1e}, "
        f"H normal to contour within {worst_normal:.1e}; vacuum radius error {radius_err:.1e}"
    )


def criterion_10():
    rolling, transverse = fx.rolling_curve(), fx.transverse_curve()
    law = GrainOrientedLaw(rolling, transverse)

    def ratio(b0):
        _, (a0, a90) = solve_axes(law, (b0, 0.0, 0.0))
        return a0 / a90

    r2, r3 = ratio(2.0), ratio(3.0)
    ok = abs(r3 - 1.0) < abs(r2 - 1.0) and transverse.extrapolation.b_sat == rolling.b_end - MU0 * rolling.h_end
    return ok, f"B0/B90 = {r2:.4f} at B0 = 2 T and {r3:.4f} at B0 = 3 T (common B_sat {fx.common_b_sat():.4f} T)"


def criterion_11():
    base = load_curve(fx.mild_steel_rows(), name="steel")
    roll = extrapolate(base, ExtrapolationSpec(b_sat=base.b_end, mode=ExtrapolationMode.ROLLING_LINEAR))
    slope_err = max(abs(1.0 / roll.dh_db(base.b_end + d) - MU0) / MU0 for d in (1e-9, 0.01, 0.5, 3.0))
    b_sat = 1.9
    tau = 5000.0
    trans = extrapolate(base, ExtrapolationSpec(b_sat=b_sat, mode=ExtrapolationMode.TRANSVERSE_APPROACH, tau=tau))
    delta = b_sat + MU0 * base.h_end - base.b_end
    h = base.h_end + 14 * tau
    resid = abs(b_sat + MU0 * h - trans.b_of_h(h))
    monotone = True
    for c in (roll, trans):
        bs = np.linspace(0.0, base.b_end + 1.0, 10_000)
        hs = [c.h_of_b(b) for b in bs]
        monotone &= all(y >= x for x, y in zip(hs, hs[1:]))
    ok = slope_err <= 1e-12 and resid < 1e-6 * delta and monotone
    return ok, (
        f"rolling slope error {slope_err:.1e} mu0; transverse residual {resid / delta:.1e} dB at H_end + 14 tau; "
        f"H(B) non-decreasing on 10^4-point scans: {monotone}"
    )


def _cli(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        try:
            code = main([str(a) for a in argv])
        except SystemExit as ex:
            code = ex.code
    return code, out.getvalue(), err.getvalue()


def criterion_12():
    with tempfile.TemporaryDirectory() as tmp:
        d = fx.write_fixture_files(Path(tmp) / "fx")
        runs = [
            ["eval", d / "go_three_curve.json", "--b", "0.7,-1.1,0.3"],
            ["--format", "text", "eval", d / "laminated_exact.json", "--b", "1.2,0.3,0.4"],
            ["contour", d / "go_two_curve.json", "--levels", "100,1000", "--n-angles", "90"],
            ["check", d / "isotropic_saturating.json", "--radius", "1.5", "--n-points", "20", "--n-paths", "3", "--seed", "7"],
            ["curve", "show", d / "mild_steel.csv"],
            ["curve", "integrate", d / "go_rolling.csv"],
            ["--format", "text", "curve", "extrapolate", d / "go_transverse.csv", "--bsat", "2.05", "--mode", "transverse"],
        ]
        for argv in runs:
            a, b = _cli(argv), _cli(argv)
            if a != b or a[0] != EXIT_OK:
                return False, f"not deterministic or failed: {' '.join(map(str, argv))}"
        doc = json.loads((d / "laminated_exact.json").read_text())
        doc["solver_tol"] = 1e-300
        doc["inner"]["curve"] = str(d / "mild_steel.csv")
        (d / "tight.json").write_text(json.dumps(doc))
        short = {"type": "isotropic", "curve": "mild_steel.csv"}
        (d / "short.json").write_text(json.dumps(short))
        codes = {
            EXIT_FAILED: _cli(["check", d / "secant_asymmetric.json", "--radius", "1", "--n-points", "10"])[0],
            EXIT_INPUT: _cli(["eval", d / "missing.json", "--b", "1,0,0"])[0],
            EXIT_RANGE: _cli(["eval", d / "short.json", "--b", "3,0,0"])[0],
            EXIT_NUMERIC: _cli(["eval", d / "tight.json", "--b", "1.5,0,0"])[0],
        }
        usage = _cli(["eval", d / "vacuum.json"])[0]
    ok = all(k == v for k, v in codes.items()) and usage == EXIT_INPUT
    seen = sorted({EXIT_OK, *codes.values(), usage})
    return ok, f"{len(runs)} commands byte-identical on repeat; exit codes exercised {seen}"


CRITERIA = [
    (1, "gradient consistency", criterion_1),
    (2, "thermodynamic stability", criterion_2),
    (3, "path independence", criterion_3),
    (4, "vacuum closed forms", criterion_4),
    (5, "lamination oracle equivalence", criterion_5),
    (6, "lamination limits", criterion_6),
    (7, "GO axis reproduction", criterion_7),
    (8, "GO field consistency", criterion_8),
    (9, "contour geometry", criterion_9),
    (10, "saturation isotropy trend", criterion_10),
    (11, "extrapolation contracts", criterion_11),
    (12, "CLI determinism and contracts", criterion_12),
]


def run_criterion(number, title, fn):
    try:
        ok, detail = fn()
    except Exception as ex:  # an exception is a failed criterion, reported on its line
        ok, detail = False, f"{type(ex).__name__}: {ex}"
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}: {detail}"
    return ok, line


# ---------------------------------------------------------------- pytest entry points


def _check(number, capsys):
    _, title, fn = CRITERIA[number - 1]
    ok, line = run_criterion(number, title, fn)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def test_criterion_1(capsys):
    _check(1, capsys)


def test_criterion_2(capsys):
    _check(2, capsys)


def test_criterion_3(capsys):
    _check(3, capsys)


def test_criterion_4(capsys):
    _check(4, capsys)


def test_criterion_5(capsys):
    _check(5, capsys)


def test_criterion_6(capsys):
    _check(6, capsys)


def test_criterion_7(capsys):
    _check(7, capsys)


def test_criterion_8(capsys):
    _check(8, capsys)


def test_criterion_9(capsys):
    _check(9, capsys)


def test_criterion_10(capsys):
    _check(10, capsys)


def test_criterion_11(capsys):
    _check(11, capsys)


def test_criterion_12(capsys):
    _check(12, capsys)


if __name__ == "__main__":
    results = []
    for number, title, fn in CRITERIA:
        ok, line = run_criterion(number, title, fn)
        print(line, flush=True)
        results.append(ok)
    print(f"{sum(results)}/{len(results)} criteria passed")
    sys.exit(0 if all(results) else 1)
