import math

import numpy as np
import pytest
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from bhenergy import fixtures as fx
from bhenergy.bhcurve import (
    BHSample,
    ExtrapolationMode,
    ExtrapolationSpec,
    b_of_w,
    extrapolate,
    format_curve_csv,
    h_of_b,
    load_curve,
    parse_curve_csv,
    read_curve_csv,
    sample_extension,
    w_of_b,
)
from bhenergy.errors import (
    BSatTooSmall,
    CurveFormatError,
    NegativeB,
    NonConvexExtension,
    NonMonotone,
    OutOfRange,
    TooFewSamples,
)
from bhenergy.fieldcore import MU0

ALL_CURVES = {
    "linear": fx.linear_curve,
    "mild_steel": lambda: fx.mild_steel_curve(extended=False),
    "rolling": lambda: fx.rolling_curve(extended=False),
    "transverse": lambda: fx.transverse_curve(extended=False),
}


@pytest.fixture(params=sorted(ALL_CURVES))
def curve(request):
    return ALL_CURVES[request.param]()


# --- ingestion ---------------------------------------------------------------


def test_origin_is_prepended():
    c = load_curve([(1000, 1.0), (2000, 1.5)])
    assert c.samples == (BHSample(0.0, 0.0), BHSample(1000.0, 1.0), BHSample(2000.0, 1.5))


def test_unsorted_rows_with_decreasing_b_are_rejected():
    with pytest.raises(NonMonotone) as info:
        load_curve([(1000, 1.0), (500, 1.2)])
    assert info.value.row == (1000.0, 1.0)


def test_rows_are_sorted_by_h():
    c = load_curve([(2000, 1.5), (1000, 1.0)])
    assert c.knots_h == (0.0, 1000.0, 2000.0)


def test_duplicate_set_points_are_averaged():
    c = load_curve([(1000, 1.0), (1000 * (1 + 1e-13), 1.2), (2000, 1.5)])
    assert len(c.samples) == 3
    assert c.samples[1].b == pytest.approx(1.1, rel=1e-15)


def test_too_few_samples():
    with pytest.raises(TooFewSamples):
        load_curve([(1000, 1.0)])


def test_remanence_is_rejected():
    with pytest.raises(NonMonotone):
        load_curve([(0.0, 0.1), (100.0, 1.0)])


def test_energy_table_starts_at_zero_and_increases(curve):
    table = curve.energy_table
    assert table[0] == 0.0
    assert all(b > a for a, b in zip(table, table[1:]))


# --- interpolation -----------------------------------------------------------


def test_linear_fixture_closed_forms():
    c = fx.linear_curve()
    assert c.h_of_b(0.0) == 0.0
    assert c.h_of_b(0.75) == pytest.approx(750.0, rel=1e-14)
    assert c.w_of_b(1.0) == pytest.approx(500.0, rel=1e-14)
    assert c.b_of_w(500.0) == pytest.approx(1.0, abs=1e-12)
    assert w_of_b(c, 0.0) == 0.0 and b_of_w(c, 0.0) == 0.0


def test_linear_energy_table_against_trapezoid():
    c = fx.linear_curve()
    bs = np.linspace(0.0, 1.0, 10_001)
    hs = np.array([c.h_of_b(float(b)) for b in bs])
    trap = float(np.sum(0.5 * (hs[1:] + hs[:-1]) * np.diff(bs)))
    # trapezoid is exact for a linear integrand up to round-off
    assert c.w_of_b(1.0) == pytest.approx(trap, rel=1e-9)
    assert c.energy_table[4] == pytest.approx(0.5 * 1000.0 * 1.0**2, rel=1e-12)


def test_knots_are_reproduced_exactly(curve):
    for s in curve.samples:
        assert h_of_b(curve, s.b) == s.h


def test_interpolant_matches_scipy_pchip(curve):
    ref = PchipInterpolator(curve.knots_b, curve.knots_h)
    bs = np.linspace(0.0, curve.b_end, 997)
    got = np.array([curve.h_of_b(float(b)) for b in bs])
    np.testing.assert_allclose(got, ref(bs), rtol=1e-10, atol=1e-9)


def test_no_overshoot_and_monotone(curve):
    kb, kh = curve.knots_b, curve.knots_h
    for i in range(len(kb) - 1):
        bs = np.linspace(kb[i], kb[i + 1], 41)
        hs = [curve.h_of_b(float(b)) for b in bs]
        assert all(kh[i] <= h <= kh[i + 1] for h in hs)
        assert all(y >= x for x, y in zip(hs, hs[1:]))


def test_slope_matches_finite_difference(curve):
    rng = np.random.default_rng(4)
    for b in rng.uniform(0.01, curve.b_end - 0.01, 30):
        fd = (curve.h_of_b(b + 1e-7) - curve.h_of_b(b - 1e-7)) / 2e-7
        assert curve.dh_db(b) == pytest.approx(fd, rel=1e-5, abs=1e-3)


def test_energy_matches_adaptive_quadrature(curve):
    rng = np.random.default_rng(1)
    for _ in range(50):
        b1, b2 = sorted(rng.uniform(0.0, curve.b_end, 2))
        ref, _ = integrate.quad(curve.h_of_b, b1, b2, points=[k for k in curve.knots_b if b1 < k < b2],
                                epsabs=0.0, epsrel=1e-13, limit=200)
        assert curve.w_of_b(b2) - curve.w_of_b(b1) == pytest.approx(ref, rel=1e-9)


def test_vectorized_energy_matches_scalar(curve):
    bs = np.linspace(0.0, curve.b_end, 301)
    np.testing.assert_allclose(curve.w_of_b_array(bs), [curve.w_of_b(float(b)) for b in bs], rtol=1e-14, atol=1e-12)


def test_inverse_energy_round_trip(curve):
    rng = np.random.default_rng(2)
    for x in rng.uniform(0.0, curve.b_end, 100):
        assert curve.b_of_w(curve.w_of_b(x)) == pytest.approx(x, abs=1e-10)
    for b in curve.knots_b:
        assert curve.b_of_w(curve.w_of_b(b)) == pytest.approx(b, abs=1e-12)


def test_inverse_energy_field_pair(curve):
    for w in np.geomspace(1e-3, curve.w_max, 25):
        b, h = curve.b_and_h_of_w(float(w))
        assert curve.w_of_b(b) == pytest.approx(w, rel=1e-12)
        assert h == pytest.approx(curve.h_of_b(b), rel=1e-12, abs=1e-12)


def test_b_to_h_inverse(curve):
    for s in curve.samples:
        assert curve.b_of_h(s.h) == pytest.approx(s.b, rel=1e-12, abs=1e-15)


def test_range_errors_name_the_curve():
    c = fx.linear_curve()
    with pytest.raises(OutOfRange, match="linear_nu1000.csv"):
        c.h_of_b(3.5)
    with pytest.raises(OutOfRange):
        c.b_of_w(c.w_max * 1.01)
    with pytest.raises(NegativeB):
        c.w_of_b(-0.1)


# --- extrapolation -----------------------------------------------------------


def test_rolling_extension_has_vacuum_slope():
    base = fx.rolling_curve(extended=False)
    c = fx.rolling_curve()
    assert c.h_of_b(base.b_end) == base.h_end
    for b in (base.b_end + 0.01, base.b_end + 0.5, base.b_end + 2.0):
        h1, h2 = c.h_of_b(b), c.h_of_b(b + 0.1)
        assert 0.1 / (h2 - h1) == pytest.approx(MU0, rel=1e-12)
        assert c.dh_db(b) == pytest.approx(1.0 / MU0, rel=1e-12)
    assert c.b_max == math.inf


def test_rolling_extension_energy_closed_form():
    base = fx.rolling_curve(extended=False)
    c = fx.rolling_curve()
    db = 0.7
    expected = base.w_max + base.h_end * db + db * db / (2.0 * MU0)
    assert c.w_of_b(base.b_end + db) == pytest.approx(expected, rel=1e-13)
    assert c.b_of_w(expected) == pytest.approx(base.b_end + db, abs=1e-12)


def test_transverse_extension_contracts():
    base = fx.transverse_curve(extended=False)
    spec = fx.transverse_spec()
    c = fx.transverse_curve()
    assert c.h_of_b(base.b_end) == base.h_end
    delta = spec.b_sat + MU0 * base.h_end - base.b_end
    h = base.h_end + 14.0 * spec.tau
    b = c.b_of_h(h)
    assert abs(spec.b_sat + MU0 * h - b) < 1e-6 * delta
    # continuous field and energy across the junction
    eps = 1e-9
    assert c.h_of_b(base.b_end + eps) == pytest.approx(base.h_end, rel=1e-5)
    assert c.w_of_b(base.b_end + eps) == pytest.approx(base.w_max + base.h_end * eps, rel=1e-12)


def test_transverse_extension_energy_against_quadrature():
    c = fx.transverse_curve()
    b0, w0 = c.b_end, c.w_of_b(c.b_end)
    for b1 in (b0 + 0.05, b0 + 0.3, b0 + 1.0):
        ref, _ = integrate.quad(c.h_of_b, b0, b1, epsabs=0.0, epsrel=1e-12)
        assert c.w_of_b(b1) - w0 == pytest.approx(ref, rel=1e-9)
        assert c.b_of_w(c.w_of_b(b1)) == pytest.approx(b1, abs=1e-12)


@pytest.mark.parametrize("mode", list(ExtrapolationMode))
def test_extended_curves_are_monotone_on_dense_scan(mode):
    base = fx.transverse_curve(extended=False)
    b_sat = fx.common_b_sat()
    c = extrapolate(base, ExtrapolationSpec(b_sat=max(b_sat, base.b_end), mode=mode, tau=fx.matching_tau(base, b_sat)))
    bs = np.linspace(0.0, b_sat + 0.5, 10_000)
    hs = np.array([c.h_of_b(float(b)) for b in bs])
    assert np.all(np.diff(hs) >= 0.0)
    assert c.h_of_b(base.b_end) == base.h_end


def test_b_sat_below_last_sample():
    base = fx.rolling_curve(extended=False)
    with pytest.raises(BSatTooSmall):
        extrapolate(base, ExtrapolationSpec(b_sat=base.b_end - 0.01))


def test_transverse_extension_that_overshoots_is_rejected():
    # a curve already steeper than the approach at its end: the asymptote would lie below it
    c = load_curve([(100.0, 1.0), (200.0, 1.9)])
    with pytest.raises((NonConvexExtension, BSatTooSmall)):
        extrapolate(c, ExtrapolationSpec(b_sat=1.0, mode="transverse_approach"))


def test_invalid_spec_values():
    with pytest.raises(ValueError):
        ExtrapolationSpec(b_sat=2.0, mode="transverse_approach", tau=0.0)
    with pytest.raises(ValueError):
        ExtrapolationSpec(b_sat=math.nan)
    with pytest.raises(ValueError):
        ExtrapolationSpec(b_sat=2.0, mode="quadratic")


def test_sample_extension_lies_on_the_extension():
    c = fx.rolling_curve()
    pts = sample_extension(c, 10 * c.h_end, 5)
    assert len(pts) == 5 and pts[-1][0] == pytest.approx(10 * c.h_end)
    for h, b in pts:
        assert c.h_of_b(b) == pytest.approx(h, rel=1e-12)
    with pytest.raises(ValueError):
        sample_extension(fx.rolling_curve(extended=False), 1e5, 3)


# --- CSV ---------------------------------------------------------------------


def test_csv_round_trip_is_lossless(tmp_path):
    rows = fx.mild_steel_rows()
    p = tmp_path / "steel.csv"
    p.write_text(format_curve_csv(rows))
    c = read_curve_csv(p)
    assert [(s.h, s.b) for s in c.samples[1:]] == [(float(h), b) for h, b in rows]
    assert c.name == "steel.csv"


def test_csv_comments_crlf_and_extra_columns():
    text = "# measured\r\nH_A_per_m,B_T,w\r\n# comment\r\n100,0.5,1\r\n\r\n200,0.8,2\r\n"
    c = parse_curve_csv(text)
    assert c.knots_h == (0.0, 100.0, 200.0)


@pytest.mark.parametrize(
    "text, line",
    [
        ("H,B\n1,2\n", 1),
        ("H_A_per_m,B_T\n100,abc\n", 2),
        ("H_A_per_m,B_T\n100\n", 2),
        ("H_A_per_m,B_T\n100,0.5\n-5,0.1\n", 3),
        ("H_A_per_m,B_T\n100,0.5\n200,nan\n", 3),
        ("# only comments\n", 1),
    ],
)
def test_csv_format_errors_carry_line_numbers(text, line):
    with pytest.raises(CurveFormatError) as info:
        parse_curve_csv(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_csv_non_monotone_cites_first_offending_row():
    text = "H_A_per_m,B_T\n# c\n100,0.5\n200,0.9\n300,0.7\n400,1.0\n"
    with pytest.raises(CurveFormatError) as info:
        parse_curve_csv(text)
    assert info.value.line == 5
    assert "H=300.0" in str(info.value)
