import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from embound import baselines as bl
from embound import forward as fw
from embound import geometry as geo
from embound.errors import NoPeak, NoResonance

QUIET = fw.ForwardParams(noise_sigma=0.0, footprint_sigma=0.0)
CALIB = bl.ResonanceCalibration.from_params(QUIET)


# --- resonance shift ---------------------------------------------------------


@pytest.mark.parametrize("antenna", range(16))
def test_noiseless_10mm_recovered_with_refinement(antenna):
    s = fw.synth_signal(10.0, antenna, QUIET)
    cands = bl.resonance_shift_estimate(s, CALIB, refine=True)
    assert any(abs(d - 10.0) <= 0.5 for d in cands.distances)
    assert abs(cands.value - 10.0) <= 0.5
    assert cands.value <= 18.0  # the default is the regime-1 candidate


def test_raw_grid_reading_at_10mm():
    # without sub-bin refinement the estimate is quantised to the 2 MHz grid
    errs = [abs(bl.resonance_shift_estimate(fw.synth_signal(10.0, i, QUIET), CALIB).value - 10.0) for i in range(16)]
    assert np.median(errs) <= 0.5 and max(errs) <= 0.6


def test_monotone_calibration_gives_one_candidate():
    d = np.linspace(0, 40, 401)
    calib = bl.ResonanceCalibration(np.column_stack([d, 1.3 - 0.005 * d]))
    s = fw.synth_signal(10.0, 0, QUIET)
    assert len(bl.resonance_shift_estimate(s, calib).distances) == 1


def test_mid_band_value_has_three_candidates():
    cands = bl.calibration_preimages(1.0853, CALIB)
    assert len(cands) == 3
    assert cands[0] < 18 < cands[1] < 30 < cands[2]


def test_candidate_set_bounds():
    for f in np.linspace(1.05, 1.13, 41):
        c = bl.calibration_preimages(float(f), CALIB)
        assert len(c) <= 3 and all(0 <= x <= 40 for x in c) and list(c) == sorted(c)


def test_no_resonance_when_minimum_on_band_edge():
    vals = np.linspace(0.2, 0.9, 451).astype(complex)
    with pytest.raises(NoResonance):
        bl.resonance_shift_estimate(fw.ReflectionSignal(vals), CALIB)


def test_default_prefers_first_regime():
    s = fw.synth_signal(12.0, 0, QUIET)
    cands = bl.resonance_shift_estimate(s, CALIB)
    assert len(cands.distances) >= 2
    assert cands.value == min(d for d in cands.distances if d <= 18)


@given(st.floats(1.0, 17.0), st.integers(0, 15), st.floats(0.01, 100.0))
def test_resonance_estimate_invariant_to_magnitude_scaling(d, antenna, k):
    s = fw.synth_signal(d, antenna, QUIET)
    scaled = fw.ReflectionSignal(k * s.complex_values, antenna)
    assert bl.resonance_shift_estimate(scaled, CALIB) == bl.resonance_shift_estimate(s, CALIB)


def test_parabolic_offset_exact_for_parabola():
    x = np.array([-1.0, 0.0, 1.0])
    y = (x - 0.3) ** 2
    assert bl.parabolic_offset(*y) == pytest.approx(0.3)


# --- resolution study --------------------------------------------------------


def test_factor_one_matches_estimate():
    s = fw.synth_signal(9.0, 3, QUIET)
    row = bl.resonance_resolution_study(s, CALIB, [1], 9.0)[0]
    assert row[1] == bl.resonance_shift_estimate(s, CALIB).value


def test_error_grows_with_coarsening_on_sloped_region():
    # a 16 MHz grid quantises the resonance of the sloped regime-1 curve
    factors = [1, 2, 4, 8]
    errs = []
    for d in np.arange(6.0, 14.01, 0.5):
        for i in range(16):
            rows = bl.resonance_resolution_study(fw.synth_signal(d, i, QUIET), CALIB, factors, d)
            errs.append([r[2] for r in rows])
    mean = np.mean(errs, axis=0)
    assert mean[-1] > mean[0]
    assert np.all(np.diff(mean) >= 0)


def test_factor_below_one_rejected():
    with pytest.raises(ValueError):
        bl.resonance_resolution_study(fw.synth_signal(9.0, 0, QUIET), CALIB, [0], 9.0)


def test_error_vanishes_with_finer_grids_inside_a_regime():
    # flat baseline and no echo: only the grid limits the estimate
    p = QUIET.replace(base_slope=0.0, base_curve=0.0, gain_near=0.0)
    calib = bl.ResonanceCalibration.from_params(p, step=0.001)
    errs = []
    for n in (451, 1801, 7201):
        grid = fw.FrequencyGrid(0.7, 1.6, n)
        e = [abs(bl.resonance_shift_estimate(fw.synth_signal(d, 0, p, grid=grid, echo=False), calib).value - d)
             for d in (5.3, 9.7, 13.1)]
        errs.append(max(e))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.05


def test_coarsen_keeps_every_kth_sample():
    s = fw.synth_signal(9.0, 0, QUIET)
    c = bl.coarsen(s, 8)
    assert np.array_equal(c.complex_values, s.complex_values[::8])
    assert np.allclose(c.grid.freqs, s.grid.freqs[::8])


# --- matched filter ----------------------------------------------------------


def test_matched_filter_recovers_distance():
    p = QUIET.replace(gain_near=0.3, gain_len=math.inf, d0=5.0)
    s = fw.synth_signal(12.0, 0, p)
    ref = fw.synth_signal(12.0, 0, p, echo=False)
    # the raw range resolution c / 2B is about 166 mm; interpolation does far better
    assert abs(bl.matched_filter_estimate(s, ref, 1.0, 5.0) - 12.0) <= 2.0


def test_matched_filter_no_peak_without_scatterer():
    s = fw.synth_signal(12.0, 0, QUIET)
    with pytest.raises(NoPeak):
        bl.matched_filter_estimate(s, s)


def test_distance_scaling_with_permittivity():
    tau = 2 * 17e-3 / fw.C0
    d1 = bl.delay_to_distance(tau, 1.0, 5.0)
    d2 = bl.delay_to_distance(tau, 2.0, 5.0)
    d4 = bl.delay_to_distance(tau, 4.0, 5.0)
    assert d1 == pytest.approx(12.0)
    # the path length (d + d0) scales with 1/sqrt(eps); quadrupling eps halves it
    assert d2 + 5.0 == pytest.approx((d1 + 5.0) / math.sqrt(2))
    assert d4 + 5.0 == pytest.approx((d1 + 5.0) / 2)


@given(st.floats(-0.3, 0.3), st.floats(-0.3, 0.3), st.floats(0, 3e-9))
def test_matched_filter_ignores_reference_content(re, im, delay):
    p = QUIET.replace(gain_near=0.3, gain_len=math.inf)
    s = fw.synth_signal(12.0, 0, p)
    ref = fw.synth_signal(12.0, 0, p, echo=False)
    clutter = (re + 1j * im) * np.exp(-2j * np.pi * fw.GRID.freqs * 1e9 * delay)
    a = bl.matched_filter_estimate(s, ref)
    b = bl.matched_filter_estimate(fw.ReflectionSignal(s.complex_values + clutter),
                                   fw.ReflectionSignal(ref.complex_values + clutter))
    assert b == pytest.approx(a, abs=1e-9)


def test_time_profile_length():
    s = fw.synth_signal(12.0, 0, QUIET)
    prof, dt = bl.time_profile(s, fw.empty_reference(0, QUIET), pad=16)
    assert len(prof) == 16 * 451
    assert dt == pytest.approx(1.0 / (16 * 451 * 2e6))


# --- baseline boundaries -----------------------------------------------------


def test_perfect_estimates_reproduce_truth(ring, phantom):
    truth = geo.cast_normals(ring, phantom)
    b = bl.baseline_boundary(truth.values, ring)
    assert b.source is geo.Source.BASELINE
    ref = geo.spline_close(geo.landing_points(ring, truth))
    assert np.max(np.abs(b.points - ref.points)) == 0.0


def test_missing_estimate_drops_its_landing_point(ring, phantom):
    est = geo.cast_normals(ring, phantom).values.copy()
    est[5] = np.nan
    b = bl.baseline_boundary(est, ring)
    pts = geo.landing_points(ring, np.nan_to_num(est))
    keep = np.delete(np.arange(16), 5)
    # the 15 remaining landing points are vertices, the dropped one is not
    assert all(np.min(np.linalg.norm(b.points - pts[i], axis=1)) < 1e-9 for i in keep)
    assert np.min(np.linalg.norm(b.points - ring.apertures[5], axis=1)) > 1.0


def test_outliers_are_dropped(ring):
    est = np.full(16, 10.0)
    est[2] = 250.0
    est[9] = -4.0
    b = bl.baseline_boundary(est, ring)
    assert np.max(np.linalg.norm(b.points, axis=1)) < 115.0


def test_equal_estimates_give_circle(ring):
    b = bl.baseline_boundary(np.full(16, 15.0), ring)
    assert np.max(np.abs(np.linalg.norm(b.points, axis=1) - 100.0)) < 0.3
