import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from embound import forward as fw
from embound import geometry as geo
from embound.errors import OutOfRange, PoseRejected

QUIET = fw.ForwardParams(noise_sigma=0.0, footprint_sigma=0.0)


def test_frequency_grid_lattice():
    g = fw.FrequencyGrid()
    f = g.freqs
    assert len(f) == 451
    assert g.spacing == pytest.approx(0.002, abs=1e-15)
    assert f[0] == 0.7 and f[-1] == 1.6
    k = np.arange(451)
    assert np.allclose(f, 0.7 + k * 0.002, atol=1e-12)


@pytest.mark.parametrize("antenna", range(16))
def test_dip_minimum_at_calibrated_resonance_for_10mm(antenna):
    s = fw.synth_signal(10.0, antenna, QUIET, rng_seed=0)
    f_min = s.grid.freqs[np.argmin(s.magnitude)]
    expected = fw.resonance_curve(10.0, QUIET) + 1e-3 * QUIET.per_antenna_bias[antenna]
    assert abs(f_min - expected) <= 0.002


def test_seeded_signals_are_bit_identical():
    p = fw.ForwardParams(noise_sigma=0.01)
    a = fw.synth_signal(12.3, 5, p, rng_seed=7)
    b = fw.synth_signal(12.3, 5, p, rng_seed=7)
    c = fw.synth_signal(12.3, 5, p, rng_seed=8)
    assert np.array_equal(a.complex_values, b.complex_values)
    assert not np.array_equal(a.complex_values, c.complex_values)


def test_echo_delay_from_phase_slope():
    p = QUIET.replace(gain_near=0.2, gain_len=math.inf, d0=5.0, eps_med=1.0)
    full = fw.synth_signal(10.0, 0, p).complex_values
    clutter = fw.synth_signal(10.0, 0, p, echo=False).complex_values
    echo = full - clutter
    assert np.allclose(np.abs(echo), 0.2)
    phase = np.unwrap(np.angle(echo))
    slope = np.polyfit(fw.GRID.freqs * 1e9, phase, 1)[0]
    tau = -slope / (2 * np.pi)
    assert tau == pytest.approx(2 * 15e-3 / fw.C0, rel=0.01)


@pytest.mark.parametrize("d", [-0.01, 40.01])
def test_distance_out_of_range(d):
    with pytest.raises(OutOfRange):
        fw.synth_signal(d, 0)


@pytest.mark.parametrize("bad", [dict(eps_med=0.5), dict(noise_sigma=-1e-3), dict(per_antenna_bias=(0.0,) * 3)])
def test_params_validation(bad):
    with pytest.raises(ValueError):
        fw.ForwardParams(**bad)


def test_params_dict_round_trip_and_hash():
    p = fw.ForwardParams.clinical_like()
    q = fw.ForwardParams.from_dict(p.to_dict())
    assert q == p and q.hash() == p.hash()
    assert p.hash() != fw.ForwardParams().hash()


# --- resonance curve ----------------------------------------------------------


def test_calibration_table_shape():
    table = fw.resonance_calibration()
    assert table.shape == (401, 2)
    assert table[0, 0] == 0.0 and table[-1, 0] == 40.0
    assert np.allclose(np.diff(table[:, 0]), 0.1)


def test_curve_derivative_changes_sign_at_regime_bounds():
    d = np.linspace(0, 40, 4001)
    slope = np.gradient(fw.resonance_curve(d), d)
    turns = d[1:][np.sign(slope[1:]) != np.sign(slope[:-1])]
    assert len(turns) == 2
    assert turns == pytest.approx([18.0, 30.0], abs=0.02)


def test_mid_range_resonance_has_three_preimages():
    table = fw.resonance_calibration()
    value = 1.0853  # between the regime extremes, off the table lattice
    diff = table[:, 1] - value
    crossings = np.flatnonzero(np.sign(diff[:-1]) != np.sign(diff[1:]))
    assert len(crossings) == 3
    assert table[crossings[0], 0] < 18 < table[crossings[1], 0] < 30 < table[crossings[2], 0]


def test_curve_stays_inside_the_band():
    f = fw.resonance_curve(np.linspace(0, 40, 401))
    assert fw.GRID.f_start < f.min() and f.max() < fw.GRID.f_stop


@given(st.floats(0.0, 39.9))
def test_curve_is_c1(d):
    h = 1e-6
    left = (fw.resonance_curve(d) - fw.resonance_curve(d - h)) / h if d > h else None
    right = (fw.resonance_curve(d + h) - fw.resonance_curve(d)) / h
    if left is not None:
        assert abs(left - right) < 1e-5


# --- signal properties -------------------------------------------------------


@given(st.floats(0.0, 40.0), st.integers(0, 15), st.sampled_from(["phantom", "clinical"]))
def test_passivity(d, antenna, preset):
    p = QUIET if preset == "phantom" else fw.ForwardParams.clinical_like(noise_sigma=0.0)
    assert np.all(fw.synth_signal(d, antenna, p).magnitude <= 1.0 + 1e-9)


@given(st.floats(0.0, 40.0), st.integers(0, 15))
def test_dip_minimum_on_flat_baseline(d, antenna):
    # with a flat antenna baseline and no echo nothing tilts the dip
    p = QUIET.replace(base_slope=0.0, base_curve=0.0)
    s = fw.synth_signal(d, antenna, p, echo=False)
    center = fw.resonance_curve(d, p) + 1e-3 * p.per_antenna_bias[antenna]
    assert abs(s.grid.freqs[np.argmin(s.magnitude)] - center) <= fw.GRID.spacing


def test_noise_level():
    p = fw.ForwardParams(noise_sigma=0.005)
    resid = fw.synth_signal(10.0, 0, p, rng_seed=3).complex_values - fw.synth_signal(10.0, 0, QUIET).complex_values
    assert np.std(resid) == pytest.approx(0.005, rel=0.1)


# --- datasets ----------------------------------------------------------------


@pytest.fixture(scope="module")
def dataset444(ring, phantom):
    return fw.synth_dataset(ring, phantom, 444, rng_seed=0)


def test_dataset_size(dataset444):
    assert len(dataset444) == 444
    assert sum(len(m.labels.values) for m in dataset444) == 7104


def test_dataset_labels_inside_training_envelope(dataset444):
    y = np.concatenate([m.labels.values for m in dataset444])
    assert y.min() >= 3.8 and y.max() <= 17.5


def test_dataset_labels_are_cast_normals(ring, phantom, dataset444):
    m = dataset444[17]
    truth = geo.cast_normals(ring, fw.pose_boundary(phantom, m.pose))
    assert np.array_equal(truth.values, m.labels.values)


def test_empty_dataset(ring, phantom):
    assert fw.synth_dataset(ring, phantom, 0) == []


def test_parallel_generation_matches_serial(ring, phantom):
    a = fw.synth_dataset(ring, phantom, 6, rng_seed=3)
    b = fw.synth_dataset(ring, phantom, 6, rng_seed=3, workers=3)
    for x, y in zip(a, b):
        assert np.array_equal(x.values, y.values) and x.pose == y.pose


def test_wider_envelope_reaches_out_of_range_distances(ring, phantom):
    ranges = fw.PoseRanges(dx=(-12, 12), dy=(-12, 12), envelope=(1.0, 20.0))
    ms = fw.synth_dataset(ring, phantom, 30, ranges, rng_seed=1)
    y = np.concatenate([m.labels.values for m in ms])
    assert y.min() < 3.8 and y.max() > 17.5


def test_impossible_envelope_rejects_pose(ring, phantom):
    with pytest.raises(PoseRejected):
        fw.synth_measurement(ring, phantom, 0, fw.PoseRanges(envelope=(30.0, 31.0)), fw.ForwardParams(), 0,
                             max_attempts=20)
