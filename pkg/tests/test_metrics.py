import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from embound import geometry as geo
from embound import metrics as mt
from embound.errors import EmptyRaster


def brute_hu(a, b, res):
    """Hu invariants of an axis-aligned ellipse from an analytic pixel mask (test oracle)."""
    xs = np.arange(-a - 2, a + 2, res)
    ys = np.arange(-b - 2, b + 2, res)
    x, y = np.meshgrid(xs, ys)
    inside = (x / a) ** 2 + (y / b) ** 2 <= 1
    px, py = x[inside] / res, y[inside] / res
    n = inside.sum()
    dx, dy = px - px.mean(), py - py.mean()

    def eta(p, q):
        return np.sum(dx**p * dy**q) / n ** (1 + (p + q) / 2)

    n20, n02, n11 = eta(2, 0), eta(0, 2), eta(1, 1)
    return np.array([n20 + n02, (n20 - n02) ** 2 + 4 * n11**2])


# --- Hu moments ----------------------------------------------------------------


def test_raster_config_validation():
    with pytest.raises(ValueError):
        mt.RasterConfig(resolution=0.0)
    with pytest.raises(ValueError):
        mt.RasterConfig(margin=-1.0)


def test_first_invariant_positive():
    assert mt.hu_moments(geo.superellipse(104, 97)).h[0] > 0


def test_circle_higher_invariants_vanish():
    h = mt.hu_moments(geo.circle(70, n=2000), mt.RasterConfig(resolution=0.1)).h
    assert abs(h[1]) < 1e-6
    assert h[0] == pytest.approx(1 / (2 * np.pi), rel=1e-4)


def test_circle_invariants_shrink_with_resolution():
    c = geo.circle(20, n=2000)
    h = [abs(mt.hu_moments(c, mt.RasterConfig(resolution=r)).h[1]) for r in (0.5, 0.25, 0.1)]
    assert h[0] > h[2]


def test_translation_leaves_hu_unchanged():
    a = geo.ellipse(80, 40, angle_deg=10)
    ha = mt.hu_moments(a).h
    for t in [(13.0, -8.0), (0.13, 0.37)]:
        assert np.max(np.abs(mt.hu_moments(a.transformed(0, t)).h - ha)) <= 1e-6


def test_ellipse_against_brute_force_oracle():
    res = 0.25
    h = mt.hu_moments(geo.ellipse(60, 30, n=4000), mt.RasterConfig(resolution=res)).h
    ref = brute_hu(60, 30, res)
    assert h[:2] == pytest.approx(ref, rel=2e-3)
    # 2:1 ellipse versus circle
    hc = mt.hu_moments(geo.circle(42, n=4000)).h
    assert abs(h[1] - hc[1]) > 1e-3


def test_empty_raster():
    # a sliver between pixel centres: the corner (0, 0) lies outside x + y >= 0.4
    sliver = geo.Boundary(np.array([[0.0, 0.4], [0.4, 0.0], [0.45, 0.45]]), check=False)
    with pytest.raises(EmptyRaster):
        mt.hu_moments(sliver, mt.RasterConfig(resolution=1.0, margin=0.0))


def test_log_scaled_marks_undefined_terms():
    hv = mt.HuVector(np.array([0.2, 1e-9, 0.0, -1e-3, 0.0, 0.0, 0.0]), np.full(7, 1e-6))
    m = hv.log_scaled()
    assert m[0] == pytest.approx(np.log(0.2))
    assert m[3] == pytest.approx(-np.log(1e-3))
    assert np.isnan(m[1]) and np.isnan(m[2])


# --- dissimilarity -----------------------------------------------------------


def test_identity_is_exactly_zero():
    a = geo.superellipse(104, 97)
    assert mt.hu_dissimilarity(a, a).raw == 0.0
    b = geo.Boundary(a.points.copy())
    assert mt.hu_dissimilarity(a, b).raw == 0.0


def test_rigid_copy_is_close():
    a = geo.ellipse(80, 60)
    b = a.transformed(37.0, (13.0, -8.0))
    assert mt.hu_dissimilarity(a, b).raw <= 5e-3


def test_scaled_reporting():
    assert mt.HuDissimilarity(0.0055, 0).scaled == pytest.approx(0.55)


def test_formula_on_fixed_vectors():
    fl = np.zeros(7)
    ha = mt.HuVector(np.array([0.16, 1e-3, 1e-4, 1e-5, 1e-9, -1e-6, 1e-10]), fl)
    hb = mt.HuVector(np.array([0.17, 2e-3, 1e-4, 2e-5, -1e-9, -1e-6, 0.0]), fl)
    ma, mb = ha.log_scaled(), hb.log_scaled()
    expected = np.sum(np.abs(1 / ma[:6] - 1 / mb[:6]))
    d = mt.hu_distance(ha, hb)
    assert d.raw == pytest.approx(expected)
    assert d.skipped == 1  # h7 of B is exactly zero


@settings(max_examples=15)
@given(st.floats(60, 100), st.floats(40, 100), st.floats(0, 360), st.floats(-30, 30), st.floats(-30, 30))
def test_dissimilarity_symmetric(a, b, rot, tx, ty):
    x = geo.ellipse(a, b, n=360)
    y = geo.superellipse(b, a).transformed(rot, (tx, ty))
    assert mt.hu_dissimilarity(x, y).raw == mt.hu_dissimilarity(y, x).raw


@pytest.mark.parametrize("res", [0.5, 0.25, 0.1])
def test_rigid_invariance_at_each_resolution(res):
    a = geo.ellipse(80, 60)
    rng = np.random.default_rng(7)
    worst = max(mt.hu_dissimilarity(a, a.transformed(rng.uniform(0, 360), rng.uniform(-20, 20, 2)),
                                    mt.RasterConfig(resolution=res)).raw for _ in range(4))
    assert worst <= 5e-3


def test_rigid_error_shrinks_as_resolution_refines():
    a = geo.ellipse(80, 40)
    rng = np.random.default_rng(1)
    moves = [(rng.uniform(0, 360), rng.uniform(-20, 20, 2)) for _ in range(5)]
    means = [np.mean([mt.hu_dissimilarity(a, a.transformed(r, t), mt.RasterConfig(resolution=res)).raw
                      for r, t in moves]) for res in (0.5, 0.25, 0.1)]
    assert means[0] > means[1] > means[2]


# --- area and length ---------------------------------------------------------


def test_area_and_length_examples():
    a = geo.circle(70)
    assert mt.area_change(a, a) == 0.0 and mt.length_change(a, a) == 0.0
    b = geo.circle(77)
    assert mt.area_change(a, b) == pytest.approx(21.0, abs=1e-9)
    assert mt.length_change(a, b) == pytest.approx(10.0, abs=1e-9)
    square = geo.Boundary(np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float))
    assert square.area == 1.0


@given(st.floats(0, 360), st.floats(-50, 50), st.floats(-50, 50))
def test_area_length_change_rigid_invariant(rot, tx, ty):
    a = geo.ellipse(80, 60, n=360)
    b = geo.superellipse(90, 70, n=360)
    moved = b.transformed(rot, (tx, ty))
    assert mt.area_change(a, moved) == pytest.approx(mt.area_change(a, b), rel=1e-9)
    assert mt.length_change(a, moved) == pytest.approx(mt.length_change(a, b), rel=1e-9)


# --- rigid alignment and deviation -------------------------------------------


@pytest.mark.parametrize("rot", [25.0, 23.7, 301.2])
def test_recovers_rotation_and_translation(rot):
    a = geo.superellipse(104, 80, 2.5, n=720)
    b = a.transformed(rot, (6.0, -3.0), origin=a.centroid)
    al = mt.rigid_align(a, b)
    assert al.rotation == pytest.approx(rot, abs=0.1)
    assert np.allclose(al.translation, [6.0, -3.0], atol=1e-9)
    assert al.residual <= 1e-3


def test_self_alignment_is_identity():
    a = geo.superellipse(104, 80, 2.5, n=720)
    al = mt.rigid_align(a, a)
    assert al.rotation == 0.0 and al.residual <= 1e-12
    assert np.allclose(al.translation, 0.0)


def test_circle_residual_flat_in_rotation():
    a = geo.circle(70, n=720)
    for rot in (0.0, 33.0, 181.0):
        al = mt.rigid_align(a, a.transformed(rot, (5.0, 2.0)))
        assert al.residual < 1e-3


def test_alignment_never_mirrors_or_scales():
    a = geo.superellipse(104, 80, 2.5, n=720)
    b = a.transformed(40.0, (3.0, 1.0))
    al = mt.rigid_align(a, b)
    assert al.aligned.area == pytest.approx(b.area, rel=1e-12)
    assert geo.signed_area(al.aligned.points) > 0


def test_max_deviation_examples():
    a = geo.circle(70, n=2000)
    assert mt.max_deviation(a, a) <= 1e-12
    assert mt.max_deviation(a, geo.circle(71, n=2000)) == pytest.approx(1.0, abs=1e-3)


def test_max_deviation_symmetric_in_arguments():
    a = geo.ellipse(80, 60)
    b = geo.superellipse(82, 61)
    assert mt.max_deviation(a, b) == pytest.approx(mt.max_deviation(b, a), rel=1e-9)


def test_max_deviation_matches_spline_error(ring, phantom):
    truth = geo.ellipse(107, 99, n=4000)
    recon = geo.spline_close(geo.landing_points(ring, geo.cast_normals(ring, truth)), n_out=720)
    # brute-force symmetric distance between dense samplings of both curves
    p = geo.resample(recon, 4000)
    q = geo.resample(truth, 4000)
    d = np.linalg.norm(p[:, None, :] - q[None, :, :], axis=2)
    oracle = max(d.min(axis=1).max(), d.min(axis=0).max())
    assert mt.max_deviation(truth, recon) == pytest.approx(oracle, abs=0.01)


def test_zero_deviation_only_for_coinciding_curves():
    a = geo.circle(70, n=720)
    assert mt.max_deviation(a, a.transformed(0.0, (1e-3, 0.0))) > 0.0
