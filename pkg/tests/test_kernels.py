"""The compiled kernels and the numpy fallback must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest

from embound import _core
from embound.geometry import ellipse, superellipse
from embound.metrics import RasterConfig, rasterize
from embound.regressor import ALPHA, init_model

compiled = _core.compiled
fallback = _core.fallback
needs_ext = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


@pytest.fixture
def mlp():
    rng = np.random.default_rng(0)
    m = init_model([10, 10, 10, 10, 1], seed=3)
    m.params += 0.05 * rng.standard_normal(m.n_params)
    return m.params, np.asarray(m.sizes, dtype=np.int64), rng.standard_normal((200, 10)), rng.standard_normal(200)


@needs_ext
def test_forward_agrees(mlp):
    p, s, x, _ = mlp
    assert np.allclose(compiled.mlp_forward(p, s, x, ALPHA), fallback.mlp_forward(p, s, x, ALPHA), rtol=1e-13,
                       atol=1e-14)


@needs_ext
def test_loss_grad_agrees(mlp):
    p, s, x, y = mlp
    lc, gc = compiled.mlp_loss_grad(p, s, x, y, ALPHA)
    lf, gf = fallback.mlp_loss_grad(p, s, x, y, ALPHA)
    assert lc == pytest.approx(lf, rel=1e-13)
    assert np.allclose(gc, gf, rtol=1e-12, atol=1e-15)


@needs_ext
def test_train_epoch_agrees(mlp):
    p, s, x, y = mlp
    order = np.random.default_rng(1).permutation(len(y)).astype(np.int64)
    results = []
    for k in (compiled, fallback):
        q, m, v = p.copy(), np.zeros_like(p), np.zeros_like(p)
        step, bad, _ = k.train_epoch(q, s, x, y, order, 32, ALPHA, m, v, 0, 1e-3, 0.9, 0.999, 1e-8)
        results.append((q, int(step), int(bad)))
    assert results[0][1:] == results[1][1:] == (7, -1)
    assert np.allclose(results[0][0], results[1][0], rtol=1e-11, atol=1e-14)


@needs_ext
def test_adam_update_agrees():
    rng = np.random.default_rng(2)
    g = rng.standard_normal(30)
    out = []
    for k in (compiled, fallback):
        p, m, v = np.ones(30), np.zeros(30), np.zeros(30)
        step = 0
        for _ in range(3):
            step = k.adam_update(p, g, m, v, step, 1e-3, 0.9, 0.999, 1e-8)
        out.append((p, m, v, step))
    for a, b in zip(out[0][:3], out[1][:3]):
        assert np.allclose(a, b, rtol=1e-14, atol=1e-16)
    assert out[0][3] == out[1][3] == 3


@needs_ext
@pytest.mark.parametrize("shape", [ellipse(80, 40, angle_deg=20), superellipse(104, 97, 2.5), ellipse(3, 2)])
def test_raster_moments_agree(shape):
    poly, nx, ny = rasterize(shape, RasterConfig())
    mc, cxc, cyc = compiled.raster_moments(poly, nx, ny)
    mf, cxf, cyf = fallback.raster_moments(poly, nx, ny)
    assert mc[0, 0] == mf[0, 0]  # identical pixel count
    # compare each moment against its natural scale N * R**(p + q)
    n = mf[0, 0]
    r = np.sqrt((mf[2, 0] + mf[0, 2]) / n)
    p, q = np.indices((4, 4))
    scale = n * r ** (p + q)
    assert np.max(np.abs(mc - mf) / scale) < 1e-10
    assert (cxc, cyc) == pytest.approx((cxf, cyf), rel=1e-12)


def test_raster_matches_pixel_centre_rule():
    # brute force: a pixel is inside when its centre is inside the polygon
    from matplotlib.path import Path

    shape = ellipse(6, 4, n=64, angle_deg=15)
    poly, nx, ny = rasterize(shape, RasterConfig(resolution=0.5, margin=1.0))
    jj, ii = np.mgrid[0:ny, 0:nx]
    inside = Path(poly).contains_points(np.column_stack([ii.ravel(), jj.ravel()])).reshape(ny, nx)
    assert np.array_equal(fallback.raster_mask(poly, nx, ny), inside)


@needs_ext
def test_point_polyline_distance_agrees():
    rng = np.random.default_rng(3)
    pts = rng.uniform(-100, 100, (500, 2))
    poly = np.ascontiguousarray(ellipse(70, 50, n=300).points)
    assert np.allclose(compiled.point_polyline_distance(pts, poly), fallback.point_polyline_distance(pts, poly),
                       rtol=1e-13, atol=1e-12)


def test_pure_python_switch():
    code = "from embound._core import BACKEND, kernels, fallback; print(BACKEND, kernels is fallback)"
    env = dict(os.environ, EMBOUND_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["python", "True"]


def test_backend_selection_default():
    expected = "cython" if compiled is not None else "python"
    if os.environ.get("EMBOUND_PURE_PYTHON"):
        expected = "python"
    assert _core.BACKEND == expected
