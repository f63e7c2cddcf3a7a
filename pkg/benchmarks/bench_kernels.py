"""Time the compiled kernels against the numpy fallback.

Run from the repository root after building the extension:

    python benchmarks/bench_kernels.py [--repeat 5]

Each row reports the best-of-``repeat`` wall time per call for both
backends, the speed-up, and the largest disagreement between their outputs
on identical inputs relative to the output scale.
"""

import argparse
import timeit

import numpy as np

from embound._core import compiled, fallback
from embound.geometry import ellipse
from embound.metrics import RasterConfig, rasterize
from embound.regressor import ALPHA, init_model


def _mlp_case(rng):
    model = init_model([10, 10, 10, 10, 10, 1], seed=1)
    sizes = np.asarray(model.sizes, dtype=np.int64)
    x = rng.standard_normal((7104, 10))
    y = rng.standard_normal(7104)
    return model.params, sizes, x, y


def cases():
    rng = np.random.default_rng(0)
    params, sizes, x, y = _mlp_case(rng)
    order = rng.permutation(len(x)).astype(np.int64)
    poly, nx, ny = rasterize(ellipse(107, 99), RasterConfig())
    pts = rng.uniform(-120, 120, (1440, 2))
    curve = np.ascontiguousarray(ellipse(107, 99, n=1440).points)

    def epoch(k):
        p = params.copy()
        m, v = np.zeros_like(p), np.zeros_like(p)
        k.train_epoch(p, sizes, x, y, order, 32, ALPHA, m, v, 0, 1e-3, 0.9, 0.999, 1e-8)
        return p

    return [
        ("mlp_forward 7104x10", lambda k: k.mlp_forward(params, sizes, x, ALPHA)),
        ("mlp_loss_grad batch 32", lambda k: k.mlp_loss_grad(params, sizes, x[:32], y[:32], ALPHA)[1]),
        ("train_epoch 7104 rows", epoch),
        ("raster_moments 0.25 mm/px", lambda k: k.raster_moments(poly, nx, ny)[0]),
        ("point_polyline_distance", lambda k: k.point_polyline_distance(pts, curve)),
    ]


def best_time(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 10_000:
        number *= 4
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if compiled is None:
        raise SystemExit("compiled extension not built; run `python setup.py build_ext --inplace` first")
    print(f"{'kernel':28s} {'cython ms':>10s} {'python ms':>10s} {'speed-up':>9s} {'rel diff':>10s}")
    for name, run in cases():
        tc = best_time(lambda: run(compiled), args.repeat)
        tp = best_time(lambda: run(fallback), args.repeat)
        a, b = np.asarray(run(compiled)), np.asarray(run(fallback))
        diff = float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))
        print(f"{name:28s} {1e3 * tc:10.3f} {1e3 * tp:10.3f} {tp / tc:9.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
