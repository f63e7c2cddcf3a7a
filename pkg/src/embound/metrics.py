"""Shape dissimilarity: Hu moments of rasterized shapes, area/length change, rigid overlay."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._core import kernels
from .errors import EmptyRaster
from .geometry import Boundary, resample, rotate

# polynomial degree of each Hu invariant in the normalised moments
_HU_DEGREE = np.array([1, 2, 2, 2, 4, 3, 4])


@dataclass(frozen=True)
class RasterConfig:
    """How a boundary is turned into an image before taking moments.

    ``floor_scale`` sets the resolution-derived measurement floor below which
    an invariant is treated as zero (see ``hu_moments``); 0 disables it.
    """

    resolution: float = 0.25  # mm per pixel
    margin: float = 10.0  # mm
    floor_scale: float = 4.0

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        if self.margin < 0 or self.floor_scale < 0:
            raise ValueError("margin and floor_scale must be non-negative")


@dataclass(frozen=True, eq=False)
class HuVector:
    h: np.ndarray  # the seven invariants
    floor: np.ndarray  # per-invariant magnitude that the raster can still resolve
    pixels: int = 0

    def defined(self):
        """Mask of invariants distinguishable from zero at this resolution."""
        return (self.h != 0) & (np.abs(self.h) > self.floor)

    def log_scaled(self):
        """sign(h) * log|h|, NaN where the invariant is not defined."""
        ok = self.defined()
        out = np.full(7, np.nan)
        out[ok] = np.sign(self.h[ok]) * np.log(np.abs(self.h[ok]))
        return out


def rasterize(boundary, cfg=RasterConfig()):
    """Polygon in pixel coordinates plus the canvas size (nx, ny)."""
    pts = boundary.points
    lo = pts.min(axis=0) - cfg.margin
    span = pts.max(axis=0) + cfg.margin - lo
    nx, ny = (np.ceil(span / cfg.resolution).astype(int) + 1).tolist()
    return np.ascontiguousarray((pts - lo) / cfg.resolution), nx, ny


def hu_from_central(mu):
    """The seven Hu invariants from a 4x4 table of central moments."""
    m00 = mu[0, 0]

    def eta(p, q):
        return mu[p, q] / m00 ** (1 + (p + q) / 2)

    n20, n02, n11 = eta(2, 0), eta(0, 2), eta(1, 1)
    n30, n03, n21, n12 = eta(3, 0), eta(0, 3), eta(2, 1), eta(1, 2)
    a, b = n30 + n12, n21 + n03
    h = np.empty(7)
    h[0] = n20 + n02
    h[1] = (n20 - n02) ** 2 + 4 * n11**2
    h[2] = (n30 - 3 * n12) ** 2 + (3 * n21 - n03) ** 2
    h[3] = a**2 + b**2
    h[4] = (n30 - 3 * n12) * a * (a**2 - 3 * b**2) + (3 * n21 - n03) * b * (3 * a**2 - b**2)
    h[5] = (n20 - n02) * (a**2 - b**2) + 4 * n11 * a * b
    h[6] = (3 * n21 - n03) * a * (a**2 - 3 * b**2) - (n30 - 3 * n12) * b * (3 * a**2 - b**2)
    return h


def hu_moments(boundary, cfg=RasterConfig()):
    """Hu invariants of the filled shape, rasterized with the pixel-centre rule.

    Boundary pixels perturb every normalised moment by roughly N**-0.75 for a
    shape covering N pixels, so an invariant of degree k cannot be resolved
    below (floor_scale * N**-0.75)**k; that bound is stored alongside h.
    """
    poly, nx, ny = rasterize(boundary, cfg)
    mu, _, _ = kernels.raster_moments(poly, nx, ny)
    n = mu[0, 0]
    if n == 0:
        raise EmptyRaster("shape covers no pixel centres")
    floor = (cfg.floor_scale * n**-0.75) ** _HU_DEGREE if cfg.floor_scale > 0 else np.zeros(7)
    return HuVector(hu_from_central(mu), floor, int(n))


@dataclass(frozen=True)
class HuDissimilarity:
    raw: float
    skipped: int  # terms dropped because an invariant was undefined

    @property
    def scaled(self):
        """The x100 figure used when tabulating."""
        return 100.0 * self.raw


def hu_distance(ha, hb):
    ma, mb = ha.log_scaled(), hb.log_scaled()
    ok = np.isfinite(ma) & np.isfinite(mb)
    raw = float(np.sum(np.abs(1.0 / ma[ok] - 1.0 / mb[ok])))
    return HuDissimilarity(raw, int(7 - ok.sum()))


def hu_dissimilarity(a, b, cfg=RasterConfig()):
    """I(A, B) = sum_i |1/m_A - 1/m_B| with m = sign(h) log|h|."""
    if a is b:
        h = hu_moments(a, cfg)
        return hu_distance(h, h)
    return hu_distance(hu_moments(a, cfg), hu_moments(b, cfg))


def area_change(a, b):
    """Percent change of B's area relative to the ground truth A."""
    return 100.0 * abs(a.area - b.area) / a.area


def length_change(a, b):
    return 100.0 * abs(a.length - b.length) / a.length


def _mean_gap(samples, poly):
    return float(np.mean(kernels.point_polyline_distance(samples, poly)))


def _golden(fn, lo, hi, tol=1e-5):
    g = (math.sqrt(5) - 1) / 2
    c, d = hi - g * (hi - lo), lo + g * (hi - lo)
    fc, fd = fn(c), fn(d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - g * (hi - lo)
            fc = fn(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + g * (hi - lo)
            fd = fn(d)
    return (lo + hi) / 2


@dataclass(frozen=True, eq=False)
class Alignment:
    rotation: float  # degrees; B is approximately rotate(A, rotation) + translation
    translation: np.ndarray  # mm
    aligned: Boundary
    residual: float  # mean nearest-point distance after alignment, mm


def rigid_align(a, b, n_samples=360, coarse_step=5.0):
    """Rotation and translation (no scaling, no mirroring) that best overlay B on A.

    Centroids are matched first. The mean nearest-point distance is not
    unimodal in the angle, so a coarse scan picks the basin and a
    golden-section search refines it.
    """
    ca, cb = a.centroid, b.centroid
    poly = np.ascontiguousarray(a.points)
    base = resample(b, n_samples) - cb

    def cost(theta):
        return _mean_gap(np.ascontiguousarray(rotate(base, -theta) + ca), poly)

    grid = np.arange(0.0, 360.0, coarse_step)
    c = np.array([cost(t) for t in grid])
    basins = np.flatnonzero((c <= np.roll(c, 1)) & (c <= np.roll(c, -1)) & (c <= 2 * c.min() + 1e-9))
    found = []
    for k in basins[np.argsort(c[basins])][:4]:
        t = _golden(cost, grid[k] - coarse_step, grid[k] + coarse_step) % 360.0
        # the scanned angle itself competes, so an exact optimum on the grid survives
        found += [(cost(t), t), (c[k], grid[k])]
    best = min(f[0] for f in found)
    # symmetric shapes give several equally good angles: prefer the smallest turn
    ties = [t for f, t in found if f <= best + 1e-6 + 1e-3 * best]
    theta = min(ties, key=lambda t: min(t, 360.0 - t))
    if 360.0 - theta < 1e-4:
        theta = 0.0
    aligned = Boundary(rotate(b.points - cb, -theta) + ca, b.source, check=False)
    return Alignment(theta, cb - ca, aligned, cost(theta))


def max_deviation(a, b, n_samples=1440):
    """Symmetric maximum distance between two (already aligned) closed curves."""
    pa, pb = np.ascontiguousarray(a.points), np.ascontiguousarray(b.points)
    sa, sb = np.ascontiguousarray(resample(a, n_samples)), np.ascontiguousarray(resample(b, n_samples))
    return float(max(kernels.point_polyline_distance(sb, pa).max(), kernels.point_polyline_distance(sa, pb).max()))


__all__ = [
    "Alignment",
    "HuDissimilarity",
    "HuVector",
    "RasterConfig",
    "area_change",
    "hu_dissimilarity",
    "hu_distance",
    "hu_from_central",
    "hu_moments",
    "length_change",
    "max_deviation",
    "rasterize",
    "rigid_align",
]
