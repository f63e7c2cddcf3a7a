"""Array geometry, closed boundary curves, ray casting and spline closure.

All coordinates are millimetres in the array-local frame.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DegenerateInput, NoIntersection

N_ANTENNAS = 16
DEFAULT_RING_RADIUS = 115.0
NORMAL_BOUND = 60.0
RAY_TOL = 1e-12


class Source(str, enum.Enum):
    GROUND_TRUTH = "GroundTruth"
    PREDICTED = "Predicted"
    BASELINE = "Baseline"


def signed_area(points):
    """Shoelace area; positive for counter-clockwise rings."""
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def perimeter(points):
    return float(np.sum(np.linalg.norm(np.roll(points, -1, axis=0) - points, axis=1)))


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def is_simple(points, chunk=512):
    """True when the closed polygon has no intersecting non-adjacent edges."""
    p = np.asarray(points, dtype=float)
    n = len(p)
    if n < 3:
        return False
    a = p
    b = np.roll(p, -1, axis=0)
    idx = np.arange(n)
    for start in range(0, n, chunk):
        i = idx[start:start + chunk, None]
        j = idx[None, :]
        # skip self, neighbours and the wrap-around neighbour
        gap = (j - i) % n
        mask = (gap > 1) & (gap < n - 1) & (j > i)
        if not mask.any():
            continue
        ii, jj = np.nonzero(mask)
        ii = ii + start
        p1, p2, q1, q2 = a[ii], b[ii], a[jj], b[jj]
        d1 = _cross(p2 - p1, q1 - p1)
        d2 = _cross(p2 - p1, q2 - p1)
        d3 = _cross(q2 - q1, p1 - q1)
        d4 = _cross(q2 - q1, p2 - q1)
        if np.any((d1 * d2 < 0) & (d3 * d4 < 0)):
            return False
    return True


@dataclass(frozen=True, eq=False)
class Boundary:
    """Closed planar curve; the last point connects back to the first.

    Points are stored counter-clockwise regardless of input orientation.
    """

    points: np.ndarray
    source: Source = Source.GROUND_TRUTH
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
            raise DegenerateInput("a boundary needs at least 3 two-dimensional points")
        if not np.all(np.isfinite(pts)):
            raise DegenerateInput("boundary points must be finite")
        area = signed_area(pts)
        if area == 0.0:
            raise DegenerateInput("boundary encloses zero area")
        if area < 0:
            pts = pts[::-1].copy()
        if self.check and not is_simple(pts):
            raise DegenerateInput("boundary polygon self-intersects")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "source", Source(self.source))

    def __len__(self):
        return len(self.points)

    @property
    def area(self):
        return signed_area(self.points)

    @property
    def length(self):
        return perimeter(self.points)

    @property
    def centroid(self):
        """Area centroid of the enclosed region."""
        x, y = self.points[:, 0], self.points[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        c = x * yn - xn * y
        a = 0.5 * c.sum()
        return np.array([((x + xn) * c).sum(), ((y + yn) * c).sum()]) / (6.0 * a)

    def moments(self):
        """Exact area moments (m00, m10, m01, m20, m11, m02) of the polygon region."""
        x, y = self.points[:, 0], self.points[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        c = x * yn - xn * y
        m00 = c.sum() / 2
        m10 = ((x + xn) * c).sum() / 6
        m01 = ((y + yn) * c).sum() / 6
        m20 = ((x * x + x * xn + xn * xn) * c).sum() / 12
        m02 = ((y * y + y * yn + yn * yn) * c).sum() / 12
        m11 = ((x * yn + 2 * x * y + 2 * xn * yn + xn * y) * c).sum() / 24
        return m00, m10, m01, m20, m11, m02

    def transformed(self, rotation_deg=0.0, translation=(0.0, 0.0), origin=(0.0, 0.0), source=None):
        """Rigid copy: rotate about ``origin`` then translate."""
        pts = rotate(self.points, rotation_deg, origin) + np.asarray(translation, dtype=float)
        return Boundary(pts, self.source if source is None else source, check=False)

    def with_source(self, source):
        return Boundary(self.points, source, check=False)


def rotate(points, angle_deg, origin=(0.0, 0.0)):
    th = np.deg2rad(angle_deg)
    c, s = np.cos(th), np.sin(th)
    o = np.asarray(origin, dtype=float)
    rot = np.array([[c, -s], [s, c]])
    return (np.asarray(points, dtype=float) - o) @ rot.T + o


def ellipse(a, b, n=720, center=(0.0, 0.0), angle_deg=0.0, source=Source.GROUND_TRUTH):
    t = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    pts = np.column_stack([a * np.cos(t), b * np.sin(t)])
    pts = rotate(pts, angle_deg) + np.asarray(center, dtype=float)
    return Boundary(pts, source, check=False)


def circle(r, n=720, center=(0.0, 0.0)):
    return ellipse(r, r, n=n, center=center)


def superellipse(a, b, exponent=2.5, n=720):
    """Lamé curve |x/a|^e + |y/b|^e = 1, a blunter, head-like outline."""
    t = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    c, s = np.cos(t), np.sin(t)
    k = 2.0 / exponent
    pts = np.column_stack([a * np.sign(c) * np.abs(c) ** k, b * np.sign(s) * np.abs(s) ** k])
    return Boundary(pts, Source.GROUND_TRUTH, check=False)


@dataclass(frozen=True, eq=False)
class AntennaArray:
    apertures: np.ndarray
    inward_normals: np.ndarray
    array_id: str = "ring16"

    def __post_init__(self):
        ap = np.array(self.apertures, dtype=float)
        nr = np.array(self.inward_normals, dtype=float)
        if ap.shape != (N_ANTENNAS, 2) or nr.shape != (N_ANTENNAS, 2):
            raise DegenerateInput(f"array needs exactly {N_ANTENNAS} apertures and normals")
        norms = np.linalg.norm(nr, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            # layout files carry a handful of digits; renormalise once
            if np.any(np.abs(norms - 1.0) > 1e-3):
                raise DegenerateInput("inward normals must be unit vectors")
            nr = nr / norms[:, None]
        if not is_simple(ap):
            raise DegenerateInput("apertures must form a simple ring")
        ap.setflags(write=False)
        nr.setflags(write=False)
        object.__setattr__(self, "apertures", ap)
        object.__setattr__(self, "inward_normals", nr)

    @classmethod
    def ring(cls, radius=DEFAULT_RING_RADIUS, n=N_ANTENNAS, array_id="ring16"):
        """Evenly spaced apertures on a circle, normals pointing at the centre."""
        th = 2 * np.pi * np.arange(n) / n
        u = np.column_stack([np.cos(th), np.sin(th)])
        return cls(radius * u, -u, array_id)

    def transformed(self, rotation_deg=0.0, translation=(0.0, 0.0)):
        ap = rotate(self.apertures, rotation_deg) + np.asarray(translation, dtype=float)
        nr = rotate(self.inward_normals, rotation_deg)
        return AntennaArray(ap, nr, self.array_id)


@dataclass(frozen=True, eq=False)
class NormalLengths:
    values: np.ndarray
    bound: float = NORMAL_BOUND

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (N_ANTENNAS,):
            raise DegenerateInput(f"expected {N_ANTENNAS} normal lengths, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or np.any(v < 0) or np.any(v > self.bound):
            raise DegenerateInput(f"normal lengths must lie in [0, {self.bound}] mm")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def ray_hits(origin, direction, points):
    """Ray parameters of every crossing between a ray and a closed polygon."""
    p = np.asarray(points, dtype=float)
    q = np.roll(p, -1, axis=0)
    e = q - p
    denom = _cross(np.broadcast_to(direction, e.shape), e)
    op = p - origin
    with np.errstate(divide="ignore", invalid="ignore"):
        t = _cross(op, e) / denom
        s = _cross(op, np.broadcast_to(direction, e.shape)) / denom
    ok = (denom != 0) & (t > RAY_TOL) & (s >= -RAY_TOL) & (s <= 1 + RAY_TOL)
    return t[ok]


def cast_normals(array, boundary, bound=NORMAL_BOUND):
    """Distance from each aperture along its inward normal to the first boundary hit."""
    out = np.empty(N_ANTENNAS)
    for i in range(N_ANTENNAS):
        t = ray_hits(array.apertures[i], array.inward_normals[i], boundary.points)
        if t.size == 0:
            raise NoIntersection(i)
        out[i] = t.min()
    return NormalLengths(out, bound=bound)


def landing_points(array, normals):
    values = normals.values if isinstance(normals, NormalLengths) else np.asarray(normals, float)
    return array.apertures + values[:, None] * array.inward_normals


def _segment_counts(lengths, n_out):
    raw = n_out * lengths / lengths.sum()
    counts = np.maximum(np.floor(raw).astype(int), 1)
    while counts.sum() < n_out:
        counts[np.argmax(raw - counts)] += 1
    while counts.sum() > n_out:
        cand = np.where(counts > 1, counts - raw, -np.inf)
        counts[np.argmax(cand)] -= 1
    return counts


def spline_close(landing, n_out=360, source=Source.PREDICTED, tol=1e-9):
    """Closed curve through the landing points via a periodic cubic spline.

    The spline is parameterised by cumulative chord length. Samples are spread
    over the segments in proportion to their length and always include the
    knots, so every landing point is an exact vertex of the output.
    """
    pts = np.asarray(landing, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 4:
        raise DegenerateInput("spline closure needs at least 4 points")
    if n_out < len(pts):
        raise DegenerateInput("n_out must be at least the number of landing points")
    chords = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    if np.any(chords <= tol):
        raise DegenerateInput("duplicated landing points")
    centred = pts - pts.mean(axis=0)
    if np.linalg.svd(centred, compute_uv=False)[-1] <= tol:
        raise DegenerateInput("landing points are collinear")

    knots = np.concatenate([[0.0], np.cumsum(chords)])
    closed = np.vstack([pts, pts[:1]])
    spline = CubicSpline(knots, closed, bc_type="periodic", axis=0)

    counts = _segment_counts(chords, n_out)
    params = np.concatenate(
        [knots[i] + chords[i] * np.arange(c) / c for i, c in enumerate(counts)]
    )
    samples = spline(params)
    # land exactly on the knots despite floating point evaluation
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    samples[starts] = pts
    return Boundary(samples, source)


def resample(boundary, n):
    """Uniform arc-length resampling of the closed polyline."""
    pts = boundary.points
    seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    closed = np.vstack([pts, pts[:1]])
    t = np.linspace(0.0, s[-1], n, endpoint=False)
    return np.column_stack([np.interp(t, s, closed[:, 0]), np.interp(t, s, closed[:, 1])])
