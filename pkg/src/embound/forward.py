"""Synthetic reflection-coefficient surrogate for the phantom experiment.

Each antenna's S11(f) is an antenna baseline carrying a load-dependent
resonance dip, plus a delayed echo from the nearest scatterer:

    S(f) = B(f) * (1 - dip(f)) + gain(d) * exp(-2j*pi*f*tau(d)) + noise
    tau(d) = 2 * (d + d0) * sqrt(eps_med) / c

The resonance frequency follows three overlapping trends over 0-18, 18-30
and 30-40 mm, so one resonance value can map back to three distances.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import DegenerateInput, NoIntersection, OutOfRange, PoseRejected
from .geometry import N_ANTENNAS, NormalLengths, cast_normals

C0 = 299_792_458.0  # m/s
D_MIN, D_MAX = 0.0, 40.0
TRAINING_ENVELOPE = (3.8, 17.5)


@dataclass(frozen=True)
class FrequencyGrid:
    f_start: float = 0.7  # GHz
    f_stop: float = 1.6
    n_points: int = 451

    @property
    def spacing(self):
        return (self.f_stop - self.f_start) / (self.n_points - 1)

    @property
    def freqs(self):
        return np.linspace(self.f_start, self.f_stop, self.n_points)

    def checksum(self):
        return hashlib.sha256(self.freqs.tobytes()).hexdigest()[:16]


GRID = FrequencyGrid()


def _default_bias():
    # fixed antenna-to-antenna spread of a few MHz
    return tuple(round(2.5 * math.sin(2.3 * i + 0.4), 3) for i in range(N_ANTENNAS))


@dataclass(frozen=True)
class ForwardParams:
    # resonance curve: Hermite knots (mm, GHz) with zero slope at the turning points
    knot_d: tuple = (0.0, 18.0, 30.0, 40.0)
    knot_f: tuple = (1.120, 1.075, 1.100, 1.060)
    slope_start: float = -0.0035  # GHz/mm at d = 0
    slope_end: float = -0.004  # GHz/mm at d = 40
    depth_near: float = 0.75
    depth_far: float = 0.40
    depth_len: float = 12.0  # mm
    q_near: float = 3.0
    q_far: float = 4.0
    gain_near: float = 0.08
    gain_len: float = 25.0  # mm; inf keeps the echo gain constant
    eps_med: float = 1.0
    d0: float = 5.0  # mm
    noise_sigma: float = 0.0005  # roughly -66 dB, an averaged VNA trace
    per_antenna_bias: tuple = field(default_factory=_default_bias)  # MHz
    base_level: float = 0.80
    base_slope: float = -0.04
    base_curve: float = 0.03
    feed_delay: float = 0.6  # ns
    # spread (mm) between the distance an antenna effectively senses over its
    # footprint and the labelled normal length; applied per measurement
    footprint_sigma: float = 0.4
    preset: str = "phantom"

    def __post_init__(self):
        if self.eps_med < 1:
            raise ValueError("eps_med must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.footprint_sigma < 0:
            raise ValueError("footprint_sigma must be >= 0")
        if len(self.per_antenna_bias) != N_ANTENNAS:
            raise ValueError(f"per_antenna_bias needs {N_ANTENNAS} entries")
        object.__setattr__(self, "per_antenna_bias", tuple(float(b) for b in self.per_antenna_bias))
        object.__setattr__(self, "knot_d", tuple(float(v) for v in self.knot_d))
        object.__setattr__(self, "knot_f", tuple(float(v) for v in self.knot_f))

    @classmethod
    def clinical_like(cls, **overrides):
        """Shifted-domain preset: different antenna baseline and heavier noise."""
        kw = dict(
            base_level=0.74,
            base_slope=0.05,
            base_curve=-0.04,
            feed_delay=0.75,
            depth_far=0.34,
            q_near=2.5,
            noise_sigma=0.002,
            footprint_sigma=0.6,
            preset="clinical",
        )
        kw.update(overrides)
        return cls(**kw)

    def replace(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in d.items()})

    def hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def resonance_curve(d, params=ForwardParams()):
    """Resonance frequency (GHz) as a C1 piecewise cubic of distance (mm)."""
    d = np.asarray(d, dtype=float)
    kd = np.asarray(params.knot_d)
    kf = np.asarray(params.knot_f)
    slopes = np.zeros(len(kd))
    slopes[0], slopes[-1] = params.slope_start, params.slope_end
    i = np.clip(np.searchsorted(kd, d, side="right") - 1, 0, len(kd) - 2)
    h = kd[i + 1] - kd[i]
    t = (d - kd[i]) / h
    h00 = 2 * t**3 - 3 * t**2 + 1
    h10 = t**3 - 2 * t**2 + t
    h01 = -2 * t**3 + 3 * t**2
    h11 = t**3 - t**2
    return h00 * kf[i] + h10 * h * slopes[i] + h01 * kf[i + 1] + h11 * h * slopes[i + 1]


def dip_depth(d, params=ForwardParams()):
    return params.depth_far + (params.depth_near - params.depth_far) * np.exp(-np.asarray(d) / params.depth_len)


def dip_q(d, params=ForwardParams()):
    return params.q_near + (params.q_far - params.q_near) * np.asarray(d) / D_MAX


def echo_gain(d, params=ForwardParams()):
    if math.isinf(params.gain_len):
        return params.gain_near * np.ones_like(np.asarray(d, dtype=float))
    return params.gain_near * np.exp(-np.asarray(d) / params.gain_len)


def echo_delay(d, params=ForwardParams()):
    """Round-trip delay in seconds from aperture to scatterer at distance d mm."""
    return 2.0 * (np.asarray(d) + params.d0) * 1e-3 * math.sqrt(params.eps_med) / C0


def antenna_baseline(params=ForwardParams(), grid=GRID):
    f = grid.freqs
    x = (f - 0.5 * (grid.f_start + grid.f_stop)) / (0.5 * (grid.f_stop - grid.f_start))
    mag = params.base_level * (1 + params.base_slope * x + params.base_curve * x * x)
    return mag * np.exp(-2j * np.pi * f * params.feed_delay)


@dataclass(frozen=True, eq=False)
class ReflectionSignal:
    complex_values: np.ndarray
    antenna_index: int = 0
    grid: FrequencyGrid = GRID

    def __post_init__(self):
        v = np.asarray(self.complex_values, dtype=complex)
        if v.shape != (self.grid.n_points,):
            raise ValueError(f"signal must have {self.grid.n_points} samples")
        object.__setattr__(self, "complex_values", v)

    @property
    def magnitude(self):
        return np.abs(self.complex_values)


def _clean_signal(distance, antenna_index, params, grid, echo=True):
    f = grid.freqs
    fr = resonance_curve(distance, params) + 1e-3 * params.per_antenna_bias[antenna_index]
    q = dip_q(distance, params)
    dip = dip_depth(distance, params) / (1 + (2 * q * (f - fr) / fr) ** 2)
    s = antenna_baseline(params, grid) * (1 - dip)
    if echo:
        tau = echo_delay(distance, params)
        s = s + echo_gain(distance, params) * np.exp(-2j * np.pi * f * 1e9 * tau)
    return s


def synth_signal(distance, antenna_index, params=ForwardParams(), rng_seed=0, grid=GRID, echo=True):
    """One antenna's reflection coefficient for a scatterer ``distance`` mm away.

    ``echo=False`` drops the scatterer echo but keeps the loaded resonance,
    which is what a perfectly known clutter reference would contain.
    """
    if not D_MIN <= distance <= D_MAX:
        raise OutOfRange(f"distance {distance} mm outside [{D_MIN}, {D_MAX}]")
    s = _clean_signal(distance, antenna_index, params, grid, echo=echo)
    if params.noise_sigma > 0:
        rng = np.random.default_rng(rng_seed)
        noise = rng.standard_normal((2, grid.n_points)) * (params.noise_sigma / math.sqrt(2))
        s = s + noise[0] + 1j * noise[1]
    return ReflectionSignal(s, antenna_index, grid)


def empty_reference(antenna_index, params=ForwardParams(), grid=GRID):
    """Noise-free response with nothing in the imaging domain.

    An unloaded antenna sits at the far end of the resonance curve with no echo.
    """
    return ReflectionSignal(_clean_signal(D_MAX, antenna_index, params, grid, echo=False), antenna_index, grid)


def resonance_calibration(params=ForwardParams(), step=0.1):
    """Dense (distance mm, resonance GHz) table over [0, 40] mm."""
    n = int(round((D_MAX - D_MIN) / step)) + 1
    d = np.linspace(D_MIN, D_MAX, n)
    return np.column_stack([d, resonance_curve(d, params)])


@dataclass(frozen=True)
class Pose:
    dx: float
    dy: float
    rotation: float  # degrees


@dataclass(frozen=True)
class PoseRanges:
    dx: tuple = (-4.0, 4.0)
    dy: tuple = (-4.0, 4.0)
    rotation: tuple = (0.0, 360.0)
    envelope: tuple = TRAINING_ENVELOPE


@dataclass(eq=False)
class Measurement:
    """Sixteen reflection signals of one phantom pose."""

    values: np.ndarray  # (16, n_freq) complex
    pose: Pose
    labels: NormalLengths | None = None
    phantom_id: str = ""
    measurement_id: int = 0
    grid: FrequencyGrid = GRID

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (N_ANTENNAS, self.grid.n_points):
            raise ValueError(f"measurement needs {N_ANTENNAS}x{self.grid.n_points} samples")

    @property
    def signals(self):
        return [ReflectionSignal(self.values[i], i, self.grid) for i in range(N_ANTENNAS)]

    @property
    def labeled(self):
        return self.labels is not None


def pose_boundary(phantom, pose):
    return phantom.transformed(pose.rotation, (pose.dx, pose.dy))


def _sample_pose(rng, ranges):
    return Pose(
        float(rng.uniform(*ranges.dx)),
        float(rng.uniform(*ranges.dy)),
        float(rng.uniform(*ranges.rotation)),
    )


def synth_measurement(array, phantom, pose_index, ranges, params, rng_seed, grid=GRID, max_attempts=1000):
    ss = np.random.SeedSequence([rng_seed, pose_index])
    pose_seed, noise_seed = ss.spawn(2)
    rng = np.random.default_rng(pose_seed)
    lo, hi = ranges.envelope
    for _ in range(max_attempts):
        pose = _sample_pose(rng, ranges)
        shape = pose_boundary(phantom, pose)
        try:
            labels = cast_normals(array, shape)
        except (NoIntersection, DegenerateInput):
            continue
        v = labels.values
        if v.min() >= lo and v.max() <= hi:
            break
    else:
        raise PoseRejected(f"pose {pose_index}: no admissible pose after {max_attempts} attempts")
    seeds = np.random.SeedSequence(noise_seed.generate_state(1)[0]).generate_state(N_ANTENNAS + 1)
    sensed = v
    if params.footprint_sigma > 0:
        spread = np.clip(np.random.default_rng(seeds[-1]).standard_normal(N_ANTENNAS), -3, 3)
        sensed = np.clip(v + params.footprint_sigma * spread, D_MIN, D_MAX)
    values = np.stack(
        [synth_signal(float(sensed[i]), i, params, int(seeds[i]), grid).complex_values for i in range(N_ANTENNAS)]
    )
    return Measurement(values, pose, labels, getattr(phantom, "phantom_id", "phantom"), pose_index, grid)


def synth_dataset(array, phantom, n_poses, pose_ranges=PoseRanges(), params=ForwardParams(), rng_seed=0,
                  grid=GRID, phantom_id="phantom", workers=1):
    """Sample rigid poses of ``phantom`` inside the array and synthesise a measurement per pose.

    Every pose draws from its own seed derived from (rng_seed, pose_index), so
    ``workers > 1`` returns exactly what a serial run does.
    """
    def one(i):
        m = synth_measurement(array, phantom, i, pose_ranges, params, rng_seed, grid)
        m.phantom_id = phantom_id
        return m

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(one, range(n_poses)))
    return [one(i) for i in range(n_poses)]
