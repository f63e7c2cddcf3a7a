"""Comparison estimators: resonance shift and matched-filter delay."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoPeak, NoResonance
from .forward import C0, FrequencyGrid, ReflectionSignal, resonance_calibration
from .geometry import N_ANTENNAS, NORMAL_BOUND, Source, landing_points, spline_close

REGIME_BOUNDS = (18.0, 30.0)
MATCH_TOL = 0.002  # GHz


@dataclass(frozen=True, eq=False)
class ResonanceCalibration:
    """Distance-to-resonance table, optionally with a fixed offset per antenna.

    Each antenna of a real array resonates slightly off the common curve; a
    calibration run records that offset so estimates can remove it.
    """

    table: np.ndarray  # (n, 2): distance mm, resonance GHz
    regime_bounds: tuple = REGIME_BOUNDS
    offsets: np.ndarray | None = None  # (16,) GHz

    @classmethod
    def from_params(cls, params, step=0.1, per_antenna=True):
        offsets = 1e-3 * np.asarray(params.per_antenna_bias) if per_antenna else None
        return cls(resonance_calibration(params, step), REGIME_BOUNDS, offsets)

    @property
    def distances(self):
        return self.table[:, 0]

    @property
    def resonances(self):
        return self.table[:, 1]

    def resonances_for(self, antenna_index=None):
        if self.offsets is None or antenna_index is None:
            return self.resonances
        return self.resonances + self.offsets[antenna_index]


@dataclass(frozen=True)
class CandidateSet:
    distances: tuple
    selected: int = 0

    @property
    def value(self):
        return self.distances[self.selected]


def parabolic_offset(y_minus, y0, y_plus):
    """Sub-bin offset of a 3-point parabola vertex, in units of the bin spacing."""
    den = y_minus - 2.0 * y0 + y_plus
    if den == 0:
        return 0.0
    return float(np.clip(0.5 * (y_minus - y_plus) / den, -0.5, 0.5))


def find_resonance(magnitude, freqs, refine=False):
    """Frequency of the |S11| minimum, optionally refined between grid points."""
    k = int(np.argmin(magnitude))
    if k == 0 or k == len(magnitude) - 1:
        raise NoResonance("magnitude minimum sits on a band edge")
    if not refine:
        return float(freqs[k])
    delta = parabolic_offset(magnitude[k - 1], magnitude[k], magnitude[k + 1])
    return float(freqs[k] + delta * (freqs[k + 1] - freqs[k]))


def calibration_preimages(resonance, calib, tol=MATCH_TOL, antenna_index=None):
    """Distances whose calibrated resonance matches ``resonance`` within ``tol`` GHz."""
    d, r = calib.distances, calib.resonances_for(antenna_index)
    diff = r - resonance
    found = []
    # sign changes give interpolated crossings
    for i in np.nonzero(np.sign(diff[:-1]) * np.sign(diff[1:]) < 0)[0]:
        w = diff[i] / (diff[i] - diff[i + 1])
        found.append((d[i] + w * (d[i + 1] - d[i]), 0.0))
    exact = np.nonzero(diff == 0)[0]
    found.extend((d[i], 0.0) for i in exact)
    # near-misses at turning points: closest approach of runs within tolerance
    inside = np.abs(diff) <= tol
    edges = np.flatnonzero(np.diff(np.concatenate([[0], inside.astype(np.int8), [0]])))
    for start, stop in zip(edges[::2], edges[1::2]):
        lo, hi = d[start], d[stop - 1]
        if any(lo - 1e-9 <= x <= hi + 1e-9 for x, _ in found):
            continue
        j = start + int(np.argmin(np.abs(diff[start:stop])))
        found.append((d[j], abs(diff[j])))
    found.sort(key=lambda t: t[1])
    found = found[:3]
    return sorted(x for x, _ in found)


def resonance_shift_estimate(signal, calib, tol=MATCH_TOL, refine=False):
    """Distance candidates from the frequency of the |S11| minimum.

    By default the minimum is read straight off the frequency grid, so the
    accuracy of the method is tied to the sweep resolution.
    """
    f = signal.grid.freqs
    res = find_resonance(np.abs(signal.complex_values), f, refine)
    cands = calibration_preimages(res, calib, tol, signal.antenna_index)
    if not cands:
        # outside the calibrated span: fall back to the nearest calibrated value
        j = int(np.argmin(np.abs(calib.resonances_for(signal.antenna_index) - res)))
        cands = [float(calib.distances[j])]
    first = [i for i, x in enumerate(cands) if x <= calib.regime_bounds[0]]
    return CandidateSet(tuple(float(x) for x in cands), first[0] if first else 0)


def coarsen(signal, factor):
    """Keep every ``factor``-th frequency sample, starting from the first."""
    g = signal.grid
    vals = signal.complex_values[::factor]
    n = len(vals)
    grid = FrequencyGrid(g.f_start, g.f_start + (n - 1) * factor * g.spacing, n)
    return ReflectionSignal(vals, signal.antenna_index, grid)


def resonance_resolution_study(signal, calib, subsample_factors, true_distance, refine=False):
    """Distance error of the default resonance candidate per grid coarsening factor."""
    rows = []
    for k in subsample_factors:
        if k < 1:
            raise ValueError("subsample factors must be >= 1")
        est = resonance_shift_estimate(coarsen(signal, int(k)), calib, refine=refine).value
        rows.append((int(k), est, abs(est - true_distance)))
    return rows


def time_profile(signal, reference, pad=16):
    """Hann-windowed, zero-padded inverse DFT of the background-subtracted signal."""
    diff = signal.complex_values - reference.complex_values
    n = len(diff)
    spec = np.zeros(pad * n, dtype=complex)
    spec[:n] = diff * np.hanning(n)
    prof = np.abs(np.fft.ifft(spec)) * pad
    dt = 1.0 / (pad * n * signal.grid.spacing * 1e9)
    return prof, dt


def matched_filter_delay(signal, reference, pad=16, gate=None):
    """Round-trip delay (s) of the strongest echo in the time profile.

    ``gate`` = (t_lo, t_hi) restricts the peak search to a delay window; the
    noise floor is still taken over all positive delays.
    """
    prof, dt = time_profile(signal, reference, pad)
    half = len(prof) // 2
    prof = prof[:half]  # positive delays only
    lo, hi = 0, half
    if gate is not None:
        lo = max(int(math.floor(gate[0] / dt)), 0)
        hi = min(int(math.ceil(gate[1] / dt)) + 1, half)
    k = lo + int(np.argmax(prof[lo:hi]))
    peak = prof[k]
    if peak == 0.0 or peak <= 3.0 * np.median(prof):
        raise NoPeak("time profile has no peak above the noise floor")
    delta = parabolic_offset(prof[k - 1], prof[k], prof[k + 1]) if 0 < k < half - 1 else 0.0
    return (k + delta) * dt


def _seconds_per_mm(eps_med):
    # round-trip delay added by one millimetre of one-way path
    return 2.0 * math.sqrt(eps_med) / C0 * 1e-3


def delay_to_distance(tau, eps_med=1.0, d0=5.0):
    """Aperture-to-scatterer distance (mm) for a round-trip delay ``tau`` (s)."""
    return tau / _seconds_per_mm(eps_med) - d0


def matched_filter_estimate(signal, reference, eps_med=1.0, d0=5.0, pad=16, max_distance=NORMAL_BOUND):
    """Distance (mm) to the first scatterer from the round-trip delay peak.

    Only delays that map to distances in [0, max_distance] mm are searched.
    """
    scale = _seconds_per_mm(eps_med)
    tau = matched_filter_delay(signal, reference, pad, gate=(d0 * scale, (max_distance + d0) * scale))
    return delay_to_distance(tau, eps_med, d0)


def baseline_boundary(estimates, array, n_out=360, bound=NORMAL_BOUND):
    """Spline through the landing points of the usable per-antenna estimates.

    ``estimates`` holds one distance per antenna; NaN marks a missing estimate
    and values outside [0, bound] mm are treated as outliers and dropped.
    """
    est = np.asarray(estimates, dtype=float)
    if est.shape != (N_ANTENNAS,):
        raise ValueError(f"need {N_ANTENNAS} estimates")
    ok = np.isfinite(est) & (est >= 0) & (est <= bound)
    pts = landing_points(array, np.where(ok, est, 0.0))[ok]
    return spline_close(pts, n_out=n_out, source=Source.BASELINE)


def resonance_estimates(measurement, calib, factor=1, refine=False):
    out = np.full(N_ANTENNAS, np.nan)
    for i, sig in enumerate(measurement.signals):
        try:
            out[i] = resonance_shift_estimate(coarsen(sig, factor), calib, refine=refine).value
        except NoResonance:
            pass
    return out


def matched_filter_estimates(measurement, references, eps_med=1.0, d0=5.0):
    out = np.full(N_ANTENNAS, np.nan)
    for i, sig in enumerate(measurement.signals):
        try:
            out[i] = matched_filter_estimate(sig, references[i], eps_med, d0)
        except NoPeak:
            pass
    return out


__all__ = [
    "CandidateSet",
    "ResonanceCalibration",
    "baseline_boundary",
    "calibration_preimages",
    "coarsen",
    "delay_to_distance",
    "find_resonance",
    "matched_filter_delay",
    "matched_filter_estimate",
    "matched_filter_estimates",
    "resonance_estimates",
    "resonance_resolution_study",
    "resonance_shift_estimate",
    "time_profile",
]
