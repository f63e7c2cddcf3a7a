"""Per-antenna sample tables, measurement-level splits, label scaling and resampling."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLabels, UnlabeledMeasurement
from .forward import ReflectionSignal
from .geometry import N_ANTENNAS


class Mode(str, enum.Enum):
    MAGNITUDE = "magnitude"
    COMPLEX = "complex"


def signal_features(values, mode):
    """Real feature rows from complex signals of shape (..., n_freq)."""
    mode = Mode(mode)
    if mode is Mode.MAGNITUDE:
        return np.abs(values)
    return np.concatenate([values.real, values.imag], axis=-1)


@dataclass(frozen=True, eq=False)
class SampleTable:
    inputs: np.ndarray  # (n, 451) or (n, 902)
    labels: np.ndarray  # (n,) mm
    measurement_ids: np.ndarray  # (n,)
    antenna_indices: np.ndarray  # (n,)
    mode: Mode = Mode.MAGNITUDE

    def __post_init__(self):
        n = len(self.inputs)
        if not (len(self.labels) == len(self.measurement_ids) == len(self.antenna_indices) == n):
            raise ValueError("sample table columns are not index-aligned")
        for name in ("inputs", "labels", "measurement_ids", "antenna_indices"):
            getattr(self, name).setflags(write=False)

    def __len__(self):
        return len(self.labels)

    def take(self, rows):
        return SampleTable(
            self.inputs[rows], self.labels[rows], self.measurement_ids[rows], self.antenna_indices[rows], self.mode
        )

    def measurements(self):
        return np.unique(self.measurement_ids)


def flatten(measurements, mode=Mode.MAGNITUDE):
    """One row per (measurement, antenna)."""
    mode = Mode(mode)
    if not measurements:
        width = 451 if mode is Mode.MAGNITUDE else 902
        return SampleTable(np.empty((0, width)), np.empty(0), np.empty(0, int), np.empty(0, int), mode)
    rows, labels, mids, ants = [], [], [], []
    for m in measurements:
        if m.labels is None:
            raise UnlabeledMeasurement(f"measurement {m.measurement_id} has no labels")
        rows.append(signal_features(m.values, mode))
        labels.append(m.labels.values)
        mids.append(np.full(N_ANTENNAS, m.measurement_id))
        ants.append(np.arange(N_ANTENNAS))
    return SampleTable(
        np.vstack(rows), np.concatenate(labels), np.concatenate(mids), np.concatenate(ants), mode
    )


def split(table, test_fraction=0.2, seed=0):
    """Partition by measurement id so the 16 antennas of a pose stay together.

    The test side holds round-half-up(test_fraction * n_measurements) poses.
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie in (0, 1)")
    ids = table.measurements()
    n_test = int(math.floor(test_fraction * len(ids) + 0.5))
    rng = np.random.default_rng(seed)
    test_ids = rng.permutation(ids)[:n_test]
    is_test = np.isin(table.measurement_ids, test_ids)
    return table.take(np.flatnonzero(~is_test)), table.take(np.flatnonzero(is_test))


@dataclass(frozen=True)
class LabelScaler:
    mean: float
    std: float

    def __post_init__(self):
        if not self.std > 0:
            raise DegenerateLabels("label standard deviation must be positive")

    def apply(self, x):
        return (np.asarray(x, dtype=float) - self.mean) / self.std

    def invert(self, z):
        return np.asarray(z, dtype=float) * self.std + self.mean


def fit_scaler(labels):
    """Population mean/std of the (training) labels."""
    y = np.asarray(labels, dtype=float)
    if y.size < 2 or np.all(y == y[0]):
        raise DegenerateLabels("need at least two distinct labels")
    return LabelScaler(float(y.mean()), float(y.std()))


def subsample_interp(signal, factor=8):
    """Keep every ``factor``-th sample then rebuild the full grid by linear interpolation.

    The last sample is always kept as well, so both band edges survive.
    """
    v = signal.complex_values if isinstance(signal, ReflectionSignal) else np.asarray(signal)
    n = v.shape[-1]
    keep = np.arange(0, n, factor)
    if keep[-1] != n - 1:
        keep = np.append(keep, n - 1)
    x = np.arange(n)
    if np.iscomplexobj(v):
        out = np.interp(x, keep, v.real[keep]) + 1j * np.interp(x, keep, v.imag[keep])
    else:
        out = np.interp(x, keep, v[keep])
    if isinstance(signal, ReflectionSignal):
        return ReflectionSignal(out, signal.antenna_index, signal.grid)
    return out


def subsample_measurement_values(values, factor=8):
    return np.stack([subsample_interp(row, factor) for row in values])
