"""Shared fixtures.

The trained pipelines are expensive enough (a few seconds each) that they are
built once per session and shared between the unit and acceptance tests.
"""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from embound import forward as fw
from embound import geometry as geo
from embound.dataset import flatten, split
from embound.regressor import TrainConfig, fit_pipeline

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

PHANTOM_AXES = (107.0, 99.0)
HEADLIKE = (104.0, 97.0, 2.5)


@pytest.fixture(scope="session")
def ring():
    return geo.AntennaArray.ring()


@pytest.fixture(scope="session")
def phantom():
    return geo.ellipse(*PHANTOM_AXES)


@pytest.fixture(scope="session")
def headlike():
    return geo.superellipse(*HEADLIKE)


class Pipeline:
    """A dataset, its measurement-level split and the model trained on it."""

    def __init__(self, params, ring, phantom, n_poses=444, seed=0, config=TrainConfig()):
        self.params = params
        self.measurements = fw.synth_dataset(ring, phantom, n_poses, params=params, rng_seed=seed)
        self.table = flatten(self.measurements)
        train, test = split(self.table, 0.2, seed)
        self.values = np.concatenate([m.values for m in self.measurements])
        self.train_rows = np.flatnonzero(np.isin(self.table.measurement_ids, train.measurements()))
        self.test_rows = np.flatnonzero(np.isin(self.table.measurement_ids, test.measurements()))
        self.model, self.history = fit_pipeline(
            self.values[self.train_rows], self.table.labels[self.train_rows], config,
            test_values=self.values[self.test_rows], test_labels=self.table.labels[self.test_rows],
        )

    @property
    def test_measurements(self):
        ids = set(self.table.measurement_ids[self.test_rows].tolist())
        return [m for m in self.measurements if m.measurement_id in ids]


@pytest.fixture(scope="session")
def pipeline(ring, phantom):
    """The reference training recipe on the default surrogate."""
    return Pipeline(fw.ForwardParams(), ring, phantom)


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda ln: int(ln.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
