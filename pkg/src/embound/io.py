"""Readers and writers for the on-disk formats.

Every text artifact starts with provenance (tool version, config hash, seed):
CSV files carry it in leading ``#`` comment lines, JSON documents in a
``provenance`` object. Floats are written with ``repr`` so that files round
trip exactly and identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
from pathlib import Path

import numpy as np

from . import __version__
from .errors import GridMismatch
from .forward import FrequencyGrid, ForwardParams, Measurement, Pose
from .geometry import N_ANTENNAS, AntennaArray, Boundary, NormalLengths, Source
from .regressor import MlpModel


def provenance(config_hash="", seed=None, **extra):
    out = {"tool": "embound", "version": __version__, "config_hash": config_hash}
    if seed is not None:
        out["seed"] = int(seed)
    out.update(extra)
    return out


def file_hash(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _dump_json(obj):
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _comment_lines(prov):
    return "".join(f"# {k}: {prov[k]}\n" for k in sorted(prov))


def _read_csv_rows(path):
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def write_csv(path, header, rows, prov=None):
    buf = _io.StringIO()
    if prov:
        buf.write(_comment_lines(prov))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for v in r])
    Path(path).write_text(buf.getvalue())


# antenna layout ---------------------------------------------------------------


def write_array(path, array, prov=None):
    rows = [(*map(float, a), *map(float, n)) for a, n in zip(array.apertures, array.inward_normals)]
    write_csv(path, ["x_mm", "y_mm", "nx", "ny"], rows, prov)


def read_array(path, array_id=None):
    rows = _read_csv_rows(path)
    data = np.array([[float(r[k]) for k in ("x_mm", "y_mm", "nx", "ny")] for r in rows])
    if data.shape != (N_ANTENNAS, 4):
        raise ValueError(f"array layout needs {N_ANTENNAS} rows of x_mm, y_mm, nx, ny")
    return AntennaArray(data[:, :2], data[:, 2:], array_id or Path(path).stem)


# boundaries -------------------------------------------------------------------


def write_boundaries(path, boundaries, prov=None, case_ids=None):
    """Several boundaries in one CSV, told apart by ``case`` and ``source``."""
    rows = []
    for k, b in enumerate(boundaries):
        case = k if case_ids is None else case_ids[k]
        rows.extend((case, b.source.value, float(x), float(y)) for x, y in b.points)
    write_csv(path, ["case", "source", "x_mm", "y_mm"], rows, prov)


def read_boundaries(path):
    """Dict keyed by (case, source) of Boundary objects, in file order."""
    groups = {}
    for r in _read_csv_rows(path):
        groups.setdefault((r["case"], r["source"]), []).append((float(r["x_mm"]), float(r["y_mm"])))
    return {k: Boundary(np.array(v), Source(k[1]), check=False) for k, v in groups.items()}


# datasets ---------------------------------------------------------------------


def header_path(path):
    return Path(str(path) + ".header.json")


def _record(m):
    return {
        "measurement_id": int(m.measurement_id),
        "phantom_id": m.phantom_id,
        "pose": {"dx": float(m.pose.dx), "dy": float(m.pose.dy), "rotation": float(m.pose.rotation)},
        "labels": None if m.labels is None else [float(v) for v in m.labels.values],
        "values": np.stack([m.values.real, m.values.imag], axis=-1).reshape(-1, 2).tolist(),
    }


def write_dataset(path, measurements, header):
    """JSON-lines records plus a sidecar ``<path>.header.json``.

    ``header`` must hold at least ``grid`` (a FrequencyGrid) and ``params``
    (ForwardParams); anything else is stored verbatim.
    """
    grid, params = header["grid"], header["params"]
    with open(path, "w") as fh:
        for m in measurements:
            if m.grid != grid:
                raise GridMismatch("measurement grid differs from the dataset header grid")
            fh.write(json.dumps(_record(m), sort_keys=True) + "\n")
    side = {k: v for k, v in header.items() if k not in ("grid", "params")}
    side.update(
        grid={"f_start": grid.f_start, "f_stop": grid.f_stop, "n_points": grid.n_points, "checksum": grid.checksum()},
        params=params.to_dict(),
        params_hash=params.hash(),
        n_measurements=len(measurements),
    )
    header_path(path).write_text(_dump_json(side))


def read_header(path):
    h = json.loads(header_path(path).read_text())
    g = h["grid"]
    grid = FrequencyGrid(g["f_start"], g["f_stop"], g["n_points"])
    if "checksum" in g and g["checksum"] != grid.checksum():
        raise GridMismatch("dataset header grid checksum does not match its parameters")
    h["grid"] = grid
    h["params"] = ForwardParams.from_dict(h["params"])
    return h


def read_dataset(path):
    """(measurements, header) from a dataset file and its sidecar."""
    header = read_header(path)
    grid = header["grid"]
    out = []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            r = json.loads(line)
            pairs = np.asarray(r["values"], dtype=float).reshape(N_ANTENNAS, grid.n_points, 2)
            labels = None if r.get("labels") is None else NormalLengths(r["labels"])
            p = r["pose"]
            out.append(Measurement(pairs[..., 0] + 1j * pairs[..., 1], Pose(p["dx"], p["dy"], p["rotation"]),
                                   labels, r.get("phantom_id", ""), int(r["measurement_id"]), grid))
    return out, header


# checkpoints ------------------------------------------------------------------


def write_checkpoint(path, model, grid, dataset_hash="", prov=None):
    doc = model.to_dict()
    doc["grid"] = {"f_start": grid.f_start, "f_stop": grid.f_stop, "n_points": grid.n_points,
                   "checksum": grid.checksum()}
    doc["dataset_hash"] = dataset_hash
    doc["provenance"] = prov or provenance(model.meta.get("config_hash", ""))
    Path(path).write_text(_dump_json(doc))


def read_checkpoint(path):
    """(model, checkpoint grid, raw document)."""
    doc = json.loads(Path(path).read_text())
    g = doc["grid"]
    grid = FrequencyGrid(g["f_start"], g["f_stop"], g["n_points"])
    return MlpModel.from_dict(doc), grid, doc


def check_grid(model_grid, data_grid):
    if model_grid.checksum() != data_grid.checksum():
        raise GridMismatch(
            f"checkpoint grid {model_grid.checksum()} does not match data grid {data_grid.checksum()}"
        )


def write_history(path, history, prov=None, label=None):
    """Per-epoch loss rows; ``label`` adds a leading column (e.g. the input mode)."""
    if label is None:
        write_csv(path, ["epoch", "train_mse", "test_mse"], history, prov)
    else:
        write_csv(path, ["mode", "epoch", "train_mse", "test_mse"], [(label, *r) for r in history], prov)


__all__ = [
    "check_grid",
    "file_hash",
    "header_path",
    "provenance",
    "read_array",
    "read_boundaries",
    "read_checkpoint",
    "read_dataset",
    "read_header",
    "write_array",
    "write_boundaries",
    "write_checkpoint",
    "write_csv",
    "write_dataset",
    "write_history",
]
