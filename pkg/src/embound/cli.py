"""Command-line entry point: generate, train, grid, infer, evaluate, robustness.

Settings resolve as command-line flag, then the JSON config file given with
``--config``, then the built-in default. The seed additionally falls back to
the ``EMBOUND_SEED`` environment variable before the default of 0.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import __version__
from . import baselines as bl
from . import forward as fw
from . import io as eio
from . import metrics as mt
from . import svg
from .dataset import Mode, fit_scaler, flatten, split, subsample_measurement_values
from .errors import EmboundError, NonFiniteLoss
from .geometry import NORMAL_BOUND, AntennaArray, Source, ellipse, landing_points, spline_close, superellipse
from .regressor import (Arch, TrainConfig, fit_pca, fit_pipeline, hyperparam_grid, model_features, predict_lengths,
                        predict_measurement)

log = logging.getLogger("embound")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# configuration ----------------------------------------------------------------


def load_config(path):
    if path is None:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    return cfg


def pick(flag, cfg, key, default):
    """flag > config > default; nested keys use dots, e.g. ``train.epochs``."""
    if flag is not None:
        return flag
    node = cfg
    for part in key.split("."):
        if not isinstance(node, dict) or part not in node:
            return default
        node = node[part]
    return node


def resolve_seed(flag, cfg):
    if flag is not None:
        return int(flag)
    if "seed" in cfg:
        return int(cfg["seed"])
    env = os.environ.get("EMBOUND_SEED")
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"EMBOUND_SEED must be an integer, got {env!r}") from exc
    return 0


def config_hash(obj):
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()[:16]


def parse_phantom(text):
    """``ellipse:A,B`` or ``superellipse:A,B,P`` (semi-axes in mm)."""
    kind, _, rest = text.partition(":")
    try:
        vals = [float(v) for v in rest.split(",")] if rest else []
    except ValueError as exc:
        raise UsageError(f"bad phantom spec {text!r}") from exc
    if kind == "ellipse" and len(vals) in (0, 2):
        return ellipse(*(vals or [107.0, 99.0]))
    if kind == "superellipse" and len(vals) in (0, 2, 3):
        return superellipse(*(vals or [104.0, 97.0, 2.5]))
    raise UsageError(f"bad phantom spec {text!r}; use ellipse:A,B or superellipse:A,B,P")


def parse_int_list(text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc


def parse_grid_spec(text):
    """``widths=5,10,20 depths=2,4`` -> ([5, 10, 20], [2, 4])."""
    parts = dict(p.split("=", 1) for p in text.split() if "=" in p)
    if "widths" not in parts or "depths" not in parts:
        raise UsageError("grid spec needs widths=... and depths=...")
    return parse_int_list(parts["widths"]), parse_int_list(parts["depths"])


def forward_params(args, cfg):
    preset = pick(getattr(args, "preset", None), cfg, "forward.preset", "phantom")
    overrides = {k: v for k, v in cfg.get("forward", {}).items() if k != "preset"}
    known = {f.name for f in fields(fw.ForwardParams)}
    bad = set(overrides) - known
    if bad:
        raise UsageError(f"unknown forward-model settings: {sorted(bad)}")
    if getattr(args, "noise", None) is not None:
        overrides["noise_sigma"] = args.noise
    if preset == "clinical":
        return fw.ForwardParams.clinical_like(**overrides)
    if preset != "phantom":
        raise UsageError(f"unknown preset {preset!r}")
    return fw.ForwardParams(**overrides)


def train_config(args, cfg, seed):
    return TrainConfig(
        epochs=int(pick(args.epochs, cfg, "train.epochs", 100)),
        batch_size=int(pick(args.batch_size, cfg, "train.batch_size", 32)),
        learning_rate=float(pick(args.lr, cfg, "train.learning_rate", 0.001)),
        seed=seed,
    )


def _labeled(measurements):
    return [m for m in measurements if m.labeled]


def _stack(measurements):
    if not measurements:
        return np.empty((0, fw.GRID.n_points), dtype=complex)
    return np.concatenate([m.values for m in measurements])


def _array_from_header(header):
    a = header.get("array")
    if a is None:
        return AntennaArray.ring()
    return AntennaArray(np.asarray(a["apertures"]), np.asarray(a["inward_normals"]), a.get("array_id", "array"))


# commands ---------------------------------------------------------------------


def cmd_generate(args, cfg):
    seed = resolve_seed(args.seed, cfg)
    params = forward_params(args, cfg)
    n_poses = int(pick(args.n_poses, cfg, "generate.n_poses", 444))
    phantom_text = pick(args.phantom, cfg, "generate.phantom", "ellipse:107,99")
    phantom = parse_phantom(phantom_text)
    offset = float(pick(args.offset, cfg, "generate.offset", 4.0))
    env = pick(args.envelope, cfg, "generate.envelope", list(fw.TRAINING_ENVELOPE))
    ranges = fw.PoseRanges((-offset, offset), (-offset, offset), (0.0, 360.0), tuple(float(v) for v in env))
    array = eio.read_array(args.array) if args.array else AntennaArray.ring()
    workers = int(pick(args.workers, cfg, "generate.workers", 1))
    run = {"command": "generate", "params_hash": params.hash(), "n_poses": n_poses, "phantom": phantom_text,
           "ranges": asdict(ranges), "seed": seed, "array": array.array_id}
    chash = config_hash(run)
    ms = fw.synth_dataset(array, phantom, n_poses, ranges, params, seed, phantom_id=phantom_text, workers=workers)
    header = {
        "grid": fw.GRID,
        "params": params,
        "provenance": eio.provenance(chash, seed),
        "pose_ranges": asdict(ranges),
        "phantom": {"spec": phantom_text, "outline": phantom.points.tolist()},
        "array": {"array_id": array.array_id, "apertures": array.apertures.tolist(),
                  "inward_normals": array.inward_normals.tolist()},
    }
    eio.write_dataset(args.out, ms, header)
    print(f"wrote {len(ms)} measurements to {args.out} (params {params.hash()}, seed {seed})")
    return EXIT_OK


def _split_values(measurements, test_fraction, seed):
    table = flatten(measurements)
    tr, te = split(table, test_fraction, seed)
    values = _stack(measurements)
    itr = np.flatnonzero(np.isin(table.measurement_ids, tr.measurements()))
    ite = np.flatnonzero(np.isin(table.measurement_ids, te.measurements()))
    return values, table.labels, itr, ite


def cmd_train(args, cfg):
    seed = resolve_seed(args.seed, cfg)
    tc = train_config(args, cfg, seed)
    arch = Arch(int(pick(args.width, cfg, "train.width", 10)), int(pick(args.depth, cfg, "train.depth", 4)))
    mode = Mode(pick(args.mode, cfg, "train.mode", "magnitude"))
    k = int(pick(args.k, cfg, "train.k", 10))
    test_fraction = float(pick(args.test_fraction, cfg, "train.test_fraction", 0.2))
    ms, header = eio.read_dataset(args.data)
    ms = _labeled(ms)
    if not ms:
        raise EmboundError("dataset holds no labeled measurements")
    aux = None
    aux_path = pick(args.aux, cfg, "train.aux", None)
    if aux_path:
        aux_ms, aux_header = eio.read_dataset(aux_path)
        eio.check_grid(header["grid"], aux_header["grid"])
        aux = _stack(aux_ms)
    values, labels, itr, ite = _split_values(ms, test_fraction, seed)
    run = {"command": "train", "train": asdict(tc), "arch": asdict(arch), "mode": mode.value, "k": k,
           "test_fraction": test_fraction, "aux": bool(aux_path), "seed": seed}
    dhash = eio.file_hash(args.data)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)

    grid_spec = pick(args.grid, cfg, "train.grid", None)
    if grid_spec:
        widths, depths = parse_grid_spec(grid_spec)
        return _run_grid(widths, depths, values, labels, itr, ite, tc, mode, k, aux, seed, out.with_suffix(".grid.csv"),
                         run)

    modes = [mode] + ([m for m in Mode if m is not mode] if args.compare_dtype else [])
    histories = {}
    for m in modes:
        model, hist = fit_pipeline(values[itr], labels[itr], tc, arch, m, values[ite], labels[ite], k, aux)
        histories[m.value] = hist
        if m is mode:
            chash = config_hash(run)
            model.meta.update({"run_hash": chash, "seed": seed, "params_hash": header["params"].hash()})
            eio.write_checkpoint(out, model, header["grid"], dhash, eio.provenance(chash, seed, dataset_hash=dhash))
    chash = config_hash(run)
    prov = eio.provenance(chash, seed)
    hist_path = Path(args.history) if args.history else out.with_suffix(".loss.csv")
    rows = [(name, *r) for name, hist in histories.items() for r in hist]
    eio.write_csv(hist_path, ["mode", "epoch", "train_mse", "test_mse"], rows, prov)
    series = []
    for name, hist in histories.items():
        ep = [r[0] for r in hist]
        series.append((f"{name} train", ep, [r[1] for r in hist]))
        series.append((f"{name} test", ep, [r[2] for r in hist]))
    plot_path = Path(args.plot) if args.plot else out.with_suffix(".loss.svg")
    plot_path.write_text(svg.line_plot(series, "training loss (standardised MSE)", "epoch", "MSE", logy=True,
                                       prov=prov))
    last = {name: hist[-1] for name, hist in histories.items()}
    for name, (ep, trm, tem) in last.items():
        print(f"{name}: epoch {ep} train MSE {trm:.5g} test MSE {tem:.5g}")
    print(f"wrote checkpoint {out}")
    return EXIT_OK


def _run_grid(widths, depths, values, labels, itr, ite, tc, mode, k, aux, seed, out, run):
    pcas = fit_pca(values[itr], mode, k, aux, seed=seed)
    scaler = fit_scaler(labels[itr])
    x, xt = model_features(pcas, values[itr], mode), model_features(pcas, values[ite], mode)
    loss, counts = hyperparam_grid(widths, depths, x, scaler.apply(labels[itr]), xt, scaler.apply(labels[ite]), tc,
                                   mode)
    prov = eio.provenance(config_hash({**run, "widths": widths, "depths": depths}), seed)
    rows = [(w, d, int(counts[i, j]), float(loss[i, j])) for i, w in enumerate(widths) for j, d in enumerate(depths)]
    eio.write_csv(out, ["width", "depth", "n_params", "test_mse"], rows, prov)
    svg_path = Path(out).with_suffix(".svg")
    series = [(f"depth {d}", [float(w) for w in widths], [float(loss[i, j]) for i in range(len(widths))])
              for j, d in enumerate(depths)]
    svg_path.write_text(svg.line_plot(series, "final test MSE by layer width", "width", "test MSE", logy=True,
                                      prov=prov))
    for r in rows:
        print("width {} depth {} params {} test MSE {:.5g}".format(*r))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_grid(args, cfg):
    seed = resolve_seed(args.seed, cfg)
    tc = train_config(args, cfg, seed)
    mode = Mode(pick(args.mode, cfg, "train.mode", "magnitude"))
    k = int(pick(args.k, cfg, "train.k", 10))
    widths = parse_int_list(pick(args.widths, cfg, "grid.widths", "5,10,20"))
    depths = parse_int_list(pick(args.depths, cfg, "grid.depths", "2,4"))
    ms, _ = eio.read_dataset(args.data)
    ms = _labeled(ms)
    if not ms:
        raise EmboundError("dataset holds no labeled measurements")
    values, labels, itr, ite = _split_values(ms, float(pick(args.test_fraction, cfg, "train.test_fraction", 0.2)), seed)
    run = {"command": "grid", "train": asdict(tc), "mode": mode.value, "k": k, "seed": seed}
    return _run_grid(widths, depths, values, labels, itr, ite, tc, mode, k, None, seed, Path(args.out), run)


def _load_pair(args):
    model, mgrid, doc = eio.read_checkpoint(args.checkpoint)
    ms, header = eio.read_dataset(args.data)
    eio.check_grid(mgrid, header["grid"])
    return model, doc, ms, header


def cmd_infer(args, cfg):
    model, doc, ms, header = _load_pair(args)
    array = _array_from_header(header)
    seed = int(doc.get("provenance", {}).get("seed", 0))
    n_out = int(pick(args.n_out, cfg, "infer.n_out", 360))
    prov = eio.provenance(config_hash({"command": "infer", "checkpoint": eio.file_hash(args.checkpoint),
                                       "data": eio.file_hash(args.data), "n_out": n_out}), seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    curves, ids, rows = [], [], []
    labeled = all(m.labeled for m in ms)
    for m in ms:
        pred = predict_measurement(model, m)
        pts = landing_points(array, pred)
        b = spline_close(pts, n_out=n_out, source=Source.PREDICTED)
        curves.append(b)
        ids.append(m.measurement_id)
        truth = None
        if m.labeled:
            truth = spline_close(landing_points(array, m.labels), n_out=n_out, source=Source.GROUND_TRUTH)
            curves.append(truth)
            ids.append(m.measurement_id)
        for i in range(len(pred.values)):
            row = [m.measurement_id, i, float(pred.values[i])]
            if labeled:
                row += [float(m.labels.values[i]), float(abs(pred.values[i] - m.labels.values[i]))]
            rows.append(row)
        if len(ids) <= 2 * args.max_svg:
            layers = [("prediction", b.points)] + ([("ground truth", truth.points)] if truth is not None else [])
            (out / f"case_{m.measurement_id}.svg").write_text(
                svg.overlay(layers, array.apertures, f"measurement {m.measurement_id}", prov))
    eio.write_boundaries(out / "boundaries.csv", curves, prov, ids)
    head = ["case", "antenna", "predicted_mm"] + (["label_mm", "abs_error_mm"] if labeled else [])
    eio.write_csv(out / "normals.csv", head, rows, prov)
    if labeled:
        print(f"mean absolute normal error {np.mean([r[4] for r in rows]):.4f} mm over {len(rows)} antennas")
    print(f"wrote {len(ms)} predicted boundaries to {out}")
    return EXIT_OK


REPORT_METHODS = ("nn", "resh", "mf")
REPORT_FIELDS = ("hu", "hu_x100", "hu_skipped", "area_pct", "length_pct", "max_dev_mm")


def evaluate_measurements(model, ms, params, array, methods=REPORT_METHODS, n_out=360, raster=mt.RasterConfig()):
    """Per-case shape scores; a method that cannot close a boundary yields None."""
    calib = bl.ResonanceCalibration.from_params(params)
    refs = [fw.empty_reference(i, params, ms[0].grid) for i in range(len(array.apertures))] if ms else []
    out = []
    for m in ms:
        truth = spline_close(landing_points(array, m.labels), n_out=n_out, source=Source.GROUND_TRUTH)
        h_truth = mt.hu_moments(truth, raster)
        case = {"case": m.measurement_id}
        estimates = {}
        if "nn" in methods:
            estimates["nn"] = predict_measurement(model, m).values
        if "resh" in methods:
            estimates["resh"] = bl.resonance_estimates(m, calib)
        if "mf" in methods:
            estimates["mf"] = bl.matched_filter_estimates(m, refs, params.eps_med, params.d0)
        for name, est in estimates.items():
            usable = int(np.sum(np.isfinite(est) & (est >= 0) & (est <= NORMAL_BOUND)))
            case[f"{name}_missing"] = len(est) - usable
            try:
                if name == "nn":
                    b = spline_close(landing_points(array, est), n_out=n_out, source=Source.PREDICTED)
                else:
                    b = bl.baseline_boundary(est, array, n_out)
                hu = mt.hu_distance(h_truth, mt.hu_moments(b, raster))
                al = mt.rigid_align(truth, b)
                case[name] = {"hu": hu.raw, "hu_x100": hu.scaled, "hu_skipped": hu.skipped,
                              "area_pct": mt.area_change(truth, b), "length_pct": mt.length_change(truth, b),
                              "max_dev_mm": mt.max_deviation(truth, al.aligned)}
            except EmboundError as exc:
                log.info("case %s: %s boundary unavailable (%s)", m.measurement_id, name, exc)
                case[name] = None
        out.append(case)
    return out


def report_rows(cases, methods=REPORT_METHODS):
    header = ["case"] + [f"{f}_{m}" for f in REPORT_FIELDS for m in methods] + [f"missing_{m}" for m in methods]
    rows = []
    for c in cases:
        row = [c["case"]]
        for f in REPORT_FIELDS:
            for m in methods:
                row.append(None if c.get(m) is None else c[m][f])
        row += [c.get(f"{m}_missing") for m in methods]
        rows.append(row)
    footer = []
    for stat, fn in (("min", np.min), ("max", np.max), ("mean", np.mean)):
        row = [stat]
        for col in range(1, len(header)):
            vals = [r[col] for r in rows if r[col] is not None]
            row.append(float(fn(vals)) if vals else None)
        footer.append(row)
    return header, rows, footer


def cmd_evaluate(args, cfg):
    model, doc, ms, header = _load_pair(args)
    ms = _labeled(ms)
    if not ms:
        raise EmboundError("evaluation needs a labeled, non-empty dataset")
    if args.limit:
        ms = ms[: args.limit]
    methods = ("nn",) if args.no_baselines else REPORT_METHODS
    cases = evaluate_measurements(model, ms, header["params"], _array_from_header(header), methods)
    head, rows, footer = report_rows(cases, methods)
    seed = int(doc.get("provenance", {}).get("seed", 0))
    prov = eio.provenance(config_hash({"command": "evaluate", "checkpoint": eio.file_hash(args.checkpoint),
                                       "data": eio.file_hash(args.data), "methods": methods,
                                       "limit": args.limit}), seed)
    eio.write_csv(args.out, head, rows + footer, prov)
    mean = dict(zip(head, footer[2]))
    for m in methods:
        cells = [f"{f}={mean[f + '_' + m]:.4g}" if mean[f + "_" + m] is not None else f"{f}=" for f in REPORT_FIELDS]
        print(f"mean {m}: " + " ".join(cells))
    print(f"wrote {args.out}")
    return EXIT_OK


def robustness_study(model, ms, params, factor=8):
    """Mean absolute errors before/after resolution loss, for the network and the resonance baseline."""
    labels = np.concatenate([m.labels.values for m in ms])
    values = _stack(ms)
    nn0 = float(np.mean(np.abs(predict_lengths(model, values) - labels)))
    nn1 = float(np.mean(np.abs(predict_lengths(model, subsample_measurement_values(values, factor)) - labels)))
    calib = bl.ResonanceCalibration.from_params(params)

    def resh(f):
        est = np.concatenate([bl.resonance_estimates(m, calib, factor=f) for m in ms])
        ok = np.isfinite(est)
        return float(np.mean(np.abs(est[ok] - labels[ok])))

    rs0, rs1 = resh(1), resh(factor)
    return {
        "nn": (nn0, nn1, 100.0 * (nn1 - nn0) / nn0),
        "resh": (rs0, rs1, 100.0 * (rs1 - rs0) / rs0),
    }


def cmd_robustness(args, cfg):
    model, doc, ms, header = _load_pair(args)
    ms = _labeled(ms)
    if not ms:
        raise EmboundError("robustness study needs a labeled, non-empty dataset")
    factor = int(pick(args.factor, cfg, "robustness.factor", 8))
    if factor < 1:
        raise UsageError("factor must be >= 1")
    res = robustness_study(model, ms, header["params"], factor)
    seed = int(doc.get("provenance", {}).get("seed", 0))
    prov = eio.provenance(config_hash({"command": "robustness", "checkpoint": eio.file_hash(args.checkpoint),
                                       "data": eio.file_hash(args.data), "factor": factor}), seed)
    rows = [(name, factor, *vals) for name, vals in res.items()]
    eio.write_csv(args.out, ["method", "factor", "mae_full_mm", "mae_reduced_mm", "relative_increase_pct"], rows, prov)
    for name, f, a, b, r in rows:
        print(f"{name}: MAE {a:.4f} -> {b:.4f} mm at 1/{f} resolution ({r:+.3f} %)")
    print(f"wrote {args.out}")
    return EXIT_OK


# parser -----------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="embound", description="Boundary estimation from antenna reflection data.")
    p.add_argument("--version", action="version", version=f"embound {__version__}")
    p.add_argument("--config", help="JSON config file (flags override it)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def seeded(sp):
        sp.add_argument("--seed", type=int, help="random seed (falls back to config, then EMBOUND_SEED, then 0)")

    g = sub.add_parser("generate", help="synthesise a labeled dataset")
    g.add_argument("--out", required=True)
    g.add_argument("--n-poses", type=int)
    g.add_argument("--phantom", help="ellipse:A,B or superellipse:A,B,P (default ellipse:107,99)")
    g.add_argument("--preset", choices=["phantom", "clinical"])
    g.add_argument("--noise", type=float, help="complex noise standard deviation")
    g.add_argument("--offset", type=float, help="max pose translation in mm (default 4)")
    g.add_argument("--envelope", type=float, nargs=2, metavar=("LO", "HI"), help="admissible normal lengths, mm")
    g.add_argument("--array", help="antenna layout CSV (x_mm, y_mm, nx, ny)")
    g.add_argument("--workers", type=int)
    seeded(g)

    def training(sp):
        sp.add_argument("--data", required=True)
        sp.add_argument("--mode", choices=[m.value for m in Mode])
        sp.add_argument("--epochs", type=int)
        sp.add_argument("--batch-size", type=int)
        sp.add_argument("--lr", type=float)
        sp.add_argument("--k", type=int, help="principal components per block")
        sp.add_argument("--test-fraction", type=float)
        seeded(sp)

    t = sub.add_parser("train", help="fit PCA and the regressor")
    training(t)
    t.add_argument("--out", required=True, help="checkpoint path (.json)")
    t.add_argument("--width", type=int)
    t.add_argument("--depth", type=int)
    t.add_argument("--aux", help="unlabeled out-of-domain dataset mixed into the PCA fit")
    t.add_argument("--compare-dtype", action="store_true", help="also train the other input mode for comparison")
    t.add_argument("--grid", help='hyperparameter sweep instead, e.g. "widths=5,10,20 depths=2,4"')
    t.add_argument("--history")
    t.add_argument("--plot")

    gr = sub.add_parser("grid", help="hyperparameter sweep over width and depth")
    training(gr)
    gr.add_argument("--widths")
    gr.add_argument("--depths")
    gr.add_argument("--out", required=True)

    i = sub.add_parser("infer", help="predict boundaries for a dataset")
    i.add_argument("--checkpoint", required=True)
    i.add_argument("--data", required=True)
    i.add_argument("--out-dir", required=True)
    i.add_argument("--n-out", type=int)
    i.add_argument("--max-svg", type=int, default=10, help="overlay plots for the first N measurements")

    e = sub.add_parser("evaluate", help="shape metrics for the network and the baselines")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--no-baselines", action="store_true")
    e.add_argument("--limit", type=int, help="only the first N measurements")

    r = sub.add_parser("robustness", help="error growth after frequency sub-sampling")
    r.add_argument("--checkpoint", required=True)
    r.add_argument("--data", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--factor", type=int)
    return p


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "grid": cmd_grid,
    "infer": cmd_infer,
    "evaluate": cmd_evaluate,
    "robustness": cmd_robustness,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"embound: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonFiniteLoss as exc:
        print(f"embound: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (EmboundError, OSError, ValueError, KeyError) as exc:
        print(f"embound: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
