"""Small fully-connected regressor from PCA scores to a normal length.

Training is plain mini-batch Adam on the mean squared error with no early
stopping and no weight penalty. All parameters sit in one flat float64
vector so the compiled kernels can run a whole epoch without returning to
Python.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._core import kernels
from .dataset import LabelScaler, Mode, fit_scaler, signal_features
from .dimred import PcaModel, pca_fit, pca_fit_mixed
from .errors import DimensionMismatch, NonFiniteLoss
from .geometry import NORMAL_BOUND, NormalLengths

log = logging.getLogger(__name__)

ALPHA = 0.2


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 0.001
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ValueError("epochs, batch_size and learning_rate must be positive")

    def hash(self):
        return hashlib.sha256(json.dumps(asdict(self), sort_keys=True).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Arch:
    width: int = 10
    depth: int = 4  # number of affine layers, output layer included

    def sizes(self, input_width, mode=Mode.MAGNITUDE):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.depth == 1:
            return [input_width, 1]
        if Mode(mode) is Mode.COMPLEX:
            # first hidden layer doubled in width
            return [input_width, 2 * self.width] + [self.width] * (self.depth - 2) + [1]
        return [input_width] + [self.width] * (self.depth - 1) + [1]


def param_count(sizes):
    return int(sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:])))


@dataclass(eq=False)
class MlpModel:
    sizes: list
    params: np.ndarray
    mode: Mode = Mode.MAGNITUDE
    alpha: float = ALPHA
    pcas: list = field(default_factory=list)
    scaler: LabelScaler | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.sizes = [int(s) for s in self.sizes]
        self.params = np.ascontiguousarray(self.params, dtype=np.float64)
        if self.sizes[-1] != 1:
            raise ValueError("final layer must have width 1")
        if len(self.params) != param_count(self.sizes):
            raise ValueError("parameter vector does not match layer sizes")
        self.mode = Mode(self.mode)

    @property
    def input_width(self):
        return self.sizes[0]

    @property
    def n_params(self):
        return param_count(self.sizes)

    @property
    def layers(self):
        """(weight, bias) views into the flat parameter vector."""
        out, off = [], 0
        for n_in, n_out in zip(self.sizes[:-1], self.sizes[1:]):
            w = self.params[off:off + n_in * n_out].reshape(n_out, n_in)
            off += n_in * n_out
            out.append((w, self.params[off:off + n_out]))
            off += n_out
        return out

    @classmethod
    def from_layers(cls, layers, **kw):
        sizes = [layers[0][0].shape[1]] + [w.shape[0] for w, _ in layers]
        flat = np.concatenate([np.concatenate([np.ravel(w), np.ravel(b)]) for w, b in layers])
        return cls(sizes, flat, **kw)

    def copy(self):
        return MlpModel(list(self.sizes), self.params.copy(), self.mode, self.alpha, self.pcas, self.scaler,
                        dict(self.meta))

    def features(self, values):
        """PCA scores for complex signals of shape (n, n_freq)."""
        values = np.atleast_2d(values)
        if self.mode is Mode.MAGNITUDE:
            return self.pcas[0].transform(np.abs(values))
        return np.hstack([self.pcas[0].transform(values.real), self.pcas[1].transform(values.imag)])

    def to_dict(self):
        return {
            "sizes": self.sizes,
            "mode": self.mode.value,
            "alpha": self.alpha,
            "n_params": self.n_params,
            "layers": [{"weight": w.tolist(), "bias": b.tolist()} for w, b in self.layers],
            "pca": [p.to_dict() for p in self.pcas],
            "scaler": None if self.scaler is None else {"mean": self.scaler.mean, "std": self.scaler.std},
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d):
        layers = [(np.asarray(l["weight"], float), np.asarray(l["bias"], float)) for l in d["layers"]]
        sc = d.get("scaler")
        return cls.from_layers(
            layers,
            mode=d["mode"],
            alpha=d.get("alpha", ALPHA),
            pcas=[PcaModel.from_dict(p) for p in d.get("pca", [])],
            scaler=None if sc is None else LabelScaler(sc["mean"], sc["std"]),
            meta=dict(d.get("meta", {})),
        )


def init_model(sizes, seed=0, mode=Mode.MAGNITUDE):
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(seed)
    layers = []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        lim = math.sqrt(6.0 / (n_in + n_out))
        layers.append((rng.uniform(-lim, lim, size=(n_out, n_in)), np.zeros(n_out)))
    return MlpModel.from_layers(layers, mode=mode)


def forward(model, scores):
    """Standardised prediction(s); accepts one score vector or a batch."""
    x = np.asarray(scores, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != model.input_width:
        raise DimensionMismatch(f"expected {model.input_width} inputs, got {x.shape[1]}")
    out = kernels.mlp_forward(model.params, np.asarray(model.sizes), x, model.alpha)
    return float(out[0]) if single else out


def loss_and_grad(model, x, y):
    """Batch MSE and its flat gradient (same layout as ``model.params``)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if len(y) == 0:
        raise ValueError("batch must be non-empty")
    return kernels.mlp_loss_grad(model.params, np.asarray(model.sizes), x, y, model.alpha)


def backward(model, x, y):
    """Gradients of the batch MSE as a list of (d_weight, d_bias) per layer."""
    _, g = loss_and_grad(model, x, y)
    probe = MlpModel(model.sizes, g, model.mode, model.alpha)
    return [(w.copy(), b.copy()) for w, b in probe.layers]


@dataclass(eq=False)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n), np.zeros(n), 0)


def adam_step(state, params, grads, config=TrainConfig()):
    """Bias-corrected Adam update applied to ``params`` in place."""
    state.step = int(
        kernels.adam_update(
            params, np.ascontiguousarray(grads, dtype=float), state.m, state.v, state.step,
            config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps,
        )
    )
    return params, state


def mse(model, x, y):
    if len(y) == 0:
        return float("nan")
    pred = kernels.mlp_forward(model.params, np.asarray(model.sizes), np.atleast_2d(x), model.alpha)
    return float(np.mean((pred - y) ** 2))


def epoch_order(n, seed, epoch):
    return np.random.default_rng(np.random.SeedSequence([seed, epoch])).permutation(n)


def train(x, y, config=TrainConfig(), arch=Arch(), x_test=None, y_test=None, mode=Mode.MAGNITUDE, model=None):
    """Fit an MLP on standardised labels; returns (model, history).

    ``history`` is a list of (epoch, train_mse, test_mse) rows measured after
    each epoch on the full sets.
    """
    x = np.ascontiguousarray(x, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    if model is None:
        model = init_model(arch.sizes(x.shape[1], mode), config.seed, mode)
    state = AdamState.zeros(model.n_params)
    sizes = np.asarray(model.sizes, dtype=np.int64)
    history = []
    for epoch in range(1, config.epochs + 1):
        order = epoch_order(len(y), config.seed, epoch)
        step, bad, loss = kernels.train_epoch(
            model.params, sizes, x, y, order, config.batch_size, model.alpha, state.m, state.v, state.step,
            config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps,
        )
        state.step = int(step)
        if bad >= 0:
            raise NonFiniteLoss(epoch, int(bad), loss)
        tr = mse(model, x, y)
        if not math.isfinite(tr):
            raise NonFiniteLoss(epoch, -1, tr)
        te = mse(model, x_test, y_test) if x_test is not None and len(x_test) else float("nan")
        history.append((epoch, tr, te))
    model.meta.update({"train_config": asdict(config), "config_hash": config.hash()})
    return model, history


def fit_pca(train_values, mode, k=10, aux_values=None, in_domain_target=2000, seed=0):
    """PCA model(s) for complex training signals; complex mode fits real and imaginary parts apart."""
    mode = Mode(mode)
    parts = [np.abs] if mode is Mode.MAGNITUDE else [np.real, np.imag]
    out = []
    for part in parts:
        rows = part(train_values)
        if aux_values is not None and len(aux_values):
            out.append(pca_fit_mixed(rows, part(aux_values), k, in_domain_target, seed))
        else:
            out.append(pca_fit(rows, k))
    return out


def fit_pipeline(train_values, train_labels, config=TrainConfig(), arch=Arch(), mode=Mode.MAGNITUDE,
                 test_values=None, test_labels=None, k=10, aux_values=None, in_domain_target=2000):
    """PCA, label scaling and training from per-antenna complex signals.

    The scaler and the PCA basis only ever see training rows (plus unlabeled
    auxiliary rows for the PCA, when given).
    """
    mode = Mode(mode)
    pcas = fit_pca(train_values, mode, k, aux_values, in_domain_target, config.seed)
    scaler = fit_scaler(train_labels)
    proto = MlpModel([1, 1], np.zeros(2), mode, pcas=pcas)
    x = proto.features(train_values)
    xt = proto.features(test_values) if test_values is not None and len(test_values) else None
    yt = scaler.apply(test_labels) if xt is not None else None
    model, history = train(x, scaler.apply(train_labels), config, arch, xt, yt, mode)
    model.pcas = pcas
    model.scaler = scaler
    model.meta["arch"] = asdict(arch)
    return model, history


def hyperparam_grid(widths, depths, x, y, x_test, y_test, config=TrainConfig(), mode=Mode.MAGNITUDE):
    """Final test MSE for every (width, depth) pair; rows follow ``widths``."""
    if not widths or not depths:
        raise ValueError("width and depth grids must be non-empty")
    loss = np.empty((len(widths), len(depths)))
    counts = np.empty((len(widths), len(depths)), dtype=int)
    for i, w in enumerate(widths):
        for j, d in enumerate(depths):
            model, hist = train(x, y, config, Arch(w, d), x_test, y_test, mode)
            loss[i, j] = hist[-1][2]
            counts[i, j] = model.n_params
    return loss, counts


def predict_lengths(model, values):
    """Unclamped mm-scale predictions for complex signals of shape (n, n_freq)."""
    z = kernels.mlp_forward(model.params, np.asarray(model.sizes), model.features(values), model.alpha)
    return model.scaler.invert(z)


def predict_measurement(model, measurement, values=None, bound=NORMAL_BOUND):
    """Sixteen normal lengths for one measurement, clamped to [0, bound] mm."""
    v = measurement.values if values is None else values
    raw = predict_lengths(model, v)
    clamped = np.clip(raw, 0.0, bound)
    n = int(np.sum(clamped != raw))
    if n:
        log.warning("clamped %d predicted normal length(s) to [0, %g] mm", n, bound)
    return NormalLengths(clamped, bound=bound)


def model_features(pcas, values, mode):
    return MlpModel([1, 1], np.zeros(2), mode, pcas=pcas).features(values)


__all__ = [
    "Arch",
    "MlpModel",
    "TrainConfig",
    "adam_step",
    "backward",
    "fit_pipeline",
    "forward",
    "hyperparam_grid",
    "init_model",
    "param_count",
    "predict_measurement",
    "signal_features",
    "train",
]
