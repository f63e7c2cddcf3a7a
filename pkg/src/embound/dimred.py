"""Principal component analysis via SVD of the centred data."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, RankDeficient


@dataclass(frozen=True, eq=False)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (k, d), orthonormal rows
    explained_variance: np.ndarray  # (k,), non-increasing
    meta: dict = field(default_factory=dict)

    @property
    def k(self):
        return self.components.shape[0]

    @property
    def dim(self):
        return self.components.shape[1]

    def transform(self, rows):
        return pca_transform(self, rows)

    def reconstruct(self, scores):
        return pca_reconstruct(self, scores)

    def to_dict(self):
        return {
            "mean": self.mean.tolist(),
            "components": self.components.tolist(),
            "explained_variance": self.explained_variance.tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            np.asarray(d["mean"], dtype=float),
            np.asarray(d["components"], dtype=float),
            np.asarray(d["explained_variance"], dtype=float),
            dict(d.get("meta", {})),
        )


def _fix_signs(vt):
    # largest-magnitude entry of every component made positive
    idx = np.argmax(np.abs(vt), axis=1)
    signs = np.sign(vt[np.arange(len(vt)), idx])
    signs[signs == 0] = 1.0
    return vt * signs[:, None]


def pca_fit(rows, k=10, allow_rank_deficient=False):
    """Top-k principal directions of ``rows`` (n samples by d features).

    Raises RankDeficient when the centred data has fewer than k nonzero
    singular values, unless ``allow_rank_deficient`` is set, in which case the
    surplus components span an arbitrary orthonormal complement.
    """
    x = np.asarray(rows, dtype=float)
    if x.ndim != 2:
        raise DimensionMismatch("rows must be a 2-D array")
    n, d = x.shape
    if k < 1 or k > min(n, d):
        raise ValueError(f"k={k} must lie in [1, min(n, d)] = [1, {min(n, d)}]")
    if not np.all(np.isfinite(x)):
        raise ValueError("rows must be finite")
    mean = x.mean(axis=0)
    xc = x - mean
    _, s, vt = np.linalg.svd(xc, full_matrices=False)
    tol = (s[0] if s.size else 0.0) * max(n, d) * np.finfo(float).eps
    usable = int(np.sum(s > tol))
    if usable < k and not allow_rank_deficient:
        raise RankDeficient(k, usable)
    var = s[:k] ** 2 / max(n - 1, 1)
    return PcaModel(mean, _fix_signs(vt[:k]), var, {"n_samples": n})


def _check_dim(model, arr):
    if arr.shape[-1] != model.dim:
        raise DimensionMismatch(f"expected rows of length {model.dim}, got {arr.shape[-1]}")


def pca_transform(model, rows):
    x = np.asarray(rows, dtype=float)
    _check_dim(model, x)
    return (x - model.mean) @ model.components.T


def pca_reconstruct(model, scores):
    z = np.asarray(scores, dtype=float)
    if z.shape[-1] != model.k:
        raise DimensionMismatch(f"expected {model.k} scores, got {z.shape[-1]}")
    return model.mean + z @ model.components


def recon_error(model, rows):
    """Mean over rows of the squared reconstruction residual, per element."""
    x = np.atleast_2d(np.asarray(rows, dtype=float))
    r = x - pca_reconstruct(model, pca_transform(model, x))
    return float(np.mean(np.sum(r * r, axis=1) / x.shape[1]))


def pca_fit_mixed(in_domain_rows, out_domain_rows, k=10, in_domain_target=2000, seed=0):
    """Fit on phantom rows topped up with out-of-domain (clinical-like) rows.

    ``in_domain_rows`` is subsampled without replacement to ``in_domain_target``
    rows when it is larger; ``None`` keeps all of it.
    """
    a = np.asarray(in_domain_rows, dtype=float)
    b = np.asarray(out_domain_rows, dtype=float)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("both row sets must be non-empty")
    if in_domain_target is not None and len(a) > in_domain_target:
        pick = np.sort(np.random.default_rng(seed).choice(len(a), in_domain_target, replace=False))
        a = a[pick]
    model = pca_fit(np.vstack([a, b]), k)
    model.meta.update({"n_in_domain": len(a), "n_out_domain": len(b), "mix_ratio": len(b) / (len(a) + len(b))})
    return model


def principal_angles(a, b):
    """Principal angles (degrees) between the row spaces of two component matrices."""
    qa, _ = np.linalg.qr(np.asarray(a).T)
    qb, _ = np.linalg.qr(np.asarray(b).T)
    s = np.clip(np.linalg.svd(qa.T @ qb, compute_uv=False), -1.0, 1.0)
    return np.degrees(np.arccos(s))
