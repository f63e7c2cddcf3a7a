"""Pure numpy implementations of the hot kernels.

Signatures match the compiled ``_kernels`` module exactly. Parameters of an
MLP live in one flat float64 vector: for every layer, the (out, in) weight
matrix in row-major order followed by its bias vector.
"""

import numpy as np


def _layers(params, sizes):
    out = []
    off = 0
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        w = params[off:off + n_in * n_out].reshape(n_out, n_in)
        off += n_in * n_out
        b = params[off:off + n_out]
        off += n_out
        out.append((w, b))
    return out


def mlp_forward(params, sizes, x, alpha):
    a = np.asarray(x, dtype=np.float64)
    layers = _layers(params, sizes)
    for k, (w, b) in enumerate(layers):
        z = a @ w.T + b
        a = z if k == len(layers) - 1 else np.where(z > 0, z, alpha * z)
    return a[:, 0].copy()


def mlp_loss_grad(params, sizes, x, y, alpha):
    """Mean squared error over the batch and its gradient w.r.t. ``params``."""
    layers = _layers(params, sizes)
    acts = [np.asarray(x, dtype=np.float64)]
    zs = []
    for k, (w, b) in enumerate(layers):
        z = acts[-1] @ w.T + b
        zs.append(z)
        acts.append(z if k == len(layers) - 1 else np.where(z > 0, z, alpha * z))
    n = len(y)
    err = acts[-1][:, 0] - y
    loss = float(np.mean(err * err))
    grad = np.empty_like(params)
    delta = (2.0 / n) * err[:, None]
    # walk the flat vector backwards, layer by layer
    off = len(params)
    for k in range(len(layers) - 1, -1, -1):
        w, _ = layers[k]
        n_out, n_in = w.shape
        grad[off - n_out:off] = delta.sum(axis=0)
        off -= n_out
        grad[off - n_out * n_in:off] = (delta.T @ acts[k]).ravel()
        off -= n_out * n_in
        if k > 0:
            delta = (delta @ w) * np.where(zs[k - 1] > 0, 1.0, alpha)
    return loss, grad


def adam_update(params, grads, m, v, step, lr, beta1, beta2, eps):
    """In-place bias-corrected Adam update; returns the new step count."""
    step += 1
    m *= beta1
    m += (1.0 - beta1) * grads
    v *= beta2
    v += (1.0 - beta2) * grads * grads
    mhat = m / (1.0 - beta1**step)
    vhat = v / (1.0 - beta2**step)
    params -= lr * mhat / (np.sqrt(vhat) + eps)
    return step


def train_epoch(params, sizes, x, y, order, batch_size, alpha, m, v, step, lr, beta1, beta2, eps):
    """One pass of shuffled mini-batch Adam; the last short batch is kept."""
    n = len(order)
    for start in range(0, n, batch_size):
        idx = order[start:start + batch_size]
        loss, g = mlp_loss_grad(params, sizes, x[idx], y[idx], alpha)
        if not np.isfinite(loss):
            return step, start // batch_size, loss
        step = adam_update(params, g, m, v, step, lr, beta1, beta2, eps)
    return step, -1, 0.0


def _row_crossings(poly, j):
    u0, v0 = poly[:, 0], poly[:, 1]
    u1, v1 = np.roll(u0, -1), np.roll(v0, -1)
    hit = (v0 > j) != (v1 > j)
    if not hit.any():
        return None
    xs = u0[hit] + (j - v0[hit]) * (u1[hit] - u0[hit]) / (v1[hit] - v0[hit])
    return np.sort(xs)


def raster_mask(poly, nx, ny):
    """Pixel-centre scanline fill; pixel (i, j) has its centre at (i, j)."""
    mask = np.zeros((ny, nx), dtype=bool)
    for j in range(ny):
        xs = _row_crossings(poly, float(j))
        if xs is None:
            continue
        for a, b in zip(xs[::2], xs[1::2]):
            i0 = max(int(np.ceil(a)), 0)
            i1 = min(int(np.ceil(b)), nx)
            if i1 > i0:
                mask[j, i0:i1] = True
    return mask


def raster_moments(poly, nx, ny):
    """Central moments mu[p, q] (p + q <= 3) of the filled polygon, plus the centroid.

    Returns (mu, cx, cy) with mu a 4x4 array; mu[0, 0] is the pixel count.
    """
    mask = raster_mask(np.asarray(poly, dtype=np.float64), nx, ny)
    jj, ii = np.nonzero(mask)
    mu = np.zeros((4, 4))
    if ii.size == 0:
        return mu, 0.0, 0.0
    cx = ii.sum() / ii.size
    cy = jj.sum() / jj.size
    dx = ii - cx
    dy = jj - cy
    for p in range(4):
        for q in range(4 - p):
            mu[p, q] = np.sum(dx**p * dy**q)
    return mu, float(cx), float(cy)


def point_polyline_distance(points, poly):
    """Distance from every point to the closed polyline ``poly``."""
    pts = np.asarray(points, dtype=np.float64)
    a = np.asarray(poly, dtype=np.float64)
    b = np.roll(a, -1, axis=0)
    e = b - a
    ee = np.einsum("ij,ij->i", e, e)
    ee[ee == 0] = 1.0
    out = np.empty(len(pts))
    step = max(1, 2_000_000 // max(len(a), 1))
    for s in range(0, len(pts), step):
        p = pts[s:s + step, None, :]
        t = np.clip(np.einsum("nmk,mk->nm", p - a, e) / ee, 0.0, 1.0)
        d = p - (a + t[..., None] * e)
        out[s:s + step] = np.sqrt(np.min(np.einsum("nmk,nmk->nm", d, d), axis=1))
    return out
