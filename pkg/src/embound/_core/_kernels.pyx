# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; see ``_fallback`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, ceil, isfinite, pow
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()


cdef inline double leaky(double z, double alpha) nogil:
    return z if z > 0 else alpha * z


cdef inline double dleaky(double z, double alpha) nogil:
    return 1.0 if z > 0 else alpha


cdef double _sample_pass(const double[::1] params, const long[::1] sizes, int n_layers,
                         const double[:, ::1] x, long row, double target, double scale,
                         double alpha, double[::1] grad, double* zbuf, double* abuf,
                         double* dcur, double* dnext, int accumulate) nogil:
    """Forward one sample, optionally backpropagate ``scale * d(err^2)``; returns the prediction."""
    cdef int l, i, j, n_in, n_out
    cdef long off = 0, zoff = 0, aoff = 0, woff
    cdef double s, pred, err
    cdef const double* a_prev
    # activations of layer l live at abuf[aoff_l], input copied first
    n_in = sizes[0]
    for i in range(n_in):
        abuf[i] = x[row, i]
    aoff = 0
    zoff = 0
    for l in range(n_layers):
        n_in = sizes[l]
        n_out = sizes[l + 1]
        for j in range(n_out):
            s = params[off + n_in * n_out + j]
            woff = off + j * n_in
            for i in range(n_in):
                s += params[woff + i] * abuf[aoff + i]
            zbuf[zoff + j] = s
            abuf[aoff + n_in + j] = s if l == n_layers - 1 else leaky(s, alpha)
        off += n_in * n_out + n_out
        zoff += n_out
        aoff += n_in
    pred = zbuf[zoff - 1]
    if not accumulate:
        return pred
    err = pred - target
    dcur[0] = 2.0 * scale * err
    # backward: off points past the last layer
    for l in range(n_layers - 1, -1, -1):
        n_in = sizes[l]
        n_out = sizes[l + 1]
        zoff -= n_out
        aoff -= n_in
        off -= n_in * n_out + n_out
        for j in range(n_out):
            grad[off + n_in * n_out + j] += dcur[j]
            woff = off + j * n_in
            for i in range(n_in):
                grad[woff + i] += dcur[j] * abuf[aoff + i]
        if l > 0:
            for i in range(n_in):
                s = 0.0
                for j in range(n_out):
                    s += params[off + j * n_in + i] * dcur[j]
                dnext[i] = s * dleaky(zbuf[zoff - n_in + i], alpha)
            for i in range(n_in):
                dcur[i] = dnext[i]
    return pred


cdef int _buffers(const long[::1] sizes, double** zbuf, double** abuf, double** dcur, double** dnext):
    cdef long total = 0, widest = 0, k
    for k in range(sizes.shape[0]):
        total += sizes[k]
        if sizes[k] > widest:
            widest = sizes[k]
    zbuf[0] = <double*> malloc(total * sizeof(double))
    abuf[0] = <double*> malloc(total * sizeof(double))
    dcur[0] = <double*> malloc(widest * sizeof(double))
    dnext[0] = <double*> malloc(widest * sizeof(double))
    return 0


cdef void _release(double* zbuf, double* abuf, double* dcur, double* dnext):
    free(zbuf)
    free(abuf)
    free(dcur)
    free(dnext)


def mlp_forward(const double[::1] params, sizes, x, double alpha):
    cdef long[::1] sz = np.ascontiguousarray(sizes, dtype=np.int64)
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef long n = xv.shape[0], r
    cdef int n_layers = sz.shape[0] - 1
    out = np.empty(n)
    cdef double[::1] ov = out
    cdef double[::1] dummy = np.empty(0)
    cdef double *zbuf, *abuf, *dcur, *dnext
    _buffers(sz, &zbuf, &abuf, &dcur, &dnext)
    with nogil:
        for r in range(n):
            ov[r] = _sample_pass(params, sz, n_layers, xv, r, 0.0, 0.0, alpha, dummy,
                                 zbuf, abuf, dcur, dnext, 0)
    _release(zbuf, abuf, dcur, dnext)
    return out


cdef double _batch_grad(const double[::1] params, const long[::1] sz, int n_layers,
                        const double[:, ::1] xv, const double[::1] yv, const long[::1] rows,
                        long start, long stop, double alpha, double[::1] grad,
                        double* zbuf, double* abuf, double* dcur, double* dnext) nogil:
    cdef long k, r, p
    cdef long nb = stop - start
    cdef double loss = 0.0, pred, e
    cdef double scale = 1.0 / nb
    for p in range(grad.shape[0]):
        grad[p] = 0.0
    for k in range(start, stop):
        r = rows[k]
        pred = _sample_pass(params, sz, n_layers, xv, r, yv[r], scale, alpha, grad,
                            zbuf, abuf, dcur, dnext, 1)
        e = pred - yv[r]
        loss += e * e
    return loss / nb


def mlp_loss_grad(const double[::1] params, sizes, x, y, double alpha):
    cdef long[::1] sz = np.ascontiguousarray(sizes, dtype=np.int64)
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef long n = xv.shape[0]
    cdef long[::1] rows = np.arange(n, dtype=np.int64)
    cdef int n_layers = sz.shape[0] - 1
    grad = np.zeros(params.shape[0])
    cdef double[::1] gv = grad
    cdef double loss
    cdef double *zbuf, *abuf, *dcur, *dnext
    _buffers(sz, &zbuf, &abuf, &dcur, &dnext)
    with nogil:
        loss = _batch_grad(params, sz, n_layers, xv, yv, rows, 0, n, alpha, gv,
                           zbuf, abuf, dcur, dnext)
    _release(zbuf, abuf, dcur, dnext)
    return loss, grad


cdef long _adam(double[::1] params, const double[::1] g, double[::1] m, double[::1] v,
                long step, double lr, double b1, double b2, double eps) nogil:
    cdef long p
    cdef double c1, c2, mh, vh
    step += 1
    c1 = 1.0 - pow(b1, <double> step)
    c2 = 1.0 - pow(b2, <double> step)
    for p in range(params.shape[0]):
        m[p] = b1 * m[p] + (1.0 - b1) * g[p]
        v[p] = b2 * v[p] + (1.0 - b2) * g[p] * g[p]
        mh = m[p] / c1
        vh = v[p] / c2
        params[p] -= lr * mh / (sqrt(vh) + eps)
    return step


def adam_update(double[::1] params, const double[::1] grads, double[::1] m, double[::1] v,
                long step, double lr, double beta1, double beta2, double eps):
    return _adam(params, grads, m, v, step, lr, beta1, beta2, eps)


def train_epoch(double[::1] params, sizes, x, y, order, long batch_size, double alpha,
                double[::1] m, double[::1] v, long step, double lr, double beta1,
                double beta2, double eps):
    cdef long[::1] sz = np.ascontiguousarray(sizes, dtype=np.int64)
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef long[::1] rows = np.ascontiguousarray(order, dtype=np.int64)
    cdef int n_layers = sz.shape[0] - 1
    cdef long n = rows.shape[0], start, stop, bad = -1
    cdef double loss = 0.0
    cdef double[::1] g = np.zeros(params.shape[0])
    cdef double *zbuf, *abuf, *dcur, *dnext
    _buffers(sz, &zbuf, &abuf, &dcur, &dnext)
    with nogil:
        start = 0
        while start < n:
            stop = start + batch_size
            if stop > n:
                stop = n
            loss = _batch_grad(params, sz, n_layers, xv, yv, rows, start, stop, alpha, g,
                               zbuf, abuf, dcur, dnext)
            if not isfinite(loss):
                bad = start // batch_size
                break
            step = _adam(params, g, m, v, step, lr, beta1, beta2, eps)
            start = stop
    _release(zbuf, abuf, dcur, dnext)
    if bad >= 0:
        return step, bad, loss
    return step, -1, 0.0


cdef int _cmp_double(const void* a, const void* b) noexcept nogil:
    cdef double x = (<double*> a)[0], y = (<double*> b)[0]
    return (x > y) - (x < y)


def raster_moments(poly, long nx, long ny):
    cdef const double[:, ::1] pv = np.ascontiguousarray(poly, dtype=np.float64)
    cdef long nv = pv.shape[0], j, k, i, i0, i1, nc, c
    cdef double jj, u0, v0, u1, v1
    cdef double* xs = <double*> malloc(nv * sizeof(double))
    # span table: up to nv / 2 spans per row
    spans = np.full((ny, 2 * (nv // 2 + 1)), -1, dtype=np.int64)
    cdef long[:, ::1] sp = spans
    counts = np.zeros(ny, dtype=np.int64)
    cdef long[::1] cnt = counts
    cdef double m00 = 0.0, m10 = 0.0, m01 = 0.0, cx, cy, dx, dy, w
    mu = np.zeros((4, 4))
    cdef double[:, ::1] muv = mu
    cdef int p, q
    cdef double pxp[4]
    cdef double pyq[4]
    with nogil:
        for j in range(ny):
            jj = <double> j
            nc = 0
            for k in range(nv):
                u0 = pv[k, 0]
                v0 = pv[k, 1]
                u1 = pv[(k + 1) % nv, 0]
                v1 = pv[(k + 1) % nv, 1]
                if (v0 > jj) != (v1 > jj):
                    xs[nc] = u0 + (jj - v0) * (u1 - u0) / (v1 - v0)
                    nc += 1
            qsort(xs, nc, sizeof(double), _cmp_double)
            c = 0
            k = 0
            while k + 1 < nc:
                i0 = <long> ceil(xs[k])
                i1 = <long> ceil(xs[k + 1])
                if i0 < 0:
                    i0 = 0
                if i1 > nx:
                    i1 = nx
                if i1 > i0:
                    sp[j, 2 * c] = i0
                    sp[j, 2 * c + 1] = i1
                    c += 1
                    for i in range(i0, i1):
                        m00 += 1.0
                        m10 += i
                        m01 += jj
                k += 2
            cnt[j] = c
        if m00 > 0:
            cx = m10 / m00
            cy = m01 / m00
            for j in range(ny):
                dy = j - cy
                pyq[0] = 1.0
                pyq[1] = dy
                pyq[2] = dy * dy
                pyq[3] = dy * dy * dy
                for c in range(cnt[j]):
                    for i in range(sp[j, 2 * c], sp[j, 2 * c + 1]):
                        dx = i - cx
                        pxp[0] = 1.0
                        pxp[1] = dx
                        pxp[2] = dx * dx
                        pxp[3] = dx * dx * dx
                        for p in range(4):
                            for q in range(4 - p):
                                muv[p, q] += pxp[p] * pyq[q]
    free(xs)
    if m00 == 0:
        return mu, 0.0, 0.0
    return mu, float(cx), float(cy)


def point_polyline_distance(points, poly):
    cdef const double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[:, ::1] a = np.ascontiguousarray(poly, dtype=np.float64)
    cdef long n = pts.shape[0], m = a.shape[0], r, k
    out = np.empty(n)
    cdef double[::1] ov = out
    cdef double px, py, ax, ay, ex, ey, ee, t, qx, qy, d, best
    with nogil:
        for r in range(n):
            px = pts[r, 0]
            py = pts[r, 1]
            best = 1e300
            for k in range(m):
                ax = a[k, 0]
                ay = a[k, 1]
                ex = a[(k + 1) % m, 0] - ax
                ey = a[(k + 1) % m, 1] - ay
                ee = ex * ex + ey * ey
                if ee == 0:
                    ee = 1.0
                t = ((px - ax) * ex + (py - ay) * ey) / ee
                if t < 0:
                    t = 0
                elif t > 1:
                    t = 1
                qx = px - (ax + t * ex)
                qy = py - (ay + t * ey)
                d = qx * qx + qy * qy
                if d < best:
                    best = d
            ov[r] = sqrt(best)
    return out
