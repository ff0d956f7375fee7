# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled assembly kernels; same interface as ``_core_py``."""
import numpy as np

from libc.math cimport exp, fabs, log, sqrt

KIND_LINEAR = 0
KIND_CUBIC = 1
KIND_RIESZ = 2

cdef double[3] G3_X
cdef double[3] G3_W
G3_X[0] = -sqrt(0.6)
G3_X[1] = 0.0
G3_X[2] = sqrt(0.6)
G3_W[0] = 5.0 / 9.0
G3_W[1] = 8.0 / 9.0
G3_W[2] = 5.0 / 9.0


cdef inline double _poly(int kind, double d) nogil:
    if kind == 1:
        return 1.0 - d * d + d * d * d / 3.0
    return 1.0 - d


cdef inline double _powabs(double t, double e) nogil:
    # |t|^e for e > 0; exp/log is markedly cheaper than libm pow
    if t == 0.0:
        return 0.0
    return exp(e * log(fabs(t)))


cdef inline double _G(double t, double bp, double c0) nogil:
    return c0 * _powabs(t, bp)


cdef double _pair(int kind, double beta, double scale,
                  double a, double b, double c, double d) nogil:
    """Exact integral of the kernel over [a,b]x[c,d]; intervals are mesh
    elements, hence identical or with disjoint interiors."""
    cdef double bp, c0, w, total, hx, hy, mx, my, x
    cdef int p, q
    if kind == 2:
        bp = beta + 1.0
        c0 = 1.0 / (beta * bp)
        return scale * (_G(b - c, bp, c0) - _G(a - c, bp, c0)
                        - _G(b - d, bp, c0) + _G(a - d, bp, c0))
    if a == c and b == d:
        w = b - a
        if kind == 1:
            return w * w - w * w * w * w / 6.0 + w * w * w * w * w / 30.0
        return w * w - w * w * w / 3.0
    hx = 0.5 * (b - a)
    hy = 0.5 * (d - c)
    mx = 0.5 * (a + b)
    my = 0.5 * (c + d)
    total = 0.0
    for p in range(3):
        x = mx + hx * G3_X[p]
        for q in range(3):
            total += G3_W[p] * G3_W[q] * _poly(kind, fabs(x - (my + hy * G3_X[q])))
    return hx * hy * total


def p1_nonlocal(nodes_in, int kind, double beta, double scale):
    cdef const double[::1] x = np.ascontiguousarray(nodes_in, dtype=np.float64)
    cdef Py_ssize_t n_el = x.shape[0] - 1
    cdef Py_ssize_t n = n_el - 1
    K_arr = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] K = K_arr
    D_arr = np.empty((n_el, n_el), dtype=np.float64)
    cdef double[:, ::1] D = D_arr
    cdef Py_ssize_t e, f, k, m
    cdef double sl_k, sr_k, sl_m, sr_m, v
    with nogil:
        for e in range(n_el):
            for f in range(e, n_el):
                D[e, f] = _pair(kind, beta, scale, x[e], x[e + 1], x[f], x[f + 1])
                D[f, e] = D[e, f]
        for k in range(n):
            sl_k = 1.0 / (x[k + 1] - x[k])
            sr_k = -1.0 / (x[k + 2] - x[k + 1])
            for m in range(k, n):
                sl_m = 1.0 / (x[m + 1] - x[m])
                sr_m = -1.0 / (x[m + 2] - x[m + 1])
                v = ((sl_k * D[k, m] * sl_m + sl_k * D[k, m + 1] * sr_m)
                     + sr_k * D[k + 1, m] * sl_m) + sr_k * D[k + 1, m + 1] * sr_m
                K[k, m] = v
                K[m, k] = v
    return K_arr


def p1_strain_matrix(nodes_in, z_in, double beta, double scale):
    cdef const double[::1] x = np.ascontiguousarray(nodes_in, dtype=np.float64)
    cdef const double[::1] z = np.ascontiguousarray(z_in, dtype=np.float64)
    cdef Py_ssize_t n_nodes = x.shape[0]
    cdef Py_ssize_t n = n_nodes - 2
    cdef Py_ssize_t nz = z.shape[0]
    S_arr = np.empty((n, nz), dtype=np.float64)
    cdef double[:, ::1] S = S_arr
    # two rolling rows of the signed primitive G_j(z) = c sign(t)|t|^beta
    cdef double[:, ::1] G = np.empty((3, nz), dtype=np.float64)
    cdef double c = scale / beta
    cdef double t, il, ir
    cdef Py_ssize_t j, k, q, r0, r1, r2
    with nogil:
        for j in range(min(2, n_nodes)):
            for q in range(nz):
                t = z[q] - x[j]
                G[j, q] = c * _powabs(t, beta) if t >= 0 else -c * _powabs(t, beta)
        for k in range(n):
            r0 = k % 3
            r1 = (k + 1) % 3
            r2 = (k + 2) % 3
            for q in range(nz):
                t = z[q] - x[k + 2]
                G[r2, q] = c * _powabs(t, beta) if t >= 0 else -c * _powabs(t, beta)
            il = 1.0 / (x[k + 1] - x[k])
            ir = 1.0 / (x[k + 2] - x[k + 1])
            for q in range(nz):
                S[k, q] = (G[r0, q] - G[r1, q]) * il - (G[r1, q] - G[r2, q]) * ir
    return S_arr


def riesz_pair_sum(p1_in, w1_in, f1_in, c1_in, p2_in, w2_in, f2_in, c2_in, double expo):
    cdef const double[:, ::1] p1 = np.ascontiguousarray(p1_in, dtype=np.float64)
    cdef const double[:, ::1] p2 = np.ascontiguousarray(p2_in, dtype=np.float64)
    cdef const double[::1] w1 = np.ascontiguousarray(w1_in, dtype=np.float64)
    cdef const double[::1] w2 = np.ascontiguousarray(w2_in, dtype=np.float64)
    cdef const double[:, ::1] f1 = np.ascontiguousarray(f1_in, dtype=np.float64)
    cdef const double[:, ::1] f2 = np.ascontiguousarray(f2_in, dtype=np.float64)
    cdef const long long[::1] c1 = np.ascontiguousarray(c1_in, dtype=np.longlong)
    cdef const long long[::1] c2 = np.ascontiguousarray(c2_in, dtype=np.longlong)
    cdef Py_ssize_t n1 = p1.shape[0], n2 = p2.shape[0], nc = f1.shape[1]
    cdef Py_ssize_t i, j, c
    cdef double total = 0.0, row, dx, dy, dot, half = 0.5 * expo
    with nogil:
        for i in range(n1):
            row = 0.0
            for j in range(n2):
                if c1[i] == c2[j]:
                    continue
                dx = p1[i, 0] - p2[j, 0]
                dy = p1[i, 1] - p2[j, 1]
                dot = 0.0
                for c in range(nc):
                    dot += f1[i, c] * f2[j, c]
                row += w2[j] * exp(half * log(dx * dx + dy * dy)) * dot
            total += w1[i] * row
    return total
