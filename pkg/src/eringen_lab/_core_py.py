"""Pure-numpy versions of the assembly kernels.

Mirrors the compiled ``_core`` module function for function; used when the
extension is not built or when ``ERINGEN_LAB_PURE_PYTHON=1``.
"""
import numpy as np

KIND_LINEAR = 0
KIND_CUBIC = 1
KIND_RIESZ = 2

_G3_X = np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)])
_G3_W = np.array([5.0, 8.0, 5.0]) / 9.0

_CHUNK = 2048


def _poly(kind, d):
    if kind == KIND_CUBIC:
        return 1.0 - d * d + d * d * d / 3.0
    return 1.0 - d


def _element_pairs(nodes, kind, beta, scale):
    """D[e, f] = ∫_{I_e} ∫_{I_f} Ã(|x - y|) dy dx for all element pairs."""
    a, b = nodes[:-1], nodes[1:]
    w = b - a
    if kind == KIND_RIESZ:
        c0 = 1.0 / (beta * (beta + 1.0))
        bp = beta + 1.0

        def G(t):
            return c0 * np.abs(t) ** bp

        D = G(b[:, None] - a[None, :]) - G(a[:, None] - a[None, :]) - G(b[:, None] - b[None, :]) + G(
            a[:, None] - b[None, :]
        )
        return scale * D
    # mesh elements are identical or have disjoint interiors
    mid, half = 0.5 * (a + b), 0.5 * w
    xq = mid[:, None] + half[:, None] * _G3_X[None, :]
    wq = half[:, None] * _G3_W[None, :]
    n = len(a)
    D = np.empty((n, n))
    step = 256
    for s in range(0, n, step):
        dist = np.abs(xq[s : s + step, None, :, None] - xq[None, :, None, :])
        D[s : s + step] = np.einsum("ip,ijpq,jq->ij", wq[s : s + step], _poly(kind, dist), wq)
    if kind == KIND_CUBIC:
        diag = w * w - w**4 / 6.0 + w**5 / 30.0
    else:
        diag = w * w - w**3 / 3.0
    D[np.arange(n), np.arange(n)] = diag
    return D


def p1_nonlocal(nodes, kind, beta, scale):
    """Nonlocal stiffness for P1 hats on interior nodes, built from exact
    element-pair integrals. Upper triangle mirrored to the lower one."""
    nodes = np.ascontiguousarray(nodes, dtype=float)
    D = _element_pairs(nodes, kind, beta, scale)
    h = np.diff(nodes)
    sl = 1.0 / h[:-1]
    sr = -1.0 / h[1:]
    K = (
        (sl[:, None] * D[:-1, :-1] * sl[None, :] + sl[:, None] * D[:-1, 1:] * sr[None, :])
        + sr[:, None] * D[1:, :-1] * sl[None, :]
    ) + sr[:, None] * D[1:, 1:] * sr[None, :]
    return np.triu(K) + np.triu(K, 1).T


def p1_strain_matrix(nodes, z, beta, scale):
    """S[k, q] = ∫ Ã_β(|z_q - x|) e_k'(x) dx for the P1 hats, closed form."""
    nodes = np.ascontiguousarray(nodes, dtype=float)
    z = np.ascontiguousarray(z, dtype=float)
    t = z[None, :] - nodes[:, None]
    G = np.sign(t) * np.abs(t) ** beta * (scale / beta)
    h = np.diff(nodes)
    left = (G[:-2] - G[1:-1]) / h[:-1, None]
    right = (G[1:-1] - G[2:]) / h[1:, None]
    return left - right


def riesz_pair_sum(p1, w1, f1, c1, p2, w2, f2, c2, expo):
    """Σ_i Σ_j w1_i w2_j |p1_i - p2_j|^expo <f1_i, f2_j> over pairs with c1_i != c2_j."""
    p1, p2 = np.asarray(p1, float), np.asarray(p2, float)
    g1 = np.asarray(f1, float) * np.asarray(w1, float)[:, None]
    g2 = np.asarray(f2, float) * np.asarray(w2, float)[:, None]
    c1, c2 = np.asarray(c1), np.asarray(c2)
    total = 0.0
    for s in range(0, len(p1), _CHUNK):
        d = p1[s : s + _CHUNK, None, :] - p2[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", d, d)
        same = c1[s : s + _CHUNK, None] == c2[None, :]
        r2[same] = 1.0
        R = r2 ** (0.5 * expo)
        R[same] = 0.0
        total += float(np.sum((R @ g2) * g1[s : s + _CHUNK]))
    return total
