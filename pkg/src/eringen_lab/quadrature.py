"""Gauss-Legendre rules and the composite/graded variants used by assembly."""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _reference_rule(order):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(order, a=0.0, b=1.0):
    """Nodes and weights of the `order`-point rule mapped to [a, b]."""
    x, w = _reference_rule(int(order))
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


def composite_rule(breaks, order):
    """Tensor of per-panel Gauss rules over consecutive `breaks`.

    Zero-width panels are skipped.
    """
    breaks = np.asarray(breaks, dtype=float)
    x, w = _reference_rule(int(order))
    a, b = breaks[:-1], breaks[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def graded_breaks(a, b, ratio=0.15, levels=8, left=True, right=True):
    """Breakpoints on [a, b] refined geometrically toward the chosen ends.

    Each level shrinks the distance to the end by `ratio`; the innermost
    panel has width ``(b - a) * ratio**levels`` (halved when both ends
    are graded).
    """
    if not (left or right):
        return np.array([a, b])
    if left and right:
        mid = 0.5 * (a + b)
        lo = graded_breaks(a, mid, ratio, levels, left=True, right=False)
        hi = graded_breaks(mid, b, ratio, levels, left=False, right=True)
        return np.concatenate([lo, hi[1:]])
    width = b - a
    offsets = width * ratio ** np.arange(levels, 0, -1)
    if left:
        return np.concatenate([[a], a + offsets, [b]])
    return np.concatenate([[a], b - offsets[::-1], [b]])


def geometric_breaks(start, first, stop, factor=2.0):
    """Breakpoints start, start+first, start+first*factor, ... ending at stop.

    Used for semi-infinite tails where the integrand decays algebraically.
    """
    length = stop - start
    if length <= first:
        return np.array([start, stop])
    n = int(np.ceil(np.log(length / first) / np.log(factor)))
    offsets = first * factor ** np.arange(n)
    offsets = offsets[offsets < length]
    return np.concatenate([[start], start + offsets, [stop]])


def duffy_triangle_rule(order, width):
    """Rule on the triangle {0 <= y <= x <= width} via the collapsed map.

    Returns (x, y, w). Exact for polynomials of degree <= 2*order - 2.
    """
    u, wu = gauss_legendre(order, 0.0, 1.0)
    v, wv = gauss_legendre(order, 0.0, 1.0)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ww = np.outer(wu, wv)
    x = width * uu
    y = x * vv
    w = ww * width * x
    return x.ravel(), y.ravel(), w.ravel()
