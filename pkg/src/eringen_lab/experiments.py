"""End-to-end numerical studies: eigenvalue scans, discrete solves,
convergence against the closed-form fractional solution, coercivity scans,
and two quadrature checks (an integration-by-parts identity in 1-D and the
nonlocal Korn inequality in 2-D).

Scans over a list of meshes run per mesh on a thread pool capped by
``ERINGEN_LAB_THREADS`` (0 or unset = automatic); results always come back
in input order.
"""
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from . import _backend
from .assembly import OuterDomainMode, StiffnessProfile, assemble_heterogeneous, assemble_mixture, assemble_nonlocal_stiffness
from .errors import InvalidArgument
from .kernels import KernelSpec, gamma, riesz_constant
from .linalg import fractional_mass, gen_eig_extremes, solve_spd
from .mesh_fem import assemble_load, assemble_mass_l2, assemble_stiffness_local, build_space, l2_error
from .quadrature import duffy_triangle_rule, gauss_legendre

LAPLACE_CELLS = 64


@dataclass(frozen=True)
class ScanRecord:
    N: int
    h: float
    primary_value: float
    secondary_value: float | None = None


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float


def thread_count():
    raw = os.environ.get("ERINGEN_LAB_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise InvalidArgument(f"ERINGEN_LAB_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise InvalidArgument("ERINGEN_LAB_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def _map_ordered(fn, items):
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _check_N_list(N_list, minimum=1):
    out = []
    for N in N_list:
        if isinstance(N, bool) or int(N) != N or N < minimum:
            raise InvalidArgument(f"mesh sizes must be integers >= {minimum}, got {N!r}")
        out.append(int(N))
    return out


def slope_fit(records):
    """Least-squares line through (log h, log primary_value).

    With six or more records the two coarsest meshes are dropped as
    pre-asymptotic.
    """
    records = list(records)
    if len(records) < 3:
        raise InvalidArgument("need at least 3 records for a rate fit")
    if len(records) >= 6:
        records = sorted(records, key=lambda r: r.h, reverse=True)[2:]
    h = np.array([r.h for r in records], dtype=float)
    v = np.array([r.primary_value for r in records], dtype=float)
    if np.any(v <= 0) or np.any(h <= 0):
        raise InvalidArgument("rate fits need positive values")
    x, y = np.log(h), np.log(v)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - float(np.sum(resid**2)) / ss_tot)
    return RateFit(float(slope), float(intercept), min(r2, 1.0))


def eig_scan(spec, p, N_list):
    """Smallest generalized eigenvalue of (K, M0) per mesh."""
    N_list = _check_N_list(N_list, 4)

    def one(N):
        space = build_space(N, p)
        K = assemble_nonlocal_stiffness(space, spec)
        ext = gen_eig_extremes(K, assemble_mass_l2(space))
        return ScanRecord(N, 1.0 / N, ext.lambda_min, ext.lambda_max)

    return _map_ordered(one, N_list)


def solve_eringen(spec, f, N, p):
    """Coefficients of the discrete solution of K u = F (unit stiffness)."""
    space = build_space(N, p)
    K = assemble_nonlocal_stiffness(space, spec)
    return solve_spd(K, assemble_load(space, f))


def discrete_l2_norm(space, coeffs):
    M = assemble_mass_l2(space)
    return math.sqrt(max(float(coeffs @ M @ coeffs), 0.0))


def solution_norms(spec, f, p, N_list):
    """L2 norm of the discrete solution per mesh (divergence diagnostic)."""
    N_list = _check_N_list(N_list, 2)

    def one(N):
        u = solve_eringen(spec, f, N, p)
        return ScanRecord(N, 1.0 / N, discrete_l2_norm(build_space(N, p), u))

    return _map_ordered(one, N_list)


def solve_mixture(spec, f, N, m, p=1):
    space = build_space(N, p)
    return solve_spd(assemble_mixture(space, spec, m), assemble_load(space, f))


def solve_local(f, N, p=1):
    space = build_space(N, p)
    return solve_spd(assemble_stiffness_local(space), assemble_load(space, f))


def fractional_coefficient(s):
    """Constant in front of (x(1-x))^s in the solution of (-Δ)^s u = 1 on (0,1)."""
    return 2.0 ** (-2.0 * s) * gamma(0.5) / (gamma(0.5 + s) * gamma(1.0 + s))


def analytic_fractional_solution(s, x):
    if not 0.0 < s < 1.0:
        raise InvalidArgument(f"need 0 < s < 1, got {s!r}")
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > 1.0)):
        raise InvalidArgument("x must lie in [0, 1]")
    val = fractional_coefficient(s) * (x * (1.0 - x)) ** s
    return float(val) if val.ndim == 0 else val


def convergence_study(alpha, N_list):
    """L2 error of the Riesz-kernel solution (f = 1, p = 1) per mesh, and its rate."""
    if not 0.0 < alpha < 1.0:
        raise InvalidArgument(f"need 0 < alpha < 1, got {alpha!r}")
    s = 1.0 - 0.5 * alpha
    spec = KernelSpec.riesz(alpha)
    N_list = _check_N_list(N_list, 2)

    def one(N):
        space = build_space(N, 1)
        u = solve_eringen(spec, _one, N, 1)
        err = l2_error(space, u, lambda x: analytic_fractional_solution(s, x))
        return ScanRecord(N, 1.0 / N, err)

    records = _map_ordered(one, N_list)
    return records, slope_fit(records)


def _one(x):
    return np.ones_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Homogeneous:
    """The Riesz-kernel form assembled directly."""


@dataclass(frozen=True)
class Heterogeneous:
    """The half-order strain form with a stiffness profile."""

    profile: StiffnessProfile = field(default_factory=StiffnessProfile)
    mode: OuterDomainMode = field(default_factory=OuterDomainMode)


def coercivity_scan(alpha, N_list, form=Homogeneous()):
    """λ_min and λ_max of K against the fractional mass matrix, s = 1 - α/2."""
    if not 0.0 < alpha < 1.0:
        raise InvalidArgument(f"need 0 < alpha < 1, got {alpha!r}")
    s = 1.0 - 0.5 * alpha
    N_list = _check_N_list(N_list, 2)

    def one(N):
        space = build_space(N, 1)
        if isinstance(form, Heterogeneous):
            K = assemble_heterogeneous(space, alpha, form.profile, form.mode)
        else:
            K = assemble_nonlocal_stiffness(space, KernelSpec.riesz(alpha))
        M = fractional_mass(assemble_mass_l2(space), assemble_stiffness_local(space), s)
        ext = gen_eig_extremes(K, M)
        return ScanRecord(N, 1.0 / N, ext.lambda_min, ext.lambda_max)

    return _map_ordered(one, N_list)


# ---------------------------------------------------------------- 1-D identity


def _as_function_pair(u, du):
    if du is None:
        try:
            du = u.deriv()
        except AttributeError:
            raise InvalidArgument("pass the derivative explicitly for non-polynomial functions") from None
    return u, du


def laplace_identity_check(u, v, quad_order, du=None, dv=None):
    """Both sides of ∫∫ Ã(|x-y|) u'(x) v'(y) = ∫∫ 2 (1 - |x-y|) u(x) v(y)
    for the smooth cubic kernel and u, v vanishing at 0 and 1.

    Composite Gauss on a 64 x 64 cell grid; diagonal cells are split along
    x = y, where both integrands have a kink. `u` and `v` are callables;
    their derivatives come from ``.deriv()`` unless given.
    """
    u, du = _as_function_pair(u, du)
    v, dv = _as_function_pair(v, dv)
    n = LAPLACE_CELLS
    h = 1.0 / n
    t, w = gauss_legendre(quad_order, 0.0, h)
    x = (np.arange(n)[:, None] * h + t[None, :]).ravel()
    wx = np.tile(w, n)
    cell = np.repeat(np.arange(n), quad_order)
    off = cell[:, None] != cell[None, :]
    d = np.abs(x[:, None] - x[None, :])
    W = np.outer(wx, wx) * off

    def cubic(d):
        return 1.0 - d * d + d**3 / 3.0

    def tri2(d):
        return 2.0 * (1.0 - d)

    ux, dux = np.asarray(u(x), float), np.asarray(du(x), float)
    vx, dvx = np.asarray(v(x), float), np.asarray(dv(x), float)
    lhs = float(dux @ (W * cubic(d)) @ dvx)
    rhs = float(ux @ (W * tri2(d)) @ vx)

    # diagonal cells: the triangle y <= x and its mirror image
    tx, ty, tw = duffy_triangle_rule(quad_order, h)
    for k in range(n):
        a = k * h
        X, Y = a + tx, a + ty
        dd = X - Y
        for A, B in ((X, Y), (Y, X)):
            lhs += float(np.sum(tw * cubic(dd) * du(A) * dv(B)))
            rhs += float(np.sum(tw * tri2(dd) * u(A) * v(B)))
    return lhs, rhs


# ---------------------------------------------------------------- 2-D Korn check


@dataclass(frozen=True)
class VectorField2D:
    """Polynomial vector field (u1, u2) on the unit square.

    ``c1``/``c2`` are 2-D power-series coefficient arrays: c[i, j] multiplies
    x**i * y**j.
    """

    name: str
    c1: np.ndarray
    c2: np.ndarray

    def gradient_coefficients(self):
        """[[∂x u1, ∂y u1], [∂x u2, ∂y u2]] as coefficient arrays."""
        return [[P.polyder(c, axis=0), P.polyder(c, axis=1)] for c in (self.c1, self.c2)]

    def gradient(self, x, y):
        """Array (..., 2, 2) with g[..., i, j] = ∂_j u_i."""
        g = self.gradient_coefficients()
        return np.stack(
            [np.stack([P.polyval2d(x, y, g[i][j]) for j in range(2)], axis=-1) for i in range(2)], axis=-2
        )

    def value(self, x, y):
        return np.stack([P.polyval2d(x, y, self.c1), P.polyval2d(x, y, self.c2)], axis=-1)


def _poly2d(terms):
    """Product of 1-D factors: terms = [(coeffs_in_x, coeffs_in_y), ...] summed."""
    out = np.zeros((1, 1))
    for cx, cy in terms:
        c = np.outer(cx, cy)
        size = (max(out.shape[0], c.shape[0]), max(out.shape[1], c.shape[1]))
        acc = np.zeros(size)
        acc[: out.shape[0], : out.shape[1]] += out
        acc[: c.shape[0], : c.shape[1]] += c
        out = acc
    return out


def _mul2d(a, b):
    """Product of two 2-D coefficient arrays."""
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
    for i, j in np.ndindex(*a.shape):
        out[i : i + b.shape[0], j : j + b.shape[1]] += a[i, j] * b
    return out


def _bump(power=1):
    """Coefficients of (t(1-t))**power in t."""
    return P.polypow([0.0, 1.0, -1.0], power)


def standard_fields():
    """The five fixed bump fields of the Korn check."""
    b1 = _bump(1)
    zero = np.zeros((1, 1))
    phi = _poly2d([(_bump(2), _bump(2))])  # x^2 y^2 (1-x)^2 (1-y)^2
    grad_phi = (P.polyder(phi, axis=0), P.polyder(phi, axis=1))
    curl_psi = (P.polyder(phi, axis=1), -P.polyder(phi, axis=0))
    f3 = _poly2d([(P.polymul([0.0, 0.0, 1.0], [1.0, -1.0]), b1)])  # x^2 (1-x) y (1-y)
    bxy = _poly2d([(b1, b1)])
    mixed1 = _mul2d(bxy, _poly2d([([1.0, 1.0], [1.0])]))  # (1 + x) b
    mixed2 = _mul2d(bxy, _poly2d([([1.0], [2.0, -1.0]), ([0.0, 0.5], [1.0])]))  # (2 - y + x/2) b
    return [
        VectorField2D("shear-bump", bxy, zero),
        VectorField2D("gradient", *grad_phi),
        VectorField2D("transverse-bump", zero, f3),
        VectorField2D("divergence-free", *curl_psi),
        VectorField2D("mixed", mixed1, mixed2),
    ]


def random_fields(count, seed, degree=2):
    """Seeded fields b(x, y) * q_i(x, y) with random degree-`degree` q_i."""
    rng = np.random.default_rng(seed)
    bxy = _poly2d([(_bump(1), _bump(1))])
    fields = []
    for k in range(count):
        q1 = rng.standard_normal((degree + 1, degree + 1))
        q2 = rng.standard_normal((degree + 1, degree + 1))
        fields.append(VectorField2D(f"random-{k}", _mul2d(bxy, q1), _mul2d(bxy, q2)))
    return fields


KORN_ORDER = 6
KORN_LEVELS = 3
POTENTIAL_ORDER = 20
POTENTIAL_GRADING = 12


def _corner_triangle(a, b, alpha):
    """∫∫ |r|^(α-2) over the triangle (0,0), (a,0), (a,b) (vectorized).

    In polar form this is a^α/α ∫_0^(b/a) (1 + t²)^(α/2 - 1) dt; past t = 1
    the substitution t = e^y keeps the integrand smooth for any b/a.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = 0.5 * alpha - 1.0
    out = np.zeros(np.broadcast(a, b).shape)
    ok = (a > 0) & (b > 0)
    a, b = np.broadcast_to(a, out.shape)[ok], np.broadcast_to(b, out.shape)[ok]
    z = b / a
    t, wt = gauss_legendre(POTENTIAL_ORDER, 0.0, 1.0)
    zn = np.minimum(z, 1.0)
    near = zn * ((1.0 + (zn[:, None] * t) ** 2) ** c @ wt)
    far = np.zeros_like(z)
    big = z > 1.0
    if np.any(big):
        ymax = np.log(z[big])
        panels = max(1, int(np.ceil(ymax.max())))
        y0, wy = gauss_legendre(POTENTIAL_ORDER, 0.0, 1.0)
        acc = np.zeros_like(ymax)
        for k in range(panels):
            lo = np.minimum(k / panels * ymax.max(), ymax)
            hi = np.minimum((k + 1) / panels * ymax.max(), ymax)
            y = lo[:, None] + (hi - lo)[:, None] * y0
            e = np.exp(y)
            acc += (hi - lo) * ((e * (1.0 + e * e) ** c) @ wy)
        far[big] = acc
    out[ok] = a**alpha / alpha * (near + far)
    return out


def square_potential(x, y, alpha):
    """Φ(x, y) = ∫_[0,1]² |(x, y) - x'|^(α-2) dx' for points in the square."""
    total = 0.0
    for a in (x, 1.0 - x):
        for b in (y, 1.0 - y):
            total = total + _corner_triangle(a, b, alpha) + _corner_triangle(b, a, alpha)
    return total


def _square_rule(order):
    """Tensor rule on the unit square graded toward all four edges, where
    the potential has |dist|^α behaviour."""
    from .quadrature import composite_rule, graded_breaks

    t, w = composite_rule(graded_breaks(0.0, 1.0, 0.15, POTENTIAL_GRADING), order)
    X, Y = np.meshgrid(t, t, indexing="ij")
    return np.stack([X.ravel(), Y.ravel()], axis=1), np.outer(w, w).ravel()


def _cell_points(x0, y0, size, cells, order_x, order_y=None):
    """Tensor Gauss points on a cells x cells subdivision of a square."""
    order_y = order_x if order_y is None else order_y
    h = size / cells
    tx, wx = gauss_legendre(order_x, 0.0, h)
    ty, wy = gauss_legendre(order_y, 0.0, h)
    i, j = np.meshgrid(np.arange(cells), np.arange(cells), indexing="ij")
    cid = (i * cells + j).ravel()
    X = x0 + i.ravel()[:, None, None] * h + tx[None, :, None]
    Y = y0 + j.ravel()[:, None, None] * h + ty[None, None, :]
    X, Y = np.broadcast_arrays(X, Y)
    W = np.broadcast_to(np.outer(wx, wy)[None], X.shape)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    return pts, W.ravel().copy(), np.repeat(cid, order_x * order_y)


def _korn_features(field, pts):
    g = field.gradient(pts[:, 0], pts[:, 1])
    grad = g.reshape(len(pts), 4)
    e12 = 0.5 * (g[:, 0, 1] + g[:, 1, 0])
    # ε:ε' = ε11 ε11' + 2 ε12 ε12' + ε22 ε22'
    strain = np.stack([g[:, 0, 0], math.sqrt(2.0) * e12, g[:, 1, 1]], axis=1)
    return strain, grad


def _regularized(F):
    """Feature pairs whose inner product is F·F' - |F|²/2 - |F'|²/2."""
    sq = np.sum(F * F, axis=1, keepdims=True)
    one = np.ones_like(sq)
    left = np.ascontiguousarray(np.hstack([F, sq, one]))
    right = np.ascontiguousarray(np.hstack([F, -0.5 * one, -0.5 * sq]))
    return left, right


def _pair_sums(p1, w1, c1, p2, w2, c2, field, expo):
    """Regularized double sums -½ Σ w w' |r|^expo |F - F'|² for strain and gradient."""
    core = _backend.core
    out = []
    for F1, F2 in zip(_korn_features(field, p1), _korn_features(field, p2)):
        left, _ = _regularized(F1)
        _, right = _regularized(F2)
        out.append(core.riesz_pair_sum(p1, w1, left, c1, p2, w2, right, c2, expo))
    return np.array(out)


def _self_cell(field, x0, y0, size, level, order, expo):
    """Both regularized integrals over one square paired with itself."""
    if level == 0:
        # the regularized integrand is bounded; unequal orders keep the two
        # point sets disjoint
        p1, w1, c1 = _cell_points(x0, y0, size, 1, order)
        p2, w2, c2 = _cell_points(x0, y0, size, 1, order + 1)
        return _pair_sums(p1, w1, c1, p2, w2, c2 - 1, field, expo)
    pts, w, cid = _cell_points(x0, y0, size, 2, order)
    total = _pair_sums(pts, w, cid, pts, w, cid, field, expo)
    half = 0.5 * size
    for i in range(2):
        for j in range(2):
            total += _self_cell(field, x0 + i * half, y0 + j * half, half, level - 1, order, expo)
    return total


def korn_check_2d(alpha, fields, grid, order=KORN_ORDER, levels=KORN_LEVELS):
    """(lhs, rhs) per field for the 2-D Riesz kernel A = |x - x'|^(α-2) / c_α:

    lhs = 2 ∫∫ A ε_u(x):ε_u(x'),  rhs = ∫∫ A ∇u(x):∇u(x').

    Both use F·F' = |F|²/2 + |F'|²/2 - |F - F'|²/2. The first part reduces to
    ∫ |F|² Φ with the square's potential Φ; the second vanishes on the
    diagonal and goes through tensor Gauss on a grid x grid decomposition,
    each cell paired with itself being split into four subcells `levels`
    times.
    """
    if not 0.0 < alpha < 2.0:
        raise InvalidArgument(f"need 0 < alpha < 2, got {alpha!r}")
    if isinstance(grid, bool) or int(grid) != grid or grid < 1:
        raise InvalidArgument(f"grid must be a positive integer, got {grid!r}")
    grid = int(grid)
    expo = alpha - 2.0
    scale = 1.0 / riesz_constant(alpha, 2)
    h = 1.0 / grid
    pts, w, cid = _cell_points(0.0, 0.0, 1.0, grid, order)
    sq_pts, sq_w = _square_rule(order)
    phi = sq_w * square_potential(sq_pts[:, 0], sq_pts[:, 1], alpha)

    def one(fld):
        total = _pair_sums(pts, w, cid, pts, w, cid, fld, expo)
        for i in range(grid):
            for j in range(grid):
                total += _self_cell(fld, i * h, j * h, h, levels, order, expo)
        total += [float(phi @ np.sum(F * F, axis=1)) for F in _korn_features(fld, sq_pts)]
        strain_term, grad_term = scale * total
        return 2.0 * float(strain_term), float(grad_term)

    return _map_ordered(one, fields)
