"""Uniform meshes of (0, 1) and conforming P1/P2 spaces with homogeneous
Dirichlet conditions.

Only interior degrees of freedom are ever created. For p=1 dof k (0-based)
is the hat at node k+1; for p=2 the dofs are the interior points of the
half-step grid i*h/2, i = 1..2N-1, ordered by coordinate (odd i are edge
midpoints, even i are mesh vertices).
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument
from .quadrature import gauss_legendre

LOAD_QUAD_ORDER = 6
L2_QUAD_ORDER = 16


@dataclass(frozen=True)
class Mesh1D:
    n_elements: int
    h: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.n_elements
        nodes = np.arange(n + 1, dtype=float) / n
        nodes.setflags(write=False)
        object.__setattr__(self, "h", 1.0 / n)
        object.__setattr__(self, "nodes", nodes)


@dataclass(frozen=True)
class FemSpace:
    mesh: Mesh1D
    degree: int

    @property
    def n_dofs(self):
        return self.degree * self.mesh.n_elements - 1

    @property
    def h(self):
        return self.mesh.h

    @property
    def n_elements(self):
        return self.mesh.n_elements

    def dof_coordinates(self):
        """Coordinates of the nodal points carrying the dofs."""
        p = self.degree
        return np.arange(1, p * self.n_elements, dtype=float) / (p * self.n_elements)

    def element_dofs(self):
        """(N, p+1) array of global dof indices per element; -1 marks a
        boundary (constrained) local function."""
        p, n = self.degree, self.n_elements
        pos = p * np.arange(n)[:, None] + np.arange(p + 1)[None, :]
        dofs = pos - 1
        dofs[(pos == 0) | (pos == p * n)] = -1
        return dofs


def build_space(N, p):
    if isinstance(N, bool) or int(N) != N or N < 2:
        raise InvalidArgument(f"need an integer N >= 2, got {N!r}")
    if p not in (1, 2):
        raise InvalidArgument(f"degree must be 1 or 2, got {p!r}")
    return FemSpace(Mesh1D(int(N)), int(p))


# reference basis on t in [0, 1]
def local_basis(p, t):
    """Values of the local shape functions, shape (p+1, len(t))."""
    t = np.asarray(t, dtype=float)
    if p == 1:
        return np.array([1.0 - t, t])
    return np.array([2.0 * (t - 0.5) * (t - 1.0), 4.0 * t * (1.0 - t), 2.0 * t * (t - 0.5)])


def local_basis_deriv(p, t):
    """d/dt of the local shape functions, shape (p+1, len(t))."""
    t = np.asarray(t, dtype=float)
    if p == 1:
        one = np.ones_like(t)
        return np.array([-one, one])
    return np.array([4.0 * t - 3.0, 4.0 - 8.0 * t, 4.0 * t - 1.0])


def _scatter(space, blocks):
    """Sum per-element (p+1)x(p+1) blocks into the interior-dof matrix."""
    n = space.n_dofs
    out = np.zeros((n, n))
    dofs = space.element_dofs()
    for e in range(space.n_elements):
        d = dofs[e]
        ok = d >= 0
        idx = d[ok]
        out[np.ix_(idx, idx)] += blocks[e][np.ix_(ok, ok)]
    return out


def _symmetrize(a):
    """Mirror the upper triangle so (i, j) and (j, i) are the same float."""
    upper = np.triu(a)
    return upper + np.triu(a, 1).T


def assemble_mass_l2(space):
    h, p = space.h, space.degree
    if p == 1:
        local = h / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])
    else:
        local = h / 30.0 * np.array([[4.0, 2.0, -1.0], [2.0, 16.0, 2.0], [-1.0, 2.0, 4.0]])
    return _symmetrize(_scatter(space, [local] * space.n_elements))


def _profile_pieces(c, a, b):
    """Split [a, b] at the breakpoints of c; yields (left, right, value)."""
    if np.isscalar(c):
        yield a, b, float(c)
        return
    inner = [t for t in c.breakpoints if a < t < b]
    edges = [a, *inner, b]
    for lo, hi in zip(edges[:-1], edges[1:]):
        yield lo, hi, c.value_at(0.5 * (lo + hi))


def _check_positive_profile(c):
    if np.isscalar(c):
        if not c > 0:
            raise InvalidArgument(f"stiffness must be positive, got {c!r}")
    else:
        if min(c.values) <= 0 or c.outside_value <= 0:
            raise InvalidArgument("stiffness profile must be strictly positive")


def assemble_stiffness_local(space, c=1.0):
    """Gram matrix of c(x) e_k' e_m' over (0, 1); exact for piecewise-constant c."""
    _check_positive_profile(c)
    p, h = space.degree, space.h
    nodes = space.mesh.nodes
    blocks = []
    for e in range(space.n_elements):
        a, b = nodes[e], nodes[e + 1]
        block = np.zeros((p + 1, p + 1))
        for lo, hi, val in _profile_pieces(c, a, b):
            if p == 1:
                block += val * (hi - lo) / h**2 * np.array([[1.0, -1.0], [-1.0, 1.0]])
            else:
                xq, wx = gauss_legendre(2, lo, hi)
                dphi = local_basis_deriv(2, (xq - a) / h) / h
                block += val * (dphi * wx) @ dphi.T
        blocks.append(block)
    return _symmetrize(_scatter(space, blocks))


def assemble_load(space, f):
    """Load vector of the volume term, Gauss rule with LOAD_QUAD_ORDER points."""
    p, h = space.degree, space.h
    nodes = space.mesh.nodes
    t, w = gauss_legendre(LOAD_QUAD_ORDER, 0.0, 1.0)
    x = nodes[:-1, None] + h * t[None, :]
    fx = _pointwise(f, x)
    phi = local_basis(p, t)
    local = h * (fx * w[None, :]) @ phi.T
    out = np.zeros(space.n_dofs)
    dofs = space.element_dofs()
    ok = dofs >= 0
    np.add.at(out, dofs[ok], local[ok])
    return out


def _pointwise(f, x):
    return np.vectorize(f, otypes=[float])(x)


def eval_fem(space, coeffs, x):
    """Value of the finite element function at x (scalar or array) in [0, 1]."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (space.n_dofs,):
        raise InvalidArgument(f"expected {space.n_dofs} coefficients, got {coeffs.shape}")
    xa = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(xa)) or np.any(xa < 0.0) or np.any(xa > 1.0):
        raise InvalidArgument("evaluation point outside [0, 1]")
    n, p = space.n_elements, space.degree
    e = np.minimum((xa * n).astype(int), n - 1)
    t = xa * n - e
    padded = np.concatenate([[0.0], coeffs, [0.0]])
    phi = local_basis(p, t)
    val = sum(phi[i] * padded[p * e + i] for i in range(p + 1))
    return float(val) if np.ndim(x) == 0 else val


def l2_error(space, coeffs, ref):
    """L2(0,1) distance between the FE function and `ref`, per-element Gauss
    with L2_QUAD_ORDER points (endpoints are never quadrature nodes)."""
    coeffs = np.asarray(coeffs, dtype=float)
    n, p, h = space.n_elements, space.degree, space.h
    t, w = gauss_legendre(L2_QUAD_ORDER, 0.0, 1.0)
    x = space.mesh.nodes[:-1, None] + h * t[None, :]
    padded = np.concatenate([[0.0], coeffs, [0.0]])
    phi = local_basis(p, t)
    idx = p * np.arange(n)[:, None] + np.arange(p + 1)[None, :]
    uh = padded[idx] @ phi
    r = _pointwise(ref, x)
    return float(np.sqrt(h * np.sum((uh - r) ** 2 * w[None, :])))


def interpolate(space, f):
    """Nodal interpolant coefficients of f (values at the dof points)."""
    return np.array([f(x) for x in space.dof_coordinates()], dtype=float)
