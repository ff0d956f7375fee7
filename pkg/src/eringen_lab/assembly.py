"""Nonlocal stiffness matrices: homogeneous kernels, the local/nonlocal
mixture, and the heterogeneous Riesz form built from half-order strains.
"""
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import InvalidArgument, TruncationTooSmall, UnsupportedOperation
from .kernels import KernelSpec, Variant, _poly_value, riesz_constant
from .mesh_fem import _symmetrize, assemble_stiffness_local, local_basis_deriv
from .quadrature import composite_rule, duffy_triangle_rule, gauss_legendre, geometric_breaks, graded_breaks

P2_PAIR_ORDER = 8
STRAIN_QUAD_ORDER = 16
# geometric refinement of every strain panel toward mesh nodes, where the
# half-order strains have |z - x_j|^(α/2) cusps
GRADING_RATIO = 0.15
GRADING_LEVELS = 8
DEFAULT_TAIL_TOL = 1e-8

_KIND = {Variant.LINEAR: 0, Variant.SMOOTH_CUBIC: 1, Variant.RIESZ: 2, Variant.RIESZ_HALF: 2}


@dataclass(frozen=True)
class StiffnessProfile:
    """Piecewise-constant stiffness c(x) on (0, 1) with a constant value outside.

    ``values[i]`` holds on the i-th interval cut out by ``breakpoints``.
    """

    breakpoints: tuple = ()
    values: tuple = (1.0,)
    outside_value: float = 1.0

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "outside_value", float(self.outside_value))
        if len(vals) != len(bp) + 1:
            raise InvalidArgument(f"{len(bp)} breakpoints need {len(bp) + 1} values, got {len(vals)}")
        if any(not 0.0 < b < 1.0 for b in bp) or any(b1 >= b2 for b1, b2 in zip(bp, bp[1:])):
            raise InvalidArgument("breakpoints must be strictly increasing inside (0, 1)")
        if min(vals) <= 0.0 or self.outside_value <= 0.0:
            raise InvalidArgument("stiffness values must be strictly positive")

    @classmethod
    def constant(cls, value, outside=None):
        return cls((), (value,), value if outside is None else outside)

    @property
    def c_lower(self):
        return min(*self.values, self.outside_value)

    @property
    def c_upper(self):
        return max(*self.values, self.outside_value)

    @property
    def is_constant(self):
        return len(set(self.values)) == 1

    def value_at(self, x):
        xa = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.breakpoints, xa, side="right")
        out = np.asarray(self.values)[idx]
        out = np.where((xa < 0.0) | (xa > 1.0), self.outside_value, out)
        return float(out) if np.ndim(x) == 0 else out

    def to_text(self):
        fmt = ",".join
        return (
            f"breakpoints={fmt(repr(b) for b in self.breakpoints)}; "
            f"values={fmt(repr(v) for v in self.values)}; outside={self.outside_value!r}"
        )


def parse_profile(text):
    """Parse ``breakpoints=0.5; values=1,2; outside=1`` (a bare number means constant)."""
    text = text.strip()
    try:
        return StiffnessProfile.constant(float(text))
    except ValueError:
        pass
    fields = {}
    for part in text.split(";"):
        if not part.strip():
            continue
        key, sep, val = part.partition("=")
        if not sep:
            raise InvalidArgument(f"malformed profile field {part!r}")
        fields[key.strip()] = val.strip()
    unknown = set(fields) - {"breakpoints", "values", "outside"}
    if unknown:
        raise InvalidArgument(f"unknown profile fields {sorted(unknown)}")

    def floats(s):
        return tuple(float(v) for v in s.split(",") if v.strip())

    try:
        values = floats(fields.get("values", "1"))
        return StiffnessProfile(
            floats(fields.get("breakpoints", "")),
            values,
            float(fields["outside"]) if "outside" in fields else min(values),
        )
    except ValueError as exc:
        raise InvalidArgument(f"malformed profile {text!r}: {exc}") from None


@dataclass(frozen=True)
class OuterDomainMode:
    """Where the outer (strain-energy) integral runs.

    ``full``: the whole line, truncated to [-L, 1+L] with a certified tail
    bound below ``tail_tol`` (``L=None`` picks the smallest admissible L).
    ``domain``: only (0, 1).
    """

    kind: str = "full"
    truncation: float | None = None
    tail_tol: float = DEFAULT_TAIL_TOL

    def __post_init__(self):
        if self.kind not in ("full", "domain"):
            raise InvalidArgument(f"outer domain must be 'full' or 'domain', got {self.kind!r}")
        if self.truncation is not None and not self.truncation > 0:
            raise InvalidArgument("truncation length must be positive")
        if not self.tail_tol > 0:
            raise InvalidArgument("tail tolerance must be positive")

    @classmethod
    def full_line(cls, truncation=None, tail_tol=DEFAULT_TAIL_TOL):
        return cls("full", truncation, tail_tol)

    @classmethod
    def domain_only(cls):
        return cls("domain")


def parse_mode(text):
    """Parse ``domain``, ``full`` or ``full:L=<len>,tol=<tol>``."""
    name, _, args = text.strip().partition(":")
    if name == "domain":
        if args:
            raise InvalidArgument("'domain' mode takes no parameters")
        return OuterDomainMode.domain_only()
    if name != "full":
        raise InvalidArgument(f"unknown outer-domain mode {text!r}")
    kw = {}
    for part in filter(None, (p.strip() for p in args.split(","))):
        key, _, val = part.partition("=")
        try:
            kw[{"L": "truncation", "tol": "tail_tol"}[key.strip()]] = float(val)
        except (KeyError, ValueError):
            raise InvalidArgument(f"malformed mode parameter {part!r}") from None
    return OuterDomainMode.full_line(**kw)


def _p2_offset_blocks(variant, n, order=P2_PAIR_ORDER):
    """3x3 element-pair blocks B[o] for offsets o = f - e in (-n, n), uniform mesh.

    In reference coordinates the h factors of the derivatives cancel the
    Jacobian, leaving B[o]_ij = ∫∫ Ã(h|t - u - o|) ψ_i'(t) ψ_j'(u) dt du.
    """
    h = 1.0 / n
    t, wt = gauss_legendre(order, 0.0, 1.0)
    dpsi = local_basis_deriv(2, t) * wt[None, :]
    offsets = np.arange(-(n - 1), n)
    dist = h * np.abs(t[None, :, None] - t[None, None, :] - offsets[:, None, None])
    blocks = np.einsum("it,otu,ju->oij", dpsi, _poly_value(variant, dist), dpsi)
    # the diagonal pair has a kink along t = u: integrate the two triangles
    x, y, w = duffy_triangle_rule(order, 1.0)
    vals = _poly_value(variant, h * (x - y)) * w
    tri = (local_basis_deriv(2, x) * vals) @ local_basis_deriv(2, y).T
    blocks[n - 1] = tri + tri.T
    return blocks


def _p2_nonlocal(space, spec):
    n = space.n_elements
    blocks = _p2_offset_blocks(spec.variant, n)
    e = np.arange(n)
    big = blocks[e[None, :] - e[:, None] + n - 1]  # (n, n, 3, 3) indexed [e, f]
    big = big.transpose(0, 2, 1, 3).reshape(3 * n, 3 * n)
    assemble = np.zeros((3 * n, space.n_dofs))
    dofs = space.element_dofs()
    rows = np.arange(3 * n).reshape(n, 3)
    ok = dofs >= 0
    assemble[rows[ok], dofs[ok]] = 1.0
    K = assemble.T @ big @ assemble
    return _symmetrize(K)


def assemble_nonlocal_stiffness(space, spec, C_const=1.0):
    """K_km = C ∫∫ Ã(|x - x'|) e_k'(x) e_m'(x') dx' dx over (0,1)^2."""
    if not (np.isscalar(C_const) and C_const > 0):
        raise InvalidArgument(f"stiffness constant must be a positive number, got {C_const!r}")
    if space.degree == 1:
        K = _backend.core.p1_nonlocal(
            space.mesh.nodes, _KIND[spec.variant], spec.exponent or 0.0, spec.scale
        )
    elif spec.is_riesz:
        raise UnsupportedOperation("Riesz kernels are assembled only for p = 1")
    else:
        K = _p2_nonlocal(space, spec)
    return K if C_const == 1.0 else C_const * K


def _constant_stiffness(c):
    if np.isscalar(c):
        if not c > 0:
            raise InvalidArgument(f"stiffness must be positive, got {c!r}")
        return float(c)
    if not c.is_constant:
        raise InvalidArgument("the mixture model needs a constant stiffness")
    return c.values[0]


def assemble_mixture(space, spec, m, c=1.0):
    """B = m * (local stiffness) + (1 - m) * (nonlocal stiffness), 0 < m <= 1."""
    if not (np.isscalar(m) and 0.0 < m <= 1.0):
        raise InvalidArgument(f"mixture fraction must lie in (0, 1], got {m!r}")
    C = _constant_stiffness(c)
    local = assemble_stiffness_local(space, C)
    nonlocal_ = assemble_nonlocal_stiffness(space, spec, C)
    return m * local + (1.0 - m) * nonlocal_


def _require_p1_alpha(space, alpha):
    if space.degree != 1:
        raise UnsupportedOperation("half-order strains are implemented for p = 1 only")
    if not 0.0 < alpha < 1.0:
        raise InvalidArgument(f"need 0 < alpha < 1, got {alpha!r}")


def strain_matrix(space, alpha, z):
    """S[k, q]: half-order nonlocal strain of basis function k at z_q."""
    _require_p1_alpha(space, alpha)
    half = KernelSpec.riesz_half(alpha)
    return _backend.core.p1_strain_matrix(space.mesh.nodes, np.atleast_1d(z), half.exponent, half.scale)


def nonlocal_strain(space, coeffs, alpha, z):
    """∫_Ω Ã_{α/2}(|z - x|) u_h'(x) dx for the P1 function with `coeffs`."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (space.n_dofs,):
        raise InvalidArgument(f"expected {space.n_dofs} coefficients, got {coeffs.shape}")
    vals = coeffs @ strain_matrix(space, alpha, z)
    return float(vals[0]) if np.ndim(z) == 0 else vals


def strain_envelope(space, alpha):
    """E with |strain(e_k; z)| <= E dist(z, Ω)^(α/2 - 2) for every basis function.

    Integrating by parts moves the derivative onto the kernel:
    |∂_x Ã_β(|z - x|)| = (1 - β) |z - x|^(β-2) / c_β, and ||e_k||_L1 <= h.
    """
    beta = 0.5 * alpha
    return (1.0 - beta) / riesz_constant(beta, 1) * space.h


def tail_bound(space, alpha, outside_value, truncation):
    """Certified bound on every entry's contribution from |z| beyond [-L, 1+L]."""
    E = strain_envelope(space, alpha)
    return 2.0 * outside_value * E**2 * truncation ** (alpha - 3.0) / (3.0 - alpha)


def minimal_truncation(space, alpha, outside_value, tail_tol):
    E = strain_envelope(space, alpha)
    return (2.0 * outside_value * E**2 / ((3.0 - alpha) * tail_tol)) ** (1.0 / (3.0 - alpha))


def outer_rule(space, profile, mode, alpha):
    """Quadrature (z, w) for the outer integral of the heterogeneous form."""
    nodes = space.mesh.nodes
    inner = np.union1d(nodes, [b for b in profile.breakpoints])
    mesh_node = set(nodes.tolist())
    pieces = []
    for a, b in zip(inner[:-1], inner[1:]):
        pieces.append(graded_breaks(a, b, GRADING_RATIO, GRADING_LEVELS, left=a in mesh_node, right=b in mesh_node))
    zs, ws = [], []
    for br in pieces:
        z, w = composite_rule(br, STRAIN_QUAD_ORDER)
        zs.append(z)
        ws.append(w)
    if mode.kind == "full":
        L = mode.truncation
        if L is None:
            L = minimal_truncation(space, alpha, profile.outside_value, mode.tail_tol)
        bound = tail_bound(space, alpha, profile.outside_value, L)
        if bound > mode.tail_tol:
            need = minimal_truncation(space, alpha, profile.outside_value, mode.tail_tol)
            raise TruncationTooSmall(
                f"truncation L={L:g} leaves a tail bound {bound:.3e} > {mode.tail_tol:.3e}; need L >= {need:.6g}",
                need,
            )
        h = space.h
        near = graded_breaks(1.0, 1.0 + min(h, L), GRADING_RATIO, GRADING_LEVELS, left=True, right=False)
        far = geometric_breaks(1.0 + min(h, L), h, 1.0 + L)
        right = np.concatenate([near, far[1:]])
        z, w = composite_rule(right, STRAIN_QUAD_ORDER)
        zs += [1.0 - z[::-1], z]  # the left tail mirrors the right one about 1/2
        ws += [w[::-1], w]
    z = np.concatenate(zs)
    w = np.concatenate(ws)
    order = np.argsort(z, kind="stable")
    return z[order], w[order]


def assemble_heterogeneous(space, alpha, c, mode=None, chunk=4096):
    """K_km = ∫_Z c(z) s_k(z) s_m(z) dz with half-order strains s_k."""
    _require_p1_alpha(space, alpha)
    mode = OuterDomainMode.full_line() if mode is None else mode
    if np.isscalar(c):
        c = StiffnessProfile.constant(c)
    z, w = outer_rule(space, c, mode, alpha)
    cw = w * c.value_at(z)
    n = space.n_dofs
    K = np.zeros((n, n))
    for s in range(0, len(z), chunk):
        S = strain_matrix(space, alpha, z[s : s + chunk])
        K += (S * cw[s : s + chunk]) @ S.T
    return 0.5 * (K + K.T)
