"""Interaction kernels Ã(d) of the nonlocal model and their exact integrals.

Four kernels are supported:

``cubic``       Ã(d) = 1 - d^2 + d^3/3        (smooth, ill-posed)
``linear``      Ã(d) = 1 - d                  (form equals twice the L2 product)
``riesz``       Ã(d) = d^(α-1) / c_α          (Riesz potential, 0 < α < 1)
``riesz-half``  Ã(d) = d^(α/2-1) / c_(α/2)    (half-order factor of ``riesz``)
"""
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, SingularEvaluation, UnsupportedOperation
from .quadrature import gauss_legendre

# Lanczos approximation, g = 7, nine terms (Godfrey's coefficients).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def gamma(x):
    """Euler's Gamma function for 0 < x <= 100."""
    x = float(x)
    if not (x > 0.0) or x > 100.0 or math.isnan(x):
        raise InvalidArgument(f"gamma is defined here for 0 < x <= 100, got {x!r}")
    if x < 0.5:
        # the series loses accuracy near zero; shift up one step
        return gamma(x + 1.0) / x
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.exp(_HALF_LOG_2PI + (z + 0.5) * math.log(t) - t) * acc


def riesz_constant(alpha, n=1):
    """Normalization c_α = π^(n/2) 2^α Γ(α/2) / Γ((n-α)/2) of the Riesz kernel."""
    alpha = float(alpha)
    if n not in (1, 2, 3):
        raise InvalidArgument(f"dimension must be 1, 2 or 3, got {n!r}")
    if not (0.0 < alpha < n):
        raise InvalidArgument(f"need 0 < alpha < {n}, got {alpha!r}")
    return math.pi ** (n / 2.0) * 2.0**alpha * gamma(alpha / 2.0) / gamma((n - alpha) / 2.0)


class Variant(enum.Enum):
    SMOOTH_CUBIC = "cubic"
    LINEAR = "linear"
    RIESZ = "riesz"
    RIESZ_HALF = "riesz-half"


@dataclass(frozen=True)
class KernelSpec:
    variant: Variant
    alpha: float | None = None

    def __post_init__(self):
        if not isinstance(self.variant, Variant):
            object.__setattr__(self, "variant", Variant(self.variant))
        if self.is_riesz:
            if self.alpha is None or not (0.0 < float(self.alpha) < 1.0):
                raise InvalidArgument(f"Riesz kernels need 0 < alpha < 1, got {self.alpha!r}")
            object.__setattr__(self, "alpha", float(self.alpha))
        elif self.alpha is not None:
            raise InvalidArgument(f"{self.variant.value} kernel takes no alpha")

    @classmethod
    def cubic(cls):
        return cls(Variant.SMOOTH_CUBIC)

    @classmethod
    def linear(cls):
        return cls(Variant.LINEAR)

    @classmethod
    def riesz(cls, alpha):
        return cls(Variant.RIESZ, alpha)

    @classmethod
    def riesz_half(cls, alpha):
        return cls(Variant.RIESZ_HALF, alpha)

    @property
    def is_riesz(self):
        return self.variant in (Variant.RIESZ, Variant.RIESZ_HALF)

    @property
    def exponent(self):
        """β such that Ã(d) ∝ d^(β-1); None for the polynomial kernels."""
        if self.variant is Variant.RIESZ:
            return self.alpha
        if self.variant is Variant.RIESZ_HALF:
            return 0.5 * self.alpha
        return None

    @property
    def scale(self):
        """1 / c_β for Riesz variants, 1 otherwise."""
        if self.is_riesz:
            return 1.0 / riesz_constant(self.exponent, 1)
        return 1.0

    def __str__(self):
        if self.is_riesz:
            return f"{self.variant.value}:{self.alpha!r}"
        return self.variant.value


def parse_kernel(text):
    """Parse ``cubic``, ``linear``, ``riesz:<alpha>`` or ``riesz-half:<alpha>``."""
    name, _, arg = text.strip().partition(":")
    try:
        variant = Variant(name)
    except ValueError:
        raise InvalidArgument(f"unknown kernel {text!r}") from None
    if variant in (Variant.RIESZ, Variant.RIESZ_HALF):
        try:
            alpha = float(arg)
        except ValueError:
            raise InvalidArgument(f"kernel {text!r} needs a numeric alpha") from None
        return KernelSpec(variant, alpha)
    if arg:
        raise InvalidArgument(f"kernel {name!r} takes no parameter")
    return KernelSpec(variant)


def _poly_value(variant, d):
    if variant is Variant.SMOOTH_CUBIC:
        return 1.0 - d * d + d * d * d / 3.0
    return 1.0 - d


def eval_kernel(spec, d):
    d = float(d)
    if d < 0.0:
        raise InvalidArgument(f"distance must be non-negative, got {d!r}")
    if spec.is_riesz:
        if d == 0.0:
            raise SingularEvaluation("Riesz kernel is singular at d = 0; integrate with double_primitive")
        return spec.scale * d ** (spec.exponent - 1.0)
    return _poly_value(spec.variant, d)


def neg_laplacian(spec, d):
    """-Ã''(|d|) = 2(1 - |d|) on (-1, 1); only the cubic kernel has a function here."""
    if spec.variant is not Variant.SMOOTH_CUBIC:
        raise UnsupportedOperation(
            f"-Laplacian of the {spec.variant.value} kernel is a distribution, not a function"
        )
    d = abs(float(d))
    if d > 1.0:
        raise InvalidArgument(f"|d| must be <= 1, got {d!r}")
    return 2.0 * (1.0 - d)


def riesz_second_primitive(t, beta):
    """G(t) = |t|^(β+1) / (β(β+1)), the even function with G'' = |t|^(β-1)."""
    return np.abs(t) ** (beta + 1.0) / (beta * (beta + 1.0))


def _self_pair(variant, w):
    """∫∫ over [0,w]^2 of Ã(|x-y|) = 2 ∫_0^w (w-t) Ã(t) dt for the polynomial kernels."""
    if variant is Variant.SMOOTH_CUBIC:
        return w * w - w**4 / 6.0 + w**5 / 30.0
    return w * w - w**3 / 3.0


def _disjoint_pair(variant, a, b, c, d):
    # x - y has a fixed sign here, so the integrand is a cubic polynomial
    x, wx = gauss_legendre(3, a, b)
    y, wy = gauss_legendre(3, c, d)
    vals = _poly_value(variant, np.abs(x[:, None] - y[None, :]))
    return float(wx @ vals @ wy)


def double_primitive(spec, a, b, c, d):
    """Exact ∫_a^b ∫_c^d Ã(|x - y|) dy dx over a rectangle in [0, 1]^2."""
    a, b, c, d = (float(v) for v in (a, b, c, d))
    if a > b or c > d:
        raise InvalidArgument("rectangle bounds must satisfy a <= b and c <= d")
    if a == b or c == d:
        return 0.0
    if spec.is_riesz:
        beta = spec.exponent
        G = riesz_second_primitive
        # grouped so that swapping the two intervals gives the same bits
        return spec.scale * float((G(b - c, beta) + G(a - d, beta)) - (G(a - c, beta) + G(b - d, beta)))
    if (c, d) < (a, b):
        a, b, c, d = c, d, a, b
    # split both intervals at every endpoint so that each piece pair is
    # either the same interval or two intervals with disjoint interiors
    cuts = sorted({a, b, c, d})
    xs = [(lo, hi) for lo, hi in zip(cuts[:-1], cuts[1:]) if a <= lo and hi <= b]
    ys = [(lo, hi) for lo, hi in zip(cuts[:-1], cuts[1:]) if c <= lo and hi <= d]
    total = 0.0
    for xa, xb in xs:
        for ya, yb in ys:
            if xa == ya:
                total += _self_pair(spec.variant, xb - xa)
            else:
                total += _disjoint_pair(spec.variant, xa, xb, ya, yb)
    return total


def mercer_probe(spec, N):
    """Smallest eigenvalue of the kernel's Gram matrix on N uniform cell indicators."""
    if isinstance(N, bool) or int(N) != N or not 1 <= N <= 512:
        raise InvalidArgument(f"N must be an integer in [1, 512], got {N!r}")
    N = int(N)
    edges = np.arange(N + 1) / N
    gram = np.empty((N, N))
    for i in range(N):
        for j in range(i, N):
            gram[i, j] = gram[j, i] = double_primitive(spec, edges[i], edges[i + 1], edges[j], edges[j + 1])
    return float(np.linalg.eigvalsh(gram)[0])
