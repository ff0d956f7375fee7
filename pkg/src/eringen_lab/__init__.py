"""One-dimensional nonlocal (Eringen-type) elasticity: kernels, finite
element assembly, and the numerical experiments built on them."""
from ._backend import NAME as BACKEND
from .errors import (
    EringenLabError,
    InvalidArgument,
    NotPositiveDefinite,
    NumericFailure,
    SingularEvaluation,
    TruncationTooSmall,
    UnsupportedOperation,
)
from .kernels import KernelSpec, Variant, parse_kernel
from .mesh_fem import FemSpace, Mesh1D, build_space

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "EringenLabError",
    "FemSpace",
    "InvalidArgument",
    "KernelSpec",
    "Mesh1D",
    "NotPositiveDefinite",
    "NumericFailure",
    "SingularEvaluation",
    "TruncationTooSmall",
    "UnsupportedOperation",
    "Variant",
    "build_space",
    "parse_kernel",
]
