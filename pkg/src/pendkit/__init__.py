"""Numerical p-Laplacian potential theory on rotationally symmetric model ends."""
__version__ = "0.1.0"

from .errors import PendkitError  # noqa: E402
from .model_geometry import ModelManifold  # noqa: E402
from .radial_potential import HYPERBOLIC, PARABOLIC, classify_end, p_capacity  # noqa: E402
from .spectrum import lambda_manifold  # noqa: E402

__all__ = [
    "ModelManifold",
    "PendkitError",
    "PARABOLIC",
    "HYPERBOLIC",
    "classify_end",
    "p_capacity",
    "lambda_manifold",
    "__version__",
]
