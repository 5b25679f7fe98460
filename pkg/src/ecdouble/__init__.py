"""Reversible circuits for binary elliptic curve point addition and doubling."""

from .circuit import Circuit, Gate, ResourceReport, resources
from .ecops import Scheme, build, build_point_add, build_point_double, census, verify
from .gf2m import AffinePoint, CurveParams, FieldElement, FieldParams

__version__ = "0.1.0"

__all__ = [
    "AffinePoint",
    "Circuit",
    "CurveParams",
    "FieldElement",
    "FieldParams",
    "Gate",
    "ResourceReport",
    "Scheme",
    "build",
    "build_point_add",
    "build_point_double",
    "census",
    "resources",
    "verify",
]
