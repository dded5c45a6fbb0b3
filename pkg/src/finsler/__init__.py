"""Numerical Finsler geometry on the slit tangent bundle.

Energy functions are expanded into truncated Taylor jets; the spray, the
Barthel connection, the Berwald, Cartan, Chern and Hashiguchi connections,
their torsion and curvature are computed from those jets, and a registry of
identities is evaluated as numerical residuals.
"""

from __future__ import annotations

from .connections import (ConnectionKind, coefficients, curvature, torsion)
from .errors import (BadParams, DimensionMismatch, DomainError, FinslerError, OrderTooHigh,
                     ParseError, SingularMetric, UnknownIdentifier, UnknownMetric)
from .expr import parse_energy
from .geometry import metric, nonlinear_connection, spray
from .jets import Jet, ScalarField, TangentPoint, eval_jet, fd_partial
from .metrics import builtin_metric, resolve
from .verify import compare_connections, run_suite

__version__ = "0.1.0"

__all__ = [
    "BadParams", "ConnectionKind", "DimensionMismatch", "DomainError", "FinslerError", "Jet",
    "OrderTooHigh", "ParseError", "ScalarField", "SingularMetric", "TangentPoint",
    "UnknownIdentifier", "UnknownMetric", "builtin_metric", "coefficients", "compare_connections",
    "curvature", "eval_jet", "fd_partial", "metric", "nonlinear_connection", "parse_energy",
    "resolve", "run_suite", "spray", "torsion",
]
