"""Sachs equations, symplectic orbits and conjugate points of homogeneous plane waves."""

from . import dim2, efuncs, matcore, oracle, orbit, planewave, riccati, sachs_flow, sachs_series
from .errors import (
    AccuracyError,
    ConsistencyError,
    DegeneracyError,
    InvalidInputError,
    MicrocosmError,
    NumericalError,
    PoleError,
)

__version__ = "0.1.0"

__all__ = [
    "dim2",
    "efuncs",
    "matcore",
    "oracle",
    "orbit",
    "planewave",
    "riccati",
    "sachs_flow",
    "sachs_series",
    "MicrocosmError",
    "InvalidInputError",
    "PoleError",
    "NumericalError",
    "DegeneracyError",
    "ConsistencyError",
    "AccuracyError",
]
