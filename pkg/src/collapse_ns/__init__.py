"""Compressible flow on thin domains collapsing onto a one-dimensional base."""

from .geometry import (
    BaseGrid,
    FiberProfile,
    ThinGrid,
    boundary_frame,
    build_profile,
    d2log_area,
    dlog_area,
    domain_measure,
)
from .thermo import PressureLaw, Renormalization, coercivity_scan, entropy_integrand, renorm_H

__version__ = "0.1.0"

__all__ = [
    "BaseGrid",
    "FiberProfile",
    "PressureLaw",
    "Renormalization",
    "ThinGrid",
    "boundary_frame",
    "build_profile",
    "coercivity_scan",
    "d2log_area",
    "dlog_area",
    "domain_measure",
    "entropy_integrand",
    "renorm_H",
]
