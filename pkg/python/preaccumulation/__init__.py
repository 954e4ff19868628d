"""Region marking, Jacobian preaccumulation and identifier remapping."""

from preaccumulation.region import (
    INTERMEDIATE_ESCAPES, JacobianBlock, OUTPUT_NOT_ASSIGNED, PreaccRegion, RegionError,
    RegionViolation, UNDECLARED_EXTERNAL_READ, begin_region, validate_region,
)
from preaccumulation.jacobian import SweepMode, build_replacement, compute_jacobian, select_mode
from preaccumulation.remap import IdentifierRemap, MapKind, remap_and_edit
from preaccumulation.helper import PREACC_STRATEGIES, PreaccStats, PreaccumulationHelper, Strategy

__all__ = [
    "INTERMEDIATE_ESCAPES", "JacobianBlock", "OUTPUT_NOT_ASSIGNED", "PreaccRegion", "RegionError",
    "RegionViolation", "UNDECLARED_EXTERNAL_READ", "begin_region", "validate_region",
    "SweepMode", "build_replacement", "compute_jacobian", "select_mode",
    "IdentifierRemap", "MapKind", "remap_and_edit",
    "PREACC_STRATEGIES", "PreaccStats", "PreaccumulationHelper", "Strategy",
]
