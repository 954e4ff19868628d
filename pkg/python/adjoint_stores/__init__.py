"""Adjoint and tangent storage strategies."""

from adjoint_stores.base import (
    AdjointStore, CostModel, MEMORY_REPORT_COLUMNS, StoreAccessError, StoreCounters,
    StoreMemoryReport, write_memory_reports_csv,
)
from adjoint_stores.dense import DenseAdjointVector, FullLocalVector, OffsetLocalVector
from adjoint_stores.maps import HashMapStore, MapAdjointStore, OrderedMapStore
from adjoint_stores.shared import ReadWriteGuard, SharedGlobalVector, SharedMode
from adjoint_stores.factory import LocalStrategy, RegionInfo, make_local_store

__all__ = [
    "AdjointStore", "CostModel", "MEMORY_REPORT_COLUMNS", "StoreAccessError", "StoreCounters",
    "StoreMemoryReport", "write_memory_reports_csv",
    "DenseAdjointVector", "FullLocalVector", "OffsetLocalVector",
    "HashMapStore", "MapAdjointStore", "OrderedMapStore",
    "ReadWriteGuard", "SharedGlobalVector", "SharedMode",
    "LocalStrategy", "RegionInfo", "make_local_store",
]
