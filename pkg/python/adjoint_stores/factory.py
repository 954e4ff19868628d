"""
Construction of thread-local adjoint stores per strategy.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from adjoint_stores.base import AdjointStore, CostModel
from adjoint_stores.dense import FullLocalVector, OffsetLocalVector
from adjoint_stores.maps import HashMapStore, OrderedMapStore


class LocalStrategy(Enum):
    FULL_VECTOR = "full_vector"
    OFFSET_VECTOR = "offset_vector"
    ORDERED_MAP = "ordered_map"
    HASH_MAP = "hash_map"


@dataclass(frozen=True)
class RegionInfo:
    """Identifier bounds of a region and the largest identifier assigned so far."""
    min_id: int
    max_id: int
    i_max: int

    def __post_init__(self):
        if not 0 <= self.min_id <= self.max_id <= self.i_max:
            raise ValueError(
                f"Inconsistent region info: need 0 <= min_id ({self.min_id}) <= max_id ({self.max_id}) "
                f"<= i_max ({self.i_max})"
            )


def make_local_store(strategy, region_info: RegionInfo, cost_model: Optional[CostModel] = None,
                     instrumented: bool = True) -> AdjointStore:
    """
    Create a fresh local store for one region.

    full_vector is sized i_max + 1, offset_vector max - min + 1; map stores start empty.
    """
    strategy = LocalStrategy(strategy)
    cost_model = cost_model or CostModel()

    if strategy is LocalStrategy.FULL_VECTOR:
        return FullLocalVector(region_info.i_max, cost_model.dense_slot_bytes, instrumented)
    if strategy is LocalStrategy.OFFSET_VECTOR:
        return OffsetLocalVector(region_info.min_id, region_info.max_id, cost_model.dense_slot_bytes, instrumented)
    if strategy is LocalStrategy.ORDERED_MAP:
        return OrderedMapStore(cost_model.ordered_entry_bytes, instrumented)
    return HashMapStore(cost_model.hash_entry_bytes, instrumented)
