"""
Identifier remapping: rewrite a region's identifiers to the contiguous range
1..|V| so a small dense vector can hold its adjoints.
"""

from enum import Enum

from sortedcontainers import SortedDict

from preaccumulation.region import PreaccRegion, RegionError


class MapKind(Enum):
    ORDERED = "ordered"
    HASHED = "hashed"


class IdentifierRemap:
    """Injective map from original identifiers onto {1, ..., size}."""

    def __init__(self, kind: MapKind = MapKind.HASHED):
        self.kind = MapKind(kind)
        self.mapping = SortedDict() if self.kind is MapKind.ORDERED else {}
        self.next = 1
        self.map_ops = 0

    def lookup(self, original: int) -> int:
        """Offer (original, next); next advances only if original was absent."""
        self.map_ops += 1
        mapped = self.mapping.setdefault(original, self.next)
        if mapped == self.next:
            self.next += 1
        return mapped

    @property
    def size(self) -> int:
        return len(self.mapping)

    def __getitem__(self, original: int) -> int:
        return self.mapping[original]

    def __len__(self) -> int:
        return len(self.mapping)


def remap_and_edit(region: PreaccRegion, map_kind=MapKind.HASHED) -> IdentifierRemap:
    """
    Single pass over the declared inputs and the region statements (arguments
    before the lhs), rewriting the tape in place with contiguous identifiers.
    The region keeps its declared identifiers alongside the remapped ones.
    """
    if not region.closed:
        raise RegionError("Region must be closed before remapping")
    if region.finished:
        raise RegionError("Region already preaccumulated")
    if region.remapped_inputs is not None:
        raise RegionError("Region already remapped")

    remap = IdentifierRemap(map_kind)
    lookup = remap.lookup
    tape = region.tape
    lhs, arg_start, _, rhs = tape.columns()

    remapped_inputs = [lookup(identifier) for identifier in region.inputs]

    for index in range(region.start.index, region.end.index):
        first = arg_start[index]
        for j in range(first, arg_start[index + 1]):
            tape.rewrite_identifier(index, j - first, lookup(rhs[j]))
        tape.rewrite_identifier(index, None, lookup(lhs[index]))

    region.remapped_inputs = remapped_inputs
    region.remapped_outputs = [lookup(identifier) for identifier in region.outputs]
    return remap
