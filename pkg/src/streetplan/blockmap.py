"""Transfer street-segment scores onto block polygons.

A block inherits, per tier, the maximum mixed score among its adjacent
segments (frontage logic: the best street serving the block sets its
accessibility). The resulting block x tier matrix is min-max normalized
per tier for the downstream allocation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from shapely.geometry import LineString, Polygon

from .netgraph import SegmentScoreMix, StreetNetwork

__all__ = [
    "Block",
    "associate_segments",
    "block_accessibility",
    "normalize_per_tier",
    "frontage_weighted_accessibility",
    "DEFAULT_ADJACENCY_BUFFER",
]

logger = logging.getLogger(__name__)

DEFAULT_ADJACENCY_BUFFER = 2.0  # meters; parcel casings rarely touch streets exactly


@dataclass
class Block:
    """One block/lot polygon in a projected meter CRS."""

    id: int
    polygon: Polygon
    lot_area: float
    centroid: tuple[float, float]

    @classmethod
    def from_polygon(cls, block_id: int, polygon: Polygon) -> "Block":
        if not polygon.is_valid or polygon.area <= 0:
            raise ValueError(f"block {block_id}: invalid or zero-area polygon")
        c = polygon.centroid
        return cls(id=block_id, polygon=polygon, lot_area=polygon.area,
                   centroid=(c.x, c.y))


def associate_segments(blocks: list[Block], network: StreetNetwork,
                       buffer: float = DEFAULT_ADJACENCY_BUFFER) -> dict[int, list[int]]:
    """Map each block to the segments intersecting its buffered polygon."""
    if buffer < 0:
        raise ValueError("buffer must be >= 0")
    lines = {seg.id: LineString(seg.geometry) for seg in network.segments}
    adjacency: dict[int, list[int]] = {}
    for block in blocks:
        dilated = block.polygon.buffer(buffer) if buffer > 0 else block.polygon
        hits = sorted(sid for sid, line in lines.items() if dilated.intersects(line))
        if not hits:
            logger.warning("block %s has no adjacent street segments", block.id)
        adjacency[block.id] = hits
    return adjacency


def block_accessibility(tier_scores: list[SegmentScoreMix],
                        adjacency: dict[int, list[int]],
                        block_ids: list[int]) -> np.ndarray:
    """Raw block x tier accessibility: max adjacent segment score per tier.

    Blocks with no adjacent segments score 0 everywhere but are kept so
    area accounting downstream stays exact.
    """
    tensor = np.zeros((len(block_ids), len(tier_scores)))
    for bi, block_id in enumerate(block_ids):
        segs = adjacency.get(block_id, [])
        for ti, field in enumerate(tier_scores):
            if segs:
                tensor[bi, ti] = max(field.scores[s] for s in segs)
    return tensor


def frontage_weighted_accessibility(tier_scores: list[SegmentScoreMix],
                                    adjacency: dict[int, list[int]],
                                    block_ids: list[int]) -> np.ndarray:
    """Hybrid aggregation: max score scaled by the share of strong frontages.

    A segment counts as strong when it clears the 75th percentile of the
    tier's score distribution. Dampens the salt-and-pepper bias of pure
    max aggregation; off by default.
    """
    tensor = np.zeros((len(block_ids), len(tier_scores)))
    for ti, field in enumerate(tier_scores):
        cutoff = float(np.percentile(field.scores, 75)) if field.scores else 0.0
        for bi, block_id in enumerate(block_ids):
            segs = adjacency.get(block_id, [])
            if not segs:
                continue
            peak = max(field.scores[s] for s in segs)
            strong = sum(1 for s in segs if field.scores[s] >= cutoff)
            tensor[bi, ti] = peak * (strong / len(segs))
    return tensor


def normalize_per_tier(tensor: np.ndarray) -> np.ndarray:
    """Min-max each tier column to [0, 1]; constant columns become zeros."""
    out = np.zeros_like(tensor, dtype=float)
    for ti in range(tensor.shape[1]):
        col = tensor[:, ti]
        span = col.max() - col.min()
        if span > 0:
            out[:, ti] = (col - col.min()) / span
    return out
