"""Service basins: peak-seeded block clusters per tier.

Each tier groups blocks around local accessibility peaks within the
tier's living radius. Clusters are the unit of allocation; a cluster only
accepts new allocations while it retains enough unassigned area (the
integrity gate), which prevents fragmenting a basin into slivers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blockmap import Block

__all__ = ["Cluster", "ClusterHierarchy", "build_clusters", "eligible_clusters"]

DEFAULT_INTEGRITY_THRESHOLD = 0.6


@dataclass
class Cluster:
    id: int
    tier: int
    center_block: int
    members: list[int]


@dataclass
class ClusterHierarchy:
    """Per-tier partitions of the block set into clusters."""

    thresholds: list[float]
    tiers: list[list[Cluster]]

    def partition(self, tier: int) -> list[Cluster]:
        return self.tiers[tier]


def build_clusters(blocks: list[Block], tensor: np.ndarray,
                   thresholds: list[float]) -> ClusterHierarchy:
    """Greedy peak-seeded clustering, independently per tier.

    Repeatedly seed a cluster at the unassigned block with the highest
    tier score (ties by ascending block id) and absorb every unassigned
    block whose centroid lies within the tier threshold of the center's.
    """
    if len(thresholds) != tensor.shape[1]:
        raise ValueError("one distance threshold per tier required")
    if any(t <= 0 for t in thresholds):
        raise ValueError("thresholds must be positive")

    index_of = {b.id: i for i, b in enumerate(blocks)}
    tiers: list[list[Cluster]] = []
    for tier, radius in enumerate(thresholds):
        unassigned = set(b.id for b in blocks)
        clusters: list[Cluster] = []
        # Deterministic seeding order: score descending, id ascending.
        order = sorted((b.id for b in blocks),
                       key=lambda bid: (-tensor[index_of[bid], tier], bid))
        for seed in order:
            if seed not in unassigned:
                continue
            cx, cy = blocks[index_of[seed]].centroid
            members = [bid for bid in unassigned
                       if math.dist((cx, cy), blocks[index_of[bid]].centroid) <= radius]
            members.sort()
            unassigned.difference_update(members)
            clusters.append(Cluster(id=len(clusters), tier=tier,
                                    center_block=seed, members=members))
        tiers.append(clusters)
    return ClusterHierarchy(thresholds=list(thresholds), tiers=tiers)


def eligible_clusters(hierarchy: ClusterHierarchy, tier: int,
                      remaining: dict[int, float], lot_areas: dict[int, float],
                      tau_int: float = DEFAULT_INTEGRITY_THRESHOLD) -> set[int]:
    """Clusters whose remaining area is at least tau_int of their lot area."""
    if not 0.0 <= tau_int <= 1.0:
        raise ValueError("tau_int must lie in [0, 1]")
    out = set()
    for cluster in hierarchy.partition(tier):
        rem = sum(remaining[b] for b in cluster.members)
        tot = sum(lot_areas[b] for b in cluster.members)
        if rem >= tau_int * tot:
            out.add(cluster.id)
    return out
