"""Greedy, priority-guided, tier-by-tier land-use assignment.

Land-use targets are pooled per tier (rank-sum tier weights), split across
eligible clusters by area share, and granted to blocks through per-cluster
priority queues keyed by tiered accessibility: activity-seeking uses go to
the most accessible blocks first, industrial/transport to the least
accessible at the coarse tier. Minimum parcel guards absorb sub-minimum
leftovers; whatever remains after all tiers becomes residential.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import Polygon, box
from shapely import affinity

from .basins import ClusterHierarchy, eligible_clusters
from .blockmap import Block

__all__ = [
    "USES",
    "GOOD_USES",
    "BAD_USES",
    "TIER_RANKS",
    "MIN_PARCEL_DEFAULTS",
    "DEFAULT_PRIORITY",
    "TierWeights",
    "Grant",
    "AllocationResult",
    "ShareDiagnostics",
    "level_pct",
    "allocate",
    "achieved_shares",
    "share_diagnostics",
    "split_geometry",
]

USES = ("R", "A", "G", "B", "I", "T", "E", "F")
GOOD_USES = frozenset({"A", "G", "B", "E", "F"})
BAD_USES = frozenset({"I", "T"})

# Rank-sum weights of the five-level service hierarchy, coarse to fine.
TIER_RANKS = {
    "city": 12,
    "district": 11,
    "life_circle": 10,
    "community_cluster": 9,
    "community": 8,
}

# Minimum leftover parcel area per tier (m^2).
MIN_PARCEL_DEFAULTS = {
    "city": 2500.0,
    "district": 2500.0,
    "life_circle": 2000.0,
    "community_cluster": 1000.0,
    "community": 500.0,
}

# Pro-business ordering used as the default planning intent.
DEFAULT_PRIORITY = ("B", "A", "E", "F", "G", "R", "I", "T")


@dataclass
class TierWeights:
    """Normalized rank-sum weights over the active tiers."""

    tiers: list[str]
    weights: dict[str, float]

    def pct(self, tier: str) -> float:
        return self.weights[tier]


def level_pct(active_tiers: list[str],
              rank_overrides: dict[str, float] | None = None) -> TierWeights:
    """Normalize the rank scores of the active tiers so they sum to 1."""
    if not active_tiers:
        raise ValueError("need at least one active tier")
    ranks = dict(TIER_RANKS)
    if rank_overrides:
        ranks.update(rank_overrides)
    for t in active_tiers:
        if t not in ranks:
            raise ValueError(f"unknown tier {t!r}")
    total = sum(ranks[t] for t in active_tiers)
    return TierWeights(tiers=list(active_tiers),
                       weights={t: ranks[t] / total for t in active_tiers})


@dataclass
class Grant:
    """One priority-queue grant, kept for auditing and property tests."""

    tier: int
    cluster: int
    use: str
    block: int
    amount: float
    key: float  # accessibility of the block at the tier
    forced: bool  # min-parcel guard consumed the whole block


@dataclass
class AllocationResult:
    block_ids: list[int]
    x: dict[int, dict[str, float]]  # block id -> use -> assigned m^2
    dominant: dict[int, str]
    lot_areas: dict[int, float]
    grants: list[Grant] = field(default_factory=list)

    @property
    def total_area(self) -> float:
        return sum(self.lot_areas.values())

    def shares(self, accounting: str = "mixed") -> dict[str, float]:
        """Achieved land-use shares under mixed or dominant accounting."""
        total = self.total_area
        if accounting == "mixed":
            return {u: sum(self.x[b][u] for b in self.block_ids) / total
                    for u in USES}
        if accounting == "dominant":
            out = {u: 0.0 for u in USES}
            for b in self.block_ids:
                out[self.dominant[b]] += self.lot_areas[b]
            return {u: a / total for u, a in out.items()}
        raise ValueError(f"unknown accounting {accounting!r}")

    def use_areas(self) -> dict[str, float]:
        return {u: sum(self.x[b][u] for b in self.block_ids) for u in USES}


def allocate(blocks: list[Block], tensor: np.ndarray,
             hierarchy: ClusterHierarchy, targets: dict[str, float],
             priority: tuple[str, ...] = DEFAULT_PRIORITY,
             tier_names: list[str] | None = None,
             min_parcels: dict[str, float] | None = None,
             tau_int: float = 0.6) -> AllocationResult:
    """Run the greedy tier-by-tier assignment over a clustered block set.

    ``targets`` maps each use to its site-wide target share (summing to 1);
    ``tier_names`` names the active tiers coarse to fine and must match the
    hierarchy's tier count. A pool a tier cannot absorb rolls down to the
    next finer tier; anything left after the finest tier lapses to
    residential along with the per-block residuals.
    """
    if not blocks:
        raise ValueError("no blocks to allocate")
    n_tiers = len(hierarchy.tiers)
    if tier_names is None:
        tier_names = _default_tier_names(n_tiers)
    if len(tier_names) != n_tiers:
        raise ValueError("tier_names must match hierarchy tier count")
    if set(priority) != set(USES):
        raise ValueError("priority must be a permutation of the use set")
    share_sum = sum(targets.get(u, 0.0) for u in USES)
    if any(targets.get(u, 0.0) < 0 for u in USES):
        raise ValueError("negative target share")
    if not math.isclose(share_sum, 1.0, rel_tol=1e-9, abs_tol=1e-9):
        raise ValueError(f"target shares sum to {share_sum}, expected 1")
    mins = dict(MIN_PARCEL_DEFAULTS)
    if min_parcels:
        mins.update(min_parcels)

    lot_areas = {b.id: b.lot_area for b in blocks}
    total_area = sum(lot_areas.values())
    if total_area <= 0:
        raise ValueError("zero total lot area")
    index_of = {b.id: i for i, b in enumerate(blocks)}
    weights = level_pct(tier_names)

    remaining = dict(lot_areas)
    x = {b.id: {u: 0.0 for u in USES} for b in blocks}
    grants: list[Grant] = []
    carry = {u: 0.0 for u in USES}

    for tier in range(n_tiers):
        name = tier_names[tier]
        m_min = mins.get(name, 0.0)
        pct = weights.pct(name)
        # Per-use pool for this tier: bad uses are carved out whole at the
        # top tier, good uses get their rank-sum slice at every tier.
        pools = {u: 0.0 for u in USES}
        for u in USES:
            if u == "R":
                continue
            if u in BAD_USES:
                if tier == 0:
                    pools[u] = targets.get(u, 0.0) * total_area
            else:
                pools[u] = targets.get(u, 0.0) * total_area * pct
            pools[u] += carry[u]
            carry[u] = 0.0

        avail = eligible_clusters(hierarchy, tier, remaining, lot_areas, tau_int)
        clusters = [c for c in hierarchy.partition(tier) if c.id in avail]
        if not clusters:
            for u in USES:
                carry[u] += pools[u]
            continue
        avail_area = sum(lot_areas[b] for c in clusters for b in c.members)
        for cluster in clusters:
            alpha = sum(lot_areas[b] for b in cluster.members) / avail_area
            for u in priority:
                target = alpha * pools[u]
                if u == "R" or target <= 0:
                    continue
                # Max-heap on accessibility for good uses, min-heap for bad;
                # ties broken by ascending block id for reproducibility.
                sign = -1.0 if u in GOOD_USES else 1.0
                heap = [(sign * tensor[index_of[b], tier], b)
                        for b in cluster.members if remaining[b] > 0]
                heapq.heapify(heap)
                while target > 1e-12 and heap:
                    key, b = heapq.heappop(heap)
                    give = min(remaining[b], target)
                    forced = False
                    if remaining[b] - give < m_min and remaining[b] >= m_min:
                        give = remaining[b]
                        forced = True
                    x[b][u] += give
                    remaining[b] -= give
                    target -= give
                    grants.append(Grant(tier=tier, cluster=cluster.id, use=u,
                                        block=b, amount=give,
                                        key=tensor[index_of[b], tier],
                                        forced=forced))
                    if remaining[b] > 1e-12:
                        heapq.heappush(heap, (key, b))
                if target > 1e-12:
                    carry[u] += target

    # Residual to residential.
    for b in list(remaining):
        if remaining[b] > 0:
            x[b]["R"] += remaining[b]
            remaining[b] = 0.0

    dominant = {}
    rank = {u: i for i, u in enumerate(priority)}
    for b in x:
        best = max(USES, key=lambda u: (x[b][u], -rank[u]))
        dominant[b] = best
    return AllocationResult(block_ids=[b.id for b in blocks], x=x,
                            dominant=dominant, lot_areas=lot_areas,
                            grants=grants)


def _default_tier_names(n: int) -> list[str]:
    ordered = ["city", "district", "life_circle", "community_cluster", "community"]
    if n > len(ordered):
        raise ValueError("at most five tiers supported by default naming")
    # Prefer the finest n tiers headed by "district" for the common 3-tier case.
    if n == 3:
        return ["district", "community_cluster", "community"]
    return ordered[-n:] if n < 5 else ordered


@dataclass
class ShareDiagnostics:
    achieved: dict[str, float]
    d_lu: float
    mae: float
    rmse: float


def share_diagnostics(achieved: dict[str, float],
                      target: dict[str, float]) -> ShareDiagnostics:
    """Squared-deviation, MAE, and RMSE between achieved and target shares."""
    uses = sorted(set(achieved) | set(target))
    diffs = [achieved.get(u, 0.0) - target.get(u, 0.0) for u in uses]
    d_lu = sum(d * d for d in diffs)
    mae = sum(abs(d) for d in diffs) / len(diffs)
    rmse = math.sqrt(d_lu / len(diffs))
    return ShareDiagnostics(achieved=dict(achieved), d_lu=d_lu, mae=mae, rmse=rmse)


def achieved_shares(result, target: dict[str, float],
                    accounting: str = "mixed") -> ShareDiagnostics:
    """Diagnostics for an allocation result or a pre-computed share vector."""
    if isinstance(result, AllocationResult):
        shares = result.shares(accounting)
    else:
        shares = dict(result)
    return share_diagnostics(shares, target)


def split_geometry(polygon: Polygon, ratios: dict[str, float],
                   tol: float = 1e-4) -> dict[str, Polygon]:
    """Split a polygon into strips with areas proportional to the ratios.

    Strips sweep along the major axis of the oriented bounding box; each
    cut position is found by bisection on the swept area. Ratios below the
    numeric resolution are merged into the neighboring strip.
    """
    items = [(u, r) for u, r in ratios.items() if r > 0]
    if not items:
        raise ValueError("ratios must contain a positive entry")
    total_ratio = sum(r for _, r in items)
    if not math.isclose(total_ratio, 1.0, rel_tol=1e-6, abs_tol=1e-9):
        raise ValueError("ratios must sum to 1")
    if len(items) == 1:
        return {items[0][0]: polygon}

    obb = polygon.minimum_rotated_rectangle
    coords = list(obb.exterior.coords)[:4]
    e1 = math.dist(coords[0], coords[1])
    e2 = math.dist(coords[1], coords[2])
    if e1 >= e2:
        p0, p1 = coords[0], coords[1]
    else:
        p0, p1 = coords[1], coords[2]
    angle = math.degrees(math.atan2(p1[1] - p0[1], p1[0] - p0[0]))

    # Rotate so the major axis is horizontal, sweep vertical cuts, rotate back.
    origin = polygon.centroid
    rotated = affinity.rotate(polygon, -angle, origin=origin)
    minx, miny, maxx, maxy = rotated.bounds
    pad = 1.0
    area_total = rotated.area

    def area_left_of(cut: float) -> float:
        clip = box(minx - pad, miny - pad, cut, maxy + pad)
        return rotated.intersection(clip).area

    pieces: dict[str, Polygon] = {}
    lo = minx
    cum = 0.0
    for idx, (use, ratio) in enumerate(items):
        cum += ratio / total_ratio
        if idx == len(items) - 1:
            hi = maxx
        else:
            target = cum * area_total
            a, b = lo, maxx
            for _ in range(80):
                mid = (a + b) / 2
                if area_left_of(mid) < target:
                    a = mid
                else:
                    b = mid
            hi = (a + b) / 2
        strip = rotated.intersection(box(lo - (pad if idx == 0 else 0.0),
                                         miny - pad, hi + (pad if idx == len(items) - 1 else 0.0),
                                         maxy + pad))
        pieces[use] = affinity.rotate(strip, angle, origin=origin)
        lo = hi
    return pieces
