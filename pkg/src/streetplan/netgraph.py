"""Street-segment dual graph construction and radius-bounded centrality.

The street network is turned into a dual graph whose vertices are the
street segments themselves; two segments are adjacent when they meet at a
junction. Path costs between segments are either metric (meters between
segment midpoints along the streets) or angular (accumulated direction
change in degrees). On that graph we compute radius-bounded Choice
(betweenness with exact shortest-path counting) and Integration
(reciprocal of total path cost to reachable segments).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

__all__ = [
    "Segment",
    "StreetNetwork",
    "SegmentGraph",
    "CentralityField",
    "SegmentScoreMix",
    "EmptyNetworkError",
    "build_segment_graph",
    "compute_centrality",
    "mix_scores",
    "tiered_scores",
    "minmax_normalize",
]

# Floor applied to angular-closeness denominators so perfectly collinear
# chains (total turn cost 0) stay finite while preserving ordering.
ANGULAR_DENOM_FLOOR = 1e-9

# Tolerance used when two path costs are considered equal during
# shortest-path counting.
_COST_EPS = 1e-9

DEFAULT_SNAP_TOLERANCE = 0.5


class EmptyNetworkError(ValueError):
    """Raised when a network or graph contains no usable segments."""


@dataclass(frozen=True)
class Segment:
    """One street segment: an edge of the primal network."""

    id: int
    node_a: int
    node_b: int
    geometry: tuple[tuple[float, float], ...]
    length: float


@dataclass
class StreetNetwork:
    """Planar street network in a projected meter CRS."""

    nodes: list[tuple[float, float]]
    segments: list[Segment]

    def validate(self) -> None:
        n = len(self.nodes)
        for seg in self.segments:
            if seg.length <= 0:
                raise ValueError(f"segment {seg.id} has non-positive length")
            if not (0 <= seg.node_a < n and 0 <= seg.node_b < n):
                raise ValueError(f"segment {seg.id} references unknown node")
            if len(seg.geometry) < 2:
                raise ValueError(f"segment {seg.id} geometry needs >= 2 points")


@dataclass
class SegmentGraph:
    """Dual graph over segments.

    ``adjacency[s]`` lists ``(neighbor, metric_cost, angular_cost)`` triples.
    Metric cost is the midpoint-to-midpoint distance through the shared
    junction; angular cost is the heading change in degrees, in [0, 180].
    """

    n_segments: int
    lengths: list[float]
    adjacency: dict[int, list[tuple[int, float, float]]] = field(default_factory=dict)

    def neighbors(self, s: int, cost: str) -> list[tuple[int, float]]:
        return [(t, m if cost == "metric" else a)
                for t, m, a in self.adjacency.get(s, [])]


@dataclass
class CentralityField:
    """Per-segment scores for one (kind, cost, radius) combination."""

    kind: str  # "choice" | "integration"
    cost: str  # "metric" | "angular"
    radius: float | None  # meters; None = unbounded
    scores: list[float]


@dataclass
class SegmentScoreMix:
    """Min-max normalized choice/integration blend, one value per segment."""

    sigma: float
    scores: list[float]


def _polyline_length(points: tuple[tuple[float, float], ...]) -> float:
    return sum(math.dist(points[i], points[i + 1]) for i in range(len(points) - 1))


def _point_at_fraction(points: tuple[tuple[float, float], ...], frac: float) -> tuple[float, float]:
    """Point at the given fraction of arclength along a polyline."""
    total = _polyline_length(points)
    if total == 0:
        return points[0]
    target = frac * total
    walked = 0.0
    for i in range(len(points) - 1):
        step = math.dist(points[i], points[i + 1])
        if walked + step >= target and step > 0:
            t = (target - walked) / step
            (x0, y0), (x1, y1) = points[i], points[i + 1]
            return (x0 + t * (x1 - x0), y0 + t * (y1 - y0))
        walked += step
    return points[-1]


def _terminal_heading(seg: Segment, at_start: bool) -> tuple[float, float]:
    """Unit direction of travel through the junction at one end of a segment.

    Uses the terminal 10% chord of the polyline so noisy vertices near the
    junction do not dominate the heading.
    """
    pts = seg.geometry
    if at_start:
        # Travelling out of the junction located at the segment start.
        far = _point_at_fraction(pts, 0.10)
        near = pts[0]
    else:
        far = _point_at_fraction(pts, 0.90)
        near = pts[-1]
    dx, dy = far[0] - near[0], far[1] - near[1]
    norm = math.hypot(dx, dy)
    if norm == 0:
        # Degenerate chord; fall back to the full segment direction.
        dx, dy = pts[-1][0] - pts[0][0], pts[-1][1] - pts[0][1]
        norm = math.hypot(dx, dy) or 1.0
        if at_start:
            pass
        else:
            dx, dy = -dx, -dy
    return (dx / norm, dy / norm)


def _turn_angle_deg(out_a: tuple[float, float], out_b: tuple[float, float]) -> float:
    """Direction change when passing from one segment to another.

    Both vectors point *away* from the shared junction, so continuing
    straight means the vectors are opposite; the turn angle is
    180 - angle(out_a, out_b), clipped to [0, 180].
    """
    dot = max(-1.0, min(1.0, out_a[0] * out_b[0] + out_a[1] * out_b[1]))
    between = math.degrees(math.acos(dot))
    return max(0.0, min(180.0, 180.0 - between))


def build_segment_graph(network: StreetNetwork,
                        snap_tolerance: float = DEFAULT_SNAP_TOLERANCE) -> SegmentGraph:
    """Build the segment dual graph of a street network.

    Nodes closer than ``snap_tolerance`` are merged before deriving
    adjacency, so slightly misaligned junctions still connect.
    """
    if snap_tolerance < 0:
        raise ValueError("snap_tolerance must be >= 0")
    network.validate()
    if not network.segments:
        raise EmptyNetworkError("network has no segments")

    # Union-find over nodes within snap tolerance.
    n_nodes = len(network.nodes)
    parent = list(range(n_nodes))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if snap_tolerance > 0:
        order = sorted(range(n_nodes), key=lambda i: network.nodes[i])
        for a_pos, i in enumerate(order):
            xi, yi = network.nodes[i]
            for j in order[a_pos + 1:]:
                xj, yj = network.nodes[j]
                if xj - xi > snap_tolerance:
                    break
                if math.dist((xi, yi), (xj, yj)) <= snap_tolerance:
                    parent[find(i)] = find(j)

    # Segments incident to each merged junction, with the local end flag.
    incident: dict[int, list[tuple[int, bool]]] = {}
    for seg in network.segments:
        incident.setdefault(find(seg.node_a), []).append((seg.id, True))
        incident.setdefault(find(seg.node_b), []).append((seg.id, False))

    segs = {seg.id: seg for seg in network.segments}
    lengths = [segs[i].length for i in sorted(segs)]
    adjacency: dict[int, list[tuple[int, float, float]]] = {i: [] for i in segs}
    seen: set[tuple[int, int]] = set()
    for members in incident.values():
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                (sa, a_start), (sb, b_start) = members[a], members[b]
                if sa == sb:
                    continue  # loop edge touching the junction twice
                key = (min(sa, sb), max(sa, sb))
                if key in seen:
                    continue
                seen.add(key)
                metric = (segs[sa].length + segs[sb].length) / 2.0
                ang = _turn_angle_deg(_terminal_heading(segs[sa], a_start),
                                      _terminal_heading(segs[sb], b_start))
                adjacency[sa].append((sb, metric, ang))
                adjacency[sb].append((sa, metric, ang))
    for lst in adjacency.values():
        lst.sort()
    return SegmentGraph(n_segments=len(segs), lengths=lengths, adjacency=adjacency)


def _shortest_distances(graph: SegmentGraph, source: int, cost: str,
                        with_hops: bool = False):
    """Single-source Dijkstra under the chosen step cost.

    With ``with_hops`` the search minimizes the pair (cost, zero-cost steps)
    lexicographically and returns both components. The second component only
    moves on zero-cost steps (collinear continuations under the angular
    cost), so it leaves positive-cost graphs untouched while giving the
    optimal-path relation a strict ordering even across cost plateaus.
    """
    n = graph.n_segments
    dist = [math.inf] * n
    zhop = [0] * n
    dist[source] = 0.0
    heap = [(0.0, 0, source)]
    done = [False] * n
    while heap:
        d, z, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, mcost, acost in graph.adjacency.get(u, []):
            step = mcost if cost == "metric" else acost
            nd = d + step
            nz = z + (1 if step <= _COST_EPS else 0)
            if nd < dist[v] - _COST_EPS or (
                    abs(nd - dist[v]) <= _COST_EPS and nz < zhop[v]):
                dist[v] = nd
                zhop[v] = nz
                heapq.heappush(heap, (nd, nz, v))
    if with_hops:
        return dist, zhop
    return dist


def _count_shortest_paths(graph: SegmentGraph, source: int, cost: str,
                          dist: list[float], zhop: list[int]):
    """Predecessor lists and exact path counts over the optimal DAG.

    Counting off the final distance labels (rather than inside the heap
    loop) is immune to relaxation order, so equal-cost paths are never
    double counted. An edge is on the DAG when it advances the pair
    (cost, zero-cost steps) exactly; zero-cost steps bump the second
    component, so cost plateaus cannot form counting cycles.
    """
    n = graph.n_segments
    order = sorted((d, zhop[u], u) for u, d in enumerate(dist) if d < math.inf)
    preds: list[list[int]] = [[] for _ in range(n)]
    sigma = [0] * n
    sigma[source] = 1
    for d, z, u in order:
        for v, mcost, acost in graph.adjacency.get(u, []):
            step = mcost if cost == "metric" else acost
            if abs(dist[u] + step - dist[v]) > _COST_EPS:
                continue
            if zhop[v] != zhop[u] + (1 if step <= _COST_EPS else 0):
                continue
            preds[v].append(u)
            sigma[v] += sigma[u]
    return preds, sigma


def compute_centrality(graph: SegmentGraph, kind: str, cost: str,
                       radius: float | None = None) -> CentralityField:
    """Radius-bounded Choice or Integration over the segment graph.

    Choice(e) sums, over unordered segment pairs (s, t) with s != t != e
    inside the radius, the fraction of shortest paths under ``cost`` passing
    through e. Integration(i) is the reciprocal of the total path cost from
    i to every segment within the radius; segments with no reachable partner
    score 0. Radii are stated in meters, so the pair cutoff always uses the
    metric shortest-path distance, under both costs.
    """
    if kind not in ("choice", "integration"):
        raise ValueError(f"unknown centrality kind {kind!r}")
    if cost not in ("metric", "angular"):
        raise ValueError(f"unknown cost {cost!r}")
    if graph.n_segments == 0:
        raise EmptyNetworkError("segment graph is empty")
    if radius is not None and radius <= 0:
        raise ValueError("radius must be positive or None for unbounded")

    n = graph.n_segments
    scores = [0.0] * n
    for s in range(n):
        dist, zhop = _shortest_distances(graph, s, cost, with_hops=True)
        if radius is None:
            within = dist
        elif cost == "metric":
            within = dist
        else:
            within = _shortest_distances(graph, s, "metric")
        include = [t != s and dist[t] < math.inf
                   and (radius is None or within[t] <= radius + _COST_EPS)
                   for t in range(n)]
        if kind == "integration":
            targets = [t for t in range(n) if include[t]]
            total = sum(dist[t] for t in targets)
            if not targets:
                scores[s] = 0.0
            elif cost == "angular":
                scores[s] = 1.0 / max(total, ANGULAR_DENOM_FLOOR)
            else:
                scores[s] = 1.0 / total if total > 0 else 0.0
            continue
        # Brandes dependency accumulation restricted to included targets.
        preds, sigma = _count_shortest_paths(graph, s, cost, dist, zhop)
        delta = [0.0] * n
        order = sorted((w for w in range(n) if w != s and dist[w] < math.inf),
                       key=lambda w: (-dist[w], -zhop[w]))
        for w in order:
            if sigma[w] == 0:
                continue
            coeff = ((1.0 if include[w] else 0.0) + delta[w]) / sigma[w]
            for p in preds[w]:
                delta[p] += sigma[p] * coeff
        for v in range(n):
            if v != s:
                scores[v] += delta[v]
    if kind == "choice":
        # Every unordered pair was visited from both endpoints.
        scores = [x / 2.0 for x in scores]
    return CentralityField(kind=kind, cost=cost, radius=radius, scores=scores)


def minmax_normalize(values: list[float]) -> list[float]:
    """Min-max scale to [0, 1]; a constant vector maps to all zeros."""
    lo, hi = min(values), max(values)
    if hi - lo <= 0:
        return [0.0] * len(values)
    return [(v - lo) / (hi - lo) for v in values]


def mix_scores(choice: CentralityField, integration: CentralityField,
               sigma: float) -> SegmentScoreMix:
    """Blend normalized choice and integration: sigma*C + (1-sigma)*I."""
    if not 0.0 <= sigma <= 1.0:
        raise ValueError("sigma must lie in [0, 1]")
    if len(choice.scores) != len(integration.scores):
        raise ValueError("fields cover different segment sets")
    c = minmax_normalize(choice.scores)
    i = minmax_normalize(integration.scores)
    return SegmentScoreMix(sigma=sigma,
                           scores=[sigma * cv + (1 - sigma) * iv
                                   for cv, iv in zip(c, i)])


def tiered_scores(graph: SegmentGraph, radii: list[float],
                  sigma_per_tier: list[float],
                  choice_cost: str = "metric",
                  integration_cost: str = "angular") -> list[SegmentScoreMix]:
    """One mixed score field per analysis radius, coarse to fine.

    Default pairing is metric Choice with angular Integration; both are
    selectable so either reading of the blended score is available.
    """
    if not radii:
        raise ValueError("radii list must not be empty")
    if len(sigma_per_tier) != len(radii):
        raise ValueError("need one sigma per radius")
    if any(radii[i] <= radii[i + 1] for i in range(len(radii) - 1)):
        raise ValueError("radii must be strictly decreasing coarse -> fine")
    fields = []
    for r, sg in zip(radii, sigma_per_tier):
        ch = compute_centrality(graph, "choice", choice_cost, r)
        it = compute_centrality(graph, "integration", integration_cost, r)
        fields.append(mix_scores(ch, it, sg))
    return fields
