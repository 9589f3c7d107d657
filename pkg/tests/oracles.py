"""Independent brute-force oracles used by the test suite.

All-pairs costs come from Floyd-Warshall; shortest paths are enumerated
exhaustively by depth-first search with lower-bound pruning, so the path
counts never depend on the Dijkstra/Brandes machinery they verify.
Dominance checks are plain O(n^2) comparisons.
"""

from __future__ import annotations

import math

EPS = 1e-9


def edge_weights(graph, cost: str) -> dict[tuple[int, int], float]:
    idx = 1 if cost == "metric" else 2
    out = {}
    for u, nbrs in graph.adjacency.items():
        for entry in nbrs:
            out[(u, entry[0])] = entry[idx]
    return out


def floyd_warshall(graph, cost: str) -> list[list[float]]:
    n = graph.n_segments
    d = [[math.inf] * n for _ in range(n)]
    for i in range(n):
        d[i][i] = 0.0
    for (u, v), w in edge_weights(graph, cost).items():
        if w < d[u][v]:
            d[u][v] = w
            d[v][u] = w
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik == math.inf:
                continue
            di = d[i]
            for j in range(n):
                alt = dik + dk[j]
                if alt < di[j]:
                    di[j] = alt
    return d


def enumerate_shortest_paths(graph, cost: str, s: int, t: int,
                             dist: list[list[float]]) -> list[list[int]]:
    """All minimal-cost simple paths from s to t, by pruned DFS."""
    weights = edge_weights(graph, cost)
    target = dist[s][t]
    if target == math.inf:
        return []
    paths: list[list[int]] = []

    def walk(node: int, cur: float, path: list[int]) -> None:
        if node == t:
            if abs(cur - target) <= EPS:
                paths.append(list(path))
            return
        for nxt, _, _ in graph.adjacency.get(node, []):
            if nxt in path:
                continue
            w = weights[(node, nxt)]
            if cur + w + dist[nxt][t] <= target + EPS:
                path.append(nxt)
                walk(nxt, cur + w, path)
                path.pop()

    walk(s, 0.0, [s])
    return paths


def brute_choice(graph, cost: str, radius: float | None = None) -> list[float]:
    n = graph.n_segments
    dist = floyd_warshall(graph, cost)
    dmet = dist if cost == "metric" else floyd_warshall(graph, "metric")
    scores = [0.0] * n
    for s in range(n):
        for t in range(s + 1, n):
            if dist[s][t] == math.inf:
                continue
            if radius is not None and dmet[s][t] > radius + EPS:
                continue
            paths = enumerate_shortest_paths(graph, cost, s, t, dist)
            sigma = len(paths)
            if sigma == 0:
                continue
            through: dict[int, int] = {}
            for path in paths:
                for node in path[1:-1]:
                    through[node] = through.get(node, 0) + 1
            for node, count in through.items():
                scores[node] += count / sigma
    return scores


def brute_integration(graph, cost: str, radius: float | None = None,
                      angular_floor: float = 1e-9) -> list[float]:
    n = graph.n_segments
    dist = floyd_warshall(graph, cost)
    dmet = dist if cost == "metric" else floyd_warshall(graph, "metric")
    scores = [0.0] * n
    for i in range(n):
        total = 0.0
        any_reachable = False
        for j in range(n):
            if j == i or dist[i][j] == math.inf:
                continue
            if radius is not None and dmet[i][j] > radius + EPS:
                continue
            any_reachable = True
            total += dist[i][j]
        if not any_reachable:
            scores[i] = 0.0
        elif cost == "angular":
            scores[i] = 1.0 / max(total, angular_floor)
        else:
            scores[i] = 1.0 / total if total > 0 else 0.0
    return scores


def brute_pareto(points: list[tuple[float, ...]]) -> list[int]:
    """Indices of non-dominated points, by pairwise comparison."""
    keep = []
    for i, p in enumerate(points):
        dominated = False
        for j, q in enumerate(points):
            if i == j:
                continue
            if all(qk <= pk for qk, pk in zip(q, p)) and any(qk < pk for qk, pk in zip(q, p)):
                dominated = True
                break
        if not dominated:
            keep.append(i)
    return keep


def random_segment_graph(rng, n_min: int = 4, n_max: int = 30,
                         integer_costs: bool = False):
    """Connected random dual graph with metric and angular step costs."""
    from streetplan.netgraph import SegmentGraph

    n = int(rng.integers(n_min, n_max + 1))
    adjacency: dict[int, list[tuple[int, float, float]]] = {i: [] for i in range(n)}
    edges = set()

    def add_edge(u: int, v: int) -> None:
        if u == v or (min(u, v), max(u, v)) in edges:
            return
        edges.add((min(u, v), max(u, v)))
        if integer_costs:
            m = float(rng.integers(1, 5))
            a = float(rng.integers(1, 5) * 45)
        else:
            m = float(rng.uniform(0.5, 4.0))
            a = float(rng.uniform(5.0, 180.0))
        adjacency[u].append((v, m, a))
        adjacency[v].append((u, m, a))

    for v in range(1, n):
        add_edge(int(rng.integers(0, v)), v)
    for _ in range(int(rng.integers(0, n))):
        add_edge(int(rng.integers(0, n)), int(rng.integers(0, n)))
    for lst in adjacency.values():
        lst.sort()
    lengths = [1.0] * n
    return SegmentGraph(n_segments=n, lengths=lengths, adjacency=adjacency)
