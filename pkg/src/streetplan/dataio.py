"""GeoJSON/CSV ingestion and persistence, plus the synthetic grid fixture.

All geometry is expected in a projected meter CRS; lon/lat input is
rejected with a reprojection hint. CSV round-trips preserve floats via
repr, so a write-then-read reproduces identical in-memory values.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from shapely.geometry import Polygon, shape

from .blockmap import Block
from .netgraph import Segment, StreetNetwork
from .policy import METRICS, ObjectiveRecord, Policy

__all__ = [
    "SiteFormatError",
    "load_network",
    "load_blocks",
    "load_site",
    "make_synthetic_grid",
    "write_segment_scores_csv",
    "write_segment_scores_geojson",
    "write_blocks_geojson",
    "write_csv",
    "records_to_csv",
    "records_from_csv",
]


class SiteFormatError(ValueError):
    """Input file fails validation; message lists the offending features."""


def _looks_geographic(coords: list[tuple[float, float]]) -> bool:
    return bool(coords) and all(abs(x) <= 180 and abs(y) <= 90 for x, y in coords)


def _load_features(path: str | Path) -> list[dict]:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("type") != "FeatureCollection":
        raise SiteFormatError(f"{path}: expected a GeoJSON FeatureCollection")
    features = doc.get("features", [])
    if not features:
        raise SiteFormatError(f"{path}: empty FeatureCollection")
    return features


def load_network(path: str | Path) -> StreetNetwork:
    """Read LineString features into a street network.

    Node identity is by exact coordinate (rounded to a millimeter), so
    segments sharing an endpoint connect; looser junctions are handled by
    the snap tolerance at graph-build time.
    """
    features = _load_features(path)
    nodes: list[tuple[float, float]] = []
    node_index: dict[tuple[float, float], int] = {}
    segments: list[Segment] = []
    errors: list[str] = []
    all_coords: list[tuple[float, float]] = []

    def node_id(pt: tuple[float, float]) -> int:
        key = (round(pt[0], 3), round(pt[1], 3))
        if key not in node_index:
            node_index[key] = len(nodes)
            nodes.append(pt)
        return node_index[key]

    for k, feat in enumerate(features):
        geom = feat.get("geometry") or {}
        if geom.get("type") != "LineString":
            errors.append(f"feature {k}: expected LineString, got {geom.get('type')}")
            continue
        pts = [tuple(map(float, c[:2])) for c in geom.get("coordinates", [])]
        if len(pts) < 2:
            errors.append(f"feature {k}: fewer than 2 coordinates")
            continue
        all_coords.extend(pts)
        length = sum(math.dist(pts[i], pts[i + 1]) for i in range(len(pts) - 1))
        if length <= 0:
            errors.append(f"feature {k}: zero-length geometry")
            continue
        seg_id = feat.get("properties", {}).get("id", len(segments))
        segments.append(Segment(id=int(seg_id), node_a=node_id(pts[0]),
                                node_b=node_id(pts[-1]),
                                geometry=tuple(pts), length=length))
    if errors:
        raise SiteFormatError("; ".join(errors))
    if _looks_geographic(all_coords):
        raise SiteFormatError(
            "coordinates look geographic (lon/lat); reproject to a meter CRS")
    # Normalize ids to a dense 0..n-1 range in input order.
    segments = [Segment(id=i, node_a=s.node_a, node_b=s.node_b,
                        geometry=s.geometry, length=s.length)
                for i, s in enumerate(segments)]
    return StreetNetwork(nodes=nodes, segments=segments)


def load_blocks(path: str | Path) -> list[Block]:
    features = _load_features(path)
    blocks: list[Block] = []
    errors: list[str] = []
    all_coords: list[tuple[float, float]] = []
    for k, feat in enumerate(features):
        geom = feat.get("geometry") or {}
        if geom.get("type") != "Polygon":
            errors.append(f"feature {k}: expected Polygon, got {geom.get('type')}")
            continue
        poly = shape(geom)
        all_coords.extend((x, y) for x, y in poly.exterior.coords)
        if not poly.is_valid or poly.area <= 0:
            errors.append(f"feature {k}: invalid or zero-area polygon")
            continue
        block_id = feat.get("properties", {}).get("id", k)
        blocks.append(Block.from_polygon(int(block_id), poly))
    if errors:
        raise SiteFormatError("; ".join(errors))
    if _looks_geographic(all_coords):
        raise SiteFormatError(
            "coordinates look geographic (lon/lat); reproject to a meter CRS")
    return blocks


def load_site(network_path: str | Path, blocks_path: str | Path):
    return load_network(network_path), load_blocks(blocks_path)


def make_synthetic_grid(n: int, block_size: float = 100.0):
    """n x n orthogonal street grid with (n-1)^2 square blocks.

    Deterministic ids: horizontal segments row-major first, then vertical;
    blocks row-major. The block polygons coincide with the street lines.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    nodes = [(x * block_size, y * block_size) for y in range(n) for x in range(n)]

    def nid(x: int, y: int) -> int:
        return y * n + x

    segments: list[Segment] = []
    for y in range(n):
        for x in range(n - 1):
            a, b = nid(x, y), nid(x + 1, y)
            geom = (nodes[a], nodes[b])
            segments.append(Segment(id=len(segments), node_a=a, node_b=b,
                                    geometry=geom, length=block_size))
    for x in range(n):
        for y in range(n - 1):
            a, b = nid(x, y), nid(x, y + 1)
            geom = (nodes[a], nodes[b])
            segments.append(Segment(id=len(segments), node_a=a, node_b=b,
                                    geometry=geom, length=block_size))
    network = StreetNetwork(nodes=nodes, segments=segments)

    blocks = []
    for y in range(n - 1):
        for x in range(n - 1):
            x0, y0 = x * block_size, y * block_size
            poly = Polygon([(x0, y0), (x0 + block_size, y0),
                            (x0 + block_size, y0 + block_size), (x0, y0 + block_size)])
            blocks.append(Block.from_polygon(len(blocks), poly))
    return network, blocks


def write_csv(path: str | Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def write_segment_scores_csv(path: str | Path, fields) -> None:
    rows = []
    for f in fields:
        for seg_id, score in enumerate(f.scores):
            rows.append([seg_id, f.kind, f.cost,
                         "" if f.radius is None else f.radius, float(score)])
    write_csv(path, ["segment_id", "kind", "cost", "radius", "score"], rows)


def _feature(geometry, properties) -> dict:
    return {"type": "Feature", "geometry": geometry, "properties": properties}


def write_segment_scores_geojson(path: str | Path, network: StreetNetwork,
                                 tier_fields) -> None:
    """Per-segment GeoJSON with score_t0..score_t{L-1} properties."""
    features = []
    for seg in network.segments:
        props = {"id": seg.id}
        for t, f in enumerate(tier_fields):
            props[f"score_t{t}"] = float(f.scores[seg.id])
        features.append(_feature(
            {"type": "LineString", "coordinates": [list(p) for p in seg.geometry]},
            props))
    _write_collection(path, features)


def write_blocks_geojson(path: str | Path, blocks: list[Block],
                         properties: dict[int, dict]) -> None:
    features = []
    for b in blocks:
        geom = json.loads(json.dumps(b.polygon.__geo_interface__))
        props = {"id": b.id, "lot_area": b.lot_area}
        props.update(properties.get(b.id, {}))
        features.append(_feature(geom, props))
    _write_collection(path, features)


def _write_collection(path: str | Path, features: list[dict]) -> None:
    with open(path, "w") as fh:
        json.dump({"type": "FeatureCollection", "features": features}, fh)


# --- policy batch persistence -------------------------------------------------

_RAW_KEYS = ("au", "one_minus_au", "d_b", "d_lu", "d_cs", "jh_pen")


def records_to_csv(path: str | Path, records: list[ObjectiveRecord]) -> None:
    """One row per evaluated policy: inputs, raw metrics, normalized metrics."""
    if not records:
        raise ValueError("no records to write")
    pol = records[0].policy
    param_names = list(pol.params())
    uses = [u for u, _ in pol.shares]
    header = (["id", "valid", "error", "tier_names", "priority", "b_total"]
              + param_names
              + [f"share_{u}" for u in uses] + [f"gamma_{u}" for u in uses]
              + [f"raw_{k}" for k in _RAW_KEYS] + [f"norm_{k}" for k in METRICS])
    rows = []
    for r in records:
        params = r.policy.params()
        shares, gamma = r.policy.share_dict(), r.policy.gamma_dict()
        row = [r.id, int(r.valid), r.error or "",
               "|".join(r.policy.tier_names), "|".join(r.policy.priority),
               r.policy.b_total]
        row += [params[p] for p in param_names]
        row += [shares[u] for u in uses] + [gamma[u] for u in uses]
        row += [r.raw.get(k, "") if r.valid else "" for k in _RAW_KEYS]
        row += [r.norm.get(k, "") if r.norm else "" for k in METRICS]
        rows.append(row)
    write_csv(path, header, rows)


def records_from_csv(path: str | Path) -> list[ObjectiveRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    records = []
    for row in rows:
        tier_names = tuple(row["tier_names"].split("|"))
        radii = tuple(float(row[f"radius_{t}"]) for t in tier_names)
        sigmas = tuple(float(row[f"sigma_{i}"]) for i in range(len(tier_names)))
        rhos = tuple(float(row[f"rho_{i}"]) for i in range(len(tier_names)))
        uses = sorted(k[len("share_"):] for k in row if k.startswith("share_"))
        policy = Policy(
            tier_names=tier_names, radii=radii, sigmas=sigmas, rhos=rhos,
            shares=tuple((u, float(row[f"share_{u}"])) for u in uses),
            gamma=tuple((u, float(row[f"gamma_{u}"])) for u in uses),
            priority=tuple(row["priority"].split("|")),
            b_total=float(row["b_total"]))
        rec = ObjectiveRecord(id=int(row["id"]), policy=policy,
                              valid=bool(int(row["valid"])),
                              error=row["error"] or None)
        if rec.valid:
            rec.raw = {k: float(row[f"raw_{k}"]) for k in _RAW_KEYS
                       if row.get(f"raw_{k}")}
            rec.norm = {k: float(row[f"norm_{k}"]) for k in METRICS
                        if row.get(f"norm_{k}")}
        records.append(rec)
    return records
