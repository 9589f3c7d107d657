"""JSON-over-HTTP API for the planner UI.

Exposes the loaded site, synchronous single-policy evaluation, and stored
sampling-run outputs. The site snapshot is immutable for the process
lifetime, so concurrent evaluations never interleave state. Endpoint
schemas are documented in api.md.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import allocator, basins, blockmap, dataio, intensity, netgraph, policy as pol
from .config import RunConfig

__all__ = ["create_app", "PolicyBody"]


class PolicyBody(BaseModel):
    """Policy inputs for /evaluate; unset fields fall back to the config."""

    radii: list[float] | None = None
    sigmas: list[float] | None = None
    rhos: list[float] | None = None
    shares: dict[str, float] | None = None
    gamma: dict[str, float] | None = None
    priority: list[str] | None = None
    b_total: float | None = Field(default=None, gt=0)


def _policy_from_body(cfg: RunConfig, body: PolicyBody) -> pol.Policy:
    base = cfg.fixed_policy()
    radii = tuple(body.radii) if body.radii is not None else base.radii
    sigmas = tuple(body.sigmas) if body.sigmas is not None else base.sigmas
    rhos = tuple(body.rhos) if body.rhos is not None else base.rhos
    if len(radii) != len(base.tier_names):
        raise HTTPException(400, detail="radii must match the tier count")
    if any(r <= 0 for r in radii):
        raise HTTPException(400, detail="radii must be positive")
    if any(not 0 <= s <= 1 for s in sigmas):
        raise HTTPException(400, detail="sigmas must lie in [0, 1]")
    if len(sigmas) != len(radii) or len(rhos) != len(radii):
        raise HTTPException(400, detail="sigmas/rhos must match the tier count")
    rho_sum = sum(rhos)
    if rho_sum <= 0:
        raise HTTPException(400, detail="rho weights must not all be zero")
    rhos = tuple(r / rho_sum for r in rhos)
    shares = dict(base.shares)
    if body.shares is not None:
        if any(v < 0 for v in body.shares.values()):
            raise HTTPException(400, detail="shares must be nonnegative")
        total = sum(body.shares.values())
        if total <= 0:
            raise HTTPException(400, detail="shares must not all be zero")
        shares = {u: v / total for u, v in body.shares.items()}
    gamma = dict(base.gamma)
    if body.gamma is not None:
        total = sum(body.gamma.values())
        if total <= 0 or any(v < 0 for v in body.gamma.values()):
            raise HTTPException(400, detail="gamma must be a nonnegative share vector")
        gamma = {u: v / total for u, v in body.gamma.items()}
    priority = tuple(body.priority) if body.priority is not None else base.priority
    if sorted(priority) != sorted(allocator.USES):
        raise HTTPException(400, detail="priority must be a permutation of the use set")
    return pol.Policy(tier_names=base.tier_names, radii=radii, sigmas=sigmas,
                      rhos=rhos, shares=tuple(sorted(shares.items())),
                      gamma=tuple(sorted(gamma.items())), priority=priority,
                      b_total=body.b_total or base.b_total)


def _blocks_geojson(snapshot: pol.SiteSnapshot, props: dict[int, dict]) -> dict:
    features = []
    for b in snapshot.blocks:
        features.append({
            "type": "Feature",
            "geometry": json.loads(json.dumps(b.polygon.__geo_interface__)),
            "properties": {"id": b.id, "lot_area": b.lot_area, **props.get(b.id, {})},
        })
    return {"type": "FeatureCollection", "features": features}


def create_app(cfg: RunConfig, runs_dir: str | None = None,
               static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="streetplan service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    snapshot: pol.SiteSnapshot | None = None
    if cfg.network_path and cfg.blocks_path:
        network, blocks = dataio.load_site(cfg.network_path, cfg.blocks_path)
        snapshot = pol.SiteSnapshot.build(network, blocks, buffer=cfg.buffer,
                                          snap_tolerance=cfg.snap_tolerance)
    settings = cfg.eval_settings()
    runs_root = Path(runs_dir) if runs_dir else None

    def require_site() -> pol.SiteSnapshot:
        if snapshot is None:
            raise HTTPException(409, detail="no site loaded; configure network/blocks paths")
        return snapshot

    def run_path(run_id: str) -> Path:
        if runs_root is None:
            raise HTTPException(404, detail="no runs directory configured")
        path = runs_root / run_id
        if not (path.is_dir() and (path / "records.csv").exists()):
            raise HTTPException(404, detail=f"unknown run {run_id!r}")
        return path

    @app.get("/site")
    def site() -> dict:
        snap = require_site()
        cfg_policy = cfg.fixed_policy()
        fields = [netgraph.mix_scores(
            snap.centrality("choice", settings.choice_cost, r),
            snap.centrality("integration", settings.integration_cost, r), s)
            for r, s in zip(cfg_policy.radii, cfg_policy.sigmas)]
        block_ids = [b.id for b in snap.blocks]
        tensor = blockmap.normalize_per_tier(
            blockmap.block_accessibility(fields, snap.adjacency, block_ids))
        props = {b: {f"A_t{t}": float(tensor[i, t]) for t in range(tensor.shape[1])}
                 for i, b in enumerate(block_ids)}
        return {"blocks": _blocks_geojson(snap, props),
                "tier_names": list(cfg.tier_names), "radii": list(cfg.radii)}

    @app.post("/evaluate")
    def evaluate(body: PolicyBody) -> dict:
        snap = require_site()
        policy = _policy_from_body(cfg, body)
        record = pol.evaluate_policy(snap, policy, settings)
        if not record.valid:
            raise HTTPException(422, detail={"error": record.error,
                                             "policy": policy.params()})
        # Rebuild the spatial result for the map payload.
        fields = [netgraph.mix_scores(
            snap.centrality("choice", settings.choice_cost, r),
            snap.centrality("integration", settings.integration_cost, r), s)
            for r, s in zip(policy.radii, policy.sigmas)]
        block_ids = [b.id for b in snap.blocks]
        tensor = blockmap.normalize_per_tier(
            blockmap.block_accessibility(fields, snap.adjacency, block_ids))
        thresholds = list(settings.cluster_thresholds or policy.radii)
        hierarchy = basins.build_clusters(snap.blocks, tensor, thresholds)
        result = allocator.allocate(snap.blocks, tensor, hierarchy,
                                    policy.share_dict(), priority=policy.priority,
                                    tier_names=list(policy.tier_names),
                                    min_parcels=settings.min_parcels,
                                    tau_int=settings.tau_int)
        a_tilde = intensity.weighted_accessibility(tensor, list(policy.rhos))
        access_of = dict(zip(block_ids, a_tilde))
        lots = [intensity.Lot(block=b, use=u, area=area, access=float(access_of[b]))
                for b in result.block_ids
                for u, area in result.x[b].items() if area > 0]
        ir = intensity.compute_intensity(lots, intensity.IntensityConfig(
            b_total=policy.b_total, gamma=policy.gamma_dict(), rho=list(policy.rhos),
            f_bar=settings.f_bar, footprint_ratio=settings.footprint_ratio,
            storey_height=settings.storey_height))
        far_area: dict[int, float] = {}
        for lot, f in zip(ir.lots, ir.far):
            far_area[lot.block] = far_area.get(lot.block, 0.0) + f * lot.area
        props = {b: {"use": result.dominant[b],
                     "far": far_area.get(b, 0.0) / result.lot_areas[b],
                     **{f"x_{u}": result.x[b][u] for u in allocator.USES}}
                 for b in result.block_ids}
        return {"record": {"valid": True, "raw": record.raw,
                           "policy": {**policy.params(),
                                      "priority": list(policy.priority),
                                      "b_total": policy.b_total,
                                      "shares": policy.share_dict(),
                                      "gamma": policy.gamma_dict()}},
                "allocation": _blocks_geojson(snap, props),
                "shares": result.shares(settings.accounting)}

    @app.get("/runs")
    def runs() -> dict:
        if runs_root is None or not runs_root.is_dir():
            return {"runs": []}
        found = sorted(p.name for p in runs_root.iterdir()
                       if p.is_dir() and (p / "records.csv").exists())
        return {"runs": found}

    @app.get("/runs/{run_id}/records")
    def run_records(run_id: str) -> dict:
        records = dataio.records_from_csv(run_path(run_id) / "records.csv")
        return {"records": [_record_payload(r) for r in records]}

    @app.get("/runs/{run_id}/pareto")
    def run_pareto(run_id: str) -> dict:
        records = dataio.records_from_csv(run_path(run_id) / "records.csv")
        front = pol.pareto_front(records)
        knee = pol.knee_point(records, front) if front else None
        members = [r for r in records if r.id in set(front)]
        return {"front": [_record_payload(r) for r in members], "knee_id": knee}

    @app.get("/runs/{run_id}/knee")
    def run_knee(run_id: str) -> dict:
        knee_file = run_path(run_id) / "knee.json"
        if knee_file.exists():
            return json.loads(knee_file.read_text())
        records = dataio.records_from_csv(run_path(run_id) / "records.csv")
        front = pol.pareto_front(records)
        if not front:
            raise HTTPException(404, detail="run has no valid frontier")
        knee = next(r for r in records if r.id == pol.knee_point(records, front))
        return _record_payload(knee)

    @app.get("/runs/{run_id}/sensitivity/{param}")
    def run_sensitivity(run_id: str, param: str) -> dict:
        records = dataio.records_from_csv(run_path(run_id) / "records.csv")
        front = pol.pareto_front(records)
        try:
            rows = pol.sensitivity_groups(records, front, param)
        except ValueError as exc:
            raise HTTPException(404, detail=str(exc)) from exc
        return {"param": param, "groups": rows}

    ui_dir = Path(static_dir) if static_dir else Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if ui_dir.is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app


def _record_payload(r: pol.ObjectiveRecord) -> dict:
    return {"id": r.id, "valid": r.valid, "error": r.error, "raw": r.raw,
            "norm": r.norm, "policy": {**r.policy.params(),
                                       "priority": list(r.policy.priority),
                                       "b_total": r.policy.b_total,
                                       "shares": r.policy.share_dict(),
                                       "gamma": r.policy.gamma_dict()}}
