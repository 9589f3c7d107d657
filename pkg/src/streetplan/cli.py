"""Command-line surface: one subcommand per pipeline stage.

Exit codes: 0 success, 1 validation/usage error, 2 runtime error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import allocator, basins, blockmap, dataio, intensity, netgraph, policy as pol
from .config import RunConfig, write_manifest
from .dataio import SiteFormatError

__all__ = ["main", "cli"]


def _config(path: str | None) -> RunConfig:
    return RunConfig.from_file(path) if path else RunConfig()


def _snapshot(cfg: RunConfig) -> pol.SiteSnapshot:
    if not cfg.network_path or not cfg.blocks_path:
        raise click.UsageError("config must set network_path and blocks_path")
    network, blocks = dataio.load_site(cfg.network_path, cfg.blocks_path)
    return pol.SiteSnapshot.build(network, blocks, buffer=cfg.buffer,
                                  snap_tolerance=cfg.snap_tolerance)


def _tier_fields(snapshot: pol.SiteSnapshot, cfg: RunConfig):
    return [netgraph.mix_scores(
        snapshot.centrality("choice", cfg.choice_cost, r),
        snapshot.centrality("integration", cfg.integration_cost, r), s)
        for r, s in zip(cfg.radii, cfg.sigmas)]


def _tensor(snapshot: pol.SiteSnapshot, cfg: RunConfig):
    fields = _tier_fields(snapshot, cfg)
    block_ids = [b.id for b in snapshot.blocks]
    raw = blockmap.block_accessibility(fields, snapshot.adjacency, block_ids)
    return fields, blockmap.normalize_per_tier(raw)


@click.group()
def cli() -> None:
    """Accessibility-driven land-use, FAR, and policy screening toolkit."""


@cli.command()
@click.option("--n", type=int, required=True, help="grid dimension (n x n streets)")
@click.option("--block-size", type=float, default=100.0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def synth(n: int, block_size: float, out_dir: str) -> None:
    """Write a synthetic orthogonal-grid site (network + blocks GeoJSON)."""
    network, blocks = dataio.make_synthetic_grid(n, block_size)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    features = [{"type": "Feature",
                 "geometry": {"type": "LineString",
                              "coordinates": [list(p) for p in seg.geometry]},
                 "properties": {"id": seg.id}} for seg in network.segments]
    with open(out / "network.geojson", "w") as fh:
        json.dump({"type": "FeatureCollection", "features": features}, fh)
    dataio.write_blocks_geojson(out / "blocks.geojson", blocks, {})
    click.echo(f"wrote {len(network.segments)} segments, {len(blocks)} blocks to {out}")


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", type=click.Path(), required=True)
def access(config_path: str | None, out_dir: str) -> None:
    """Compute per-tier mixed segment scores; emit CSV and GeoJSON."""
    cfg = _config(config_path)
    snapshot = _snapshot(cfg)
    fields, _ = _tensor(snapshot, cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    raw_fields = []
    for r in cfg.radii:
        raw_fields.append(snapshot.centrality("choice", cfg.choice_cost, r))
        raw_fields.append(snapshot.centrality("integration", cfg.integration_cost, r))
    dataio.write_segment_scores_csv(out / "segment_scores.csv", raw_fields)
    dataio.write_segment_scores_geojson(out / "segments.geojson", snapshot.network, fields)
    write_manifest(out, cfg, ["segment_scores.csv", "segments.geojson"])
    click.echo(f"wrote segment scores for {len(cfg.radii)} tiers to {out}")


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", type=click.Path(), required=True)
def cluster(config_path: str | None, out_dir: str) -> None:
    """Build per-tier service basins; emit the membership CSV."""
    cfg = _config(config_path)
    snapshot = _snapshot(cfg)
    _, tensor = _tensor(snapshot, cfg)
    thresholds = list(cfg.cluster_thresholds or cfg.radii)
    hierarchy = basins.build_clusters(snapshot.blocks, tensor, thresholds)
    rows = []
    for tier, clusters in enumerate(hierarchy.tiers):
        for c in clusters:
            for b in c.members:
                rows.append([b, tier, c.id, int(b == c.center_block)])
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dataio.write_csv(out / "clusters.csv",
                     ["block_id", "tier", "cluster_id", "is_center"], rows)
    write_manifest(out, cfg, ["clusters.csv"])
    click.echo(f"wrote clusters for {len(hierarchy.tiers)} tiers to {out}")


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", type=click.Path(), required=True)
def allocate(config_path: str | None, out_dir: str) -> None:
    """Run the land-use assignment; emit block GeoJSON and share summary."""
    cfg = _config(config_path)
    snapshot = _snapshot(cfg)
    _, tensor = _tensor(snapshot, cfg)
    thresholds = list(cfg.cluster_thresholds or cfg.radii)
    hierarchy = basins.build_clusters(snapshot.blocks, tensor, thresholds)
    result = allocator.allocate(snapshot.blocks, tensor, hierarchy, cfg.shares,
                                priority=tuple(cfg.priority),
                                tier_names=list(cfg.tier_names),
                                min_parcels=cfg.min_parcels, tau_int=cfg.tau_int)
    props = {b: {"use": result.dominant[b],
                 **{f"x_{u}": result.x[b][u] for u in allocator.USES}}
             for b in result.block_ids}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dataio.write_blocks_geojson(out / "allocation.geojson", snapshot.blocks, props)
    diag = allocator.achieved_shares(result, cfg.shares, cfg.accounting)
    rows = [[u, cfg.shares.get(u, 0.0), diag.achieved.get(u, 0.0)]
            for u in allocator.USES]
    dataio.write_csv(out / "shares.csv",
                     ["use", "target_share", "achieved_share"], rows)
    write_manifest(out, cfg, ["allocation.geojson", "shares.csv"])
    click.echo(f"D_LU={diag.d_lu:.6g} MAE={diag.mae:.4g} RMSE={diag.rmse:.4g}")


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", type=click.Path(), required=True)
def far(config_path: str | None, out_dir: str) -> None:
    """Assign FAR and heights on top of the allocation; emit lot outputs."""
    cfg = _config(config_path)
    snapshot = _snapshot(cfg)
    _, tensor = _tensor(snapshot, cfg)
    thresholds = list(cfg.cluster_thresholds or cfg.radii)
    hierarchy = basins.build_clusters(snapshot.blocks, tensor, thresholds)
    result = allocator.allocate(snapshot.blocks, tensor, hierarchy, cfg.shares,
                                priority=tuple(cfg.priority),
                                tier_names=list(cfg.tier_names),
                                min_parcels=cfg.min_parcels, tau_int=cfg.tau_int)
    a_tilde = intensity.weighted_accessibility(tensor, list(cfg.rhos))
    access_of = dict(zip(result.block_ids, a_tilde))
    lots = [intensity.Lot(block=b, use=u, area=area, access=float(access_of[b]))
            for b in result.block_ids
            for u, area in result.x[b].items() if area > 0]
    ir = intensity.compute_intensity(lots, intensity.IntensityConfig(
        b_total=cfg.b_total, gamma=cfg.gamma, rho=list(cfg.rhos),
        f_bar=cfg.f_bar, footprint_ratio=cfg.footprint_ratio,
        storey_height=cfg.storey_height))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    block_far = {}
    for lot, f, h in zip(ir.lots, ir.far, ir.heights):
        entry = block_far.setdefault(lot.block, {"use": None, "far": 0.0, "height_m": 0.0})
        # Dominant-use view per block for the map output.
        if entry["use"] is None or lot.area > entry.get("_area", 0.0):
            entry.update(use=lot.use, far=f, height_m=h, _area=lot.area)
    for entry in block_far.values():
        entry.pop("_area", None)
    dataio.write_blocks_geojson(out / "far.geojson", snapshot.blocks, block_far)
    rows = [[u, ir.b_hat.get(u, 0.0), ir.gamma_hat.get(u, 0.0), cfg.gamma.get(u, 0.0)]
            for u in allocator.USES]
    dataio.write_csv(out / "construction.csv",
                     ["use", "B_hat", "gamma_hat", "gamma_target"], rows)
    write_manifest(out, cfg, ["far.geojson", "construction.csv"])
    click.echo(f"D_B={ir.d_b:.6g} D_CS={ir.d_cs:.6g}")


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path(), default=None)
def evaluate(config_path: str | None, out_path: str | None) -> None:
    """Evaluate the config's fixed policy; print the objective record."""
    cfg = _config(config_path)
    snapshot = _snapshot(cfg)
    record = pol.evaluate_policy(snapshot, cfg.fixed_policy(), cfg.eval_settings())
    payload = {"valid": record.valid, "error": record.error, "raw": record.raw,
               "policy": record.policy.params()}
    text = json.dumps(payload, indent=2)
    if out_path:
        Path(out_path).write_text(text)
    click.echo(text)


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--n", type=int, default=None, help="override sample count")
@click.option("--seed", type=int, default=None, help="override sampling seed")
@click.option("--out", "out_dir", type=click.Path(), required=True)
def sample(config_path: str | None, n: int | None, seed: int | None,
           out_dir: str) -> None:
    """LHS-sample the policy space, evaluate the batch, write records.csv."""
    cfg = _config(config_path)
    snapshot = _snapshot(cfg)
    count = n if n is not None else cfg.sample_n
    rng_seed = seed if seed is not None else cfg.sample_seed
    policies = pol.sample_policies(cfg.policy_space(), count, rng_seed)
    records = pol.evaluate_batch(snapshot, policies, cfg.eval_settings())
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dataio.records_to_csv(out / "records.csv", records)
    write_manifest(out, cfg, ["records.csv"])
    n_valid = sum(1 for r in records if r.valid)
    click.echo(f"evaluated {len(records)} policies ({n_valid} valid) -> {out}")


@cli.command()
@click.option("--records", "records_path", type=click.Path(), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", type=click.Path(), default=None)
def pareto(records_path: str, config_path: str | None, out_dir: str | None) -> None:
    """Extract the Pareto front and knee from an evaluated batch."""
    path = Path(records_path)
    if not path.exists():
        raise click.UsageError(f"records file not found: {records_path}")
    records = dataio.records_from_csv(path)
    front = pol.pareto_front(records)
    if not front:
        raise click.ClickException("no valid records; empty frontier")
    knee_id = pol.knee_point(records, front)
    out = Path(out_dir) if out_dir else path.parent
    out.mkdir(parents=True, exist_ok=True)
    dataio.records_to_csv(out / "pareto.csv",
                          [r for r in records if r.id in set(front)])
    knee = next(r for r in records if r.id == knee_id)
    spatial: dict[str, str] = {}
    if config_path:
        cfg = _config(config_path)
        if cfg.network_path and cfg.blocks_path:
            spatial = _knee_spatial_outputs(cfg, knee, out)
    payload = {"id": knee.id, "policy": {**knee.policy.params(),
                                         "priority": list(knee.policy.priority),
                                         "b_total": knee.policy.b_total,
                                         "shares": knee.policy.share_dict(),
                                         "gamma": knee.policy.gamma_dict()},
               "raw": knee.raw, "norm": knee.norm, "spatial_outputs": spatial}
    with open(out / "knee.json", "w") as fh:
        json.dump(payload, fh, indent=2)
    click.echo(f"frontier size {len(front)}, knee id {knee_id} -> {out}")


def _knee_spatial_outputs(cfg: RunConfig, knee: pol.ObjectiveRecord,
                          out: Path) -> dict[str, str]:
    snapshot = _snapshot(cfg)
    settings = cfg.eval_settings()
    p = knee.policy
    fields = [netgraph.mix_scores(
        snapshot.centrality("choice", settings.choice_cost, r),
        snapshot.centrality("integration", settings.integration_cost, r), s)
        for r, s in zip(p.radii, p.sigmas)]
    block_ids = [b.id for b in snapshot.blocks]
    tensor = blockmap.normalize_per_tier(
        blockmap.block_accessibility(fields, snapshot.adjacency, block_ids))
    hierarchy = basins.build_clusters(snapshot.blocks, tensor, list(p.radii))
    result = allocator.allocate(snapshot.blocks, tensor, hierarchy, p.share_dict(),
                                priority=p.priority, tier_names=list(p.tier_names),
                                min_parcels=settings.min_parcels,
                                tau_int=settings.tau_int)
    a_tilde = intensity.weighted_accessibility(tensor, list(p.rhos))
    access_of = dict(zip(block_ids, a_tilde))
    lots = [intensity.Lot(block=b, use=u, area=area, access=float(access_of[b]))
            for b in result.block_ids
            for u, area in result.x[b].items() if area > 0]
    ir = intensity.compute_intensity(lots, intensity.IntensityConfig(
        b_total=p.b_total, gamma=p.gamma_dict(), rho=list(p.rhos),
        f_bar=settings.f_bar, footprint_ratio=settings.footprint_ratio,
        storey_height=settings.storey_height))
    far_of: dict[int, float] = {}
    for lot, f in zip(ir.lots, ir.far):
        far_of[lot.block] = far_of.get(lot.block, 0.0) + f * lot.area
    props = {b: {"use": result.dominant[b],
                 "far": far_of.get(b, 0.0) / result.lot_areas[b],
                 **{f"x_{u}": result.x[b][u] for u in allocator.USES}}
             for b in result.block_ids}
    path = out / "knee_allocation.geojson"
    dataio.write_blocks_geojson(path, snapshot.blocks, props)
    return {"allocation": str(path)}


@cli.command()
@click.option("--run", "run_dir", type=click.Path(exists=True), required=True)
def report(run_dir: str) -> None:
    """Write Spearman matrices and per-parameter sensitivity summaries."""
    run = Path(run_dir)
    records = dataio.records_from_csv(run / "records.csv")
    front = pol.pareto_front(records)
    for scope, ids in (("all", None), ("front", front)):
        matrix = pol.rank_correlations(records, ids)
        rows = [[a] + [("" if matrix[a][b] is None else matrix[a][b])
                       for b in pol.METRICS] for a in pol.METRICS]
        dataio.write_csv(run / f"spearman_{scope}.csv",
                         ["metric"] + list(pol.METRICS), rows)
    params = [f"radius_{t}" for t in records[0].policy.tier_names]
    for param in params:
        rows = pol.sensitivity_groups(records, front, param)
        if not rows:
            continue
        header = list(rows[0])
        dataio.write_csv(run / f"sensitivity_{param}.csv", header,
                         [[row[h] for h in header] for row in rows])
    click.echo(f"report written to {run}")


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--port", type=int, default=8787, show_default=True)
@click.option("--runs", "runs_dir", type=click.Path(), default=None,
              help="directory holding sampling run outputs")
def serve(config_path: str | None, port: int, runs_dir: str | None) -> None:
    """Serve the JSON API (and the planner UI, if built) over HTTP."""
    import uvicorn

    from .service import create_app

    cfg = _config(config_path)
    app = create_app(cfg, runs_dir=runs_dir)
    uvicorn.run(app, host="127.0.0.1", port=port)


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except (SiteFormatError, ValueError, FileNotFoundError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        click.echo(f"error: {exc.message}", err=True)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
