"""Run configuration and manifest handling.

One JSON document drives every subcommand. Every constant defaults to the
published setup, so an empty config file reproduces the baseline
experiment on whatever site is supplied.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .allocator import DEFAULT_PRIORITY, MIN_PARCEL_DEFAULTS
from .policy import (DEFAULT_B_TOTAL, DEFAULT_GAMMA, DEFAULT_RADIUS_GRIDS,
                     DEFAULT_SHARES, DEFAULT_TIER_NAMES, DimensionSpec,
                     EvalSettings, Policy, PolicySpace)

__all__ = ["RunConfig", "write_manifest", "file_sha256"]

TOOL_VERSION = "0.1.0"


@dataclass
class RunConfig:
    network_path: str | None = None
    blocks_path: str | None = None

    tier_names: tuple[str, ...] = DEFAULT_TIER_NAMES
    radii: tuple[float, ...] = (1200.0, 900.0, 350.0)
    sigmas: tuple[float, ...] = (0.2, 0.2, 0.8)
    rhos: tuple[float, ...] = (0.5, 0.25, 0.25)
    shares: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_SHARES))
    gamma: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_GAMMA))
    priority: tuple[str, ...] = DEFAULT_PRIORITY
    b_total: float = DEFAULT_B_TOTAL

    f_bar: float = 0.8
    footprint_ratio: float = 0.5
    storey_height: float = 3.6
    tau_int: float = 0.6
    min_parcels: dict[str, float] = field(default_factory=lambda: dict(MIN_PARCEL_DEFAULTS))
    buffer: float = 2.0
    snap_tolerance: float = 0.5
    cluster_thresholds: tuple[float, ...] | None = None
    choice_cost: str = "metric"
    integration_cost: str = "angular"
    accounting: str = "mixed"
    jh_target: float = 1.2

    sample_n: int = 100
    sample_seed: int = 0
    radius_grids: dict[str, tuple[float, ...]] = field(
        default_factory=lambda: {k: tuple(v) for k, v in DEFAULT_RADIUS_GRIDS.items()})

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        cfg = cls()
        known = set(asdict(cfg))
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key, value in data.items():
            current = getattr(cfg, key)
            if isinstance(current, tuple) and value is not None:
                value = tuple(value)
            if key == "radius_grids":
                value = {k: tuple(v) for k, v in value.items()}
            setattr(cfg, key, value)
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    def fixed_policy(self) -> Policy:
        """The single policy described by the config's fixed vectors."""
        return Policy(tier_names=tuple(self.tier_names), radii=tuple(self.radii),
                      sigmas=tuple(self.sigmas), rhos=tuple(self.rhos),
                      shares=tuple(sorted(self.shares.items())),
                      gamma=tuple(sorted(self.gamma.items())),
                      priority=tuple(self.priority), b_total=self.b_total)

    def policy_space(self) -> PolicySpace:
        radius_dims = tuple(
            DimensionSpec(name=f"radius_{t}", grid=tuple(self.radius_grids[t]))
            for t in self.tier_names)
        return PolicySpace(tier_names=tuple(self.tier_names),
                           radius_dims=radius_dims,
                           shares=dict(self.shares), gamma=dict(self.gamma),
                           priority=tuple(self.priority), b_total=self.b_total)

    def eval_settings(self) -> EvalSettings:
        return EvalSettings(
            choice_cost=self.choice_cost, integration_cost=self.integration_cost,
            tau_int=self.tau_int, min_parcels=dict(self.min_parcels),
            accounting=self.accounting, f_bar=self.f_bar,
            footprint_ratio=self.footprint_ratio, storey_height=self.storey_height,
            jh_target=self.jh_target,
            cluster_thresholds=tuple(self.cluster_thresholds)
            if self.cluster_thresholds else None)


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir: str | Path, config: RunConfig,
                   outputs: list[str], run_id: str | None = None) -> Path:
    out_dir = Path(out_dir)
    inputs = {}
    for p in (config.network_path, config.blocks_path):
        if p and Path(p).exists():
            inputs[str(p)] = file_sha256(p)
    manifest = {
        "run_id": run_id or config.config_hash()[:12],
        "config_hash": config.config_hash(),
        "input_hashes": inputs,
        "tool_version": TOOL_VERSION,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "outputs": outputs,
    }
    path = out_dir / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2)
    return path
