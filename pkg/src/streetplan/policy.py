"""Policy-space sampling, pipeline evaluation, and Pareto screening.

A policy is one point in the decision space: analysis radii, per-tier
choice/integration mixing weights, FAR tier weights, land-use and
construction share targets, the priority order, and the construction
total. Policies are drawn by Latin hypercube sampling, each is pushed
through the full pipeline, objectives are min-max normalized across the
batch, and the non-dominated set plus its utopia-nearest knee are
extracted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats
from scipy.stats import qmc

from . import allocator, basins, blockmap, intensity, netgraph
from .allocator import BAD_USES, DEFAULT_PRIORITY, GOOD_USES, USES
from .blockmap import Block
from .netgraph import SegmentGraph, StreetNetwork

__all__ = [
    "DimensionSpec",
    "PolicySpace",
    "Policy",
    "EvalSettings",
    "SiteSnapshot",
    "ObjectiveRecord",
    "sample_policies",
    "evaluate_policy",
    "evaluate_batch",
    "accessibility_utility",
    "jobs_housing_penalty",
    "normalize_objectives",
    "pareto_front",
    "knee_point",
    "rank_correlations",
    "sensitivity_groups",
    "OBJECTIVES",
    "METRICS",
]

# The three screening objectives, all minimized on [0, 1].
OBJECTIVES = ("one_minus_au", "d_total", "jh_pen")
# All tracked metrics (normalized) for reporting and correlations.
METRICS = ("one_minus_au", "d_b", "d_lu", "d_cs", "d_total", "jh_pen")

# Observed land-use shares of the case-study district; default targets.
DEFAULT_SHARES = {"F": 0.058, "B": 0.174, "E": 0.047, "G": 0.065,
                  "A": 0.059, "R": 0.333, "I": 0.190, "T": 0.074}
DEFAULT_GAMMA = {"A": 0.10, "B": 0.25, "G": 0.0, "I": 0.05,
                 "T": 0.05, "R": 0.35, "E": 0.10, "F": 0.10}
DEFAULT_B_TOTAL = 6_000_000.0  # m^2
DEFAULT_TIER_NAMES = ("district", "community_cluster", "community")
DEFAULT_RADIUS_GRIDS = {
    "district": (1200.0, 1400.0, 1600.0),
    "community_cluster": (600.0, 700.0, 800.0, 900.0),
    "community": (250.0, 300.0, 350.0, 400.0),
}


@dataclass(frozen=True)
class DimensionSpec:
    """One sampled dimension: continuous bounds or a discrete grid."""

    name: str
    low: float = 0.0
    high: float = 1.0
    grid: tuple[float, ...] | None = None

    @property
    def is_discrete(self) -> bool:
        return self.grid is not None


@dataclass
class PolicySpace:
    tier_names: tuple[str, ...] = DEFAULT_TIER_NAMES
    radius_dims: tuple[DimensionSpec, ...] = ()
    sigma_dims: tuple[DimensionSpec, ...] = ()
    rho_dims: tuple[DimensionSpec, ...] = ()
    shares: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_SHARES))
    gamma: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_GAMMA))
    priority: tuple[str, ...] = DEFAULT_PRIORITY
    b_total: float = DEFAULT_B_TOTAL
    sample_priority: bool = False  # random-key sampling of the use order
    sample_shares: bool = False  # simplex sampling of land-use targets

    def __post_init__(self) -> None:
        if not self.radius_dims:
            self.radius_dims = tuple(
                DimensionSpec(name=f"radius_{t}", grid=DEFAULT_RADIUS_GRIDS[t])
                for t in self.tier_names)
        if not self.sigma_dims:
            self.sigma_dims = tuple(DimensionSpec(name=f"sigma_{i}")
                                    for i in range(len(self.tier_names)))
        if not self.rho_dims:
            self.rho_dims = tuple(DimensionSpec(name=f"rho_{i}")
                                  for i in range(len(self.tier_names)))
        for dims in (self.radius_dims, self.sigma_dims, self.rho_dims):
            for d in dims:
                if d.grid is None and d.low > d.high:
                    raise ValueError(f"dimension {d.name}: low > high")
                if d.grid is not None and not d.grid:
                    raise ValueError(f"dimension {d.name}: empty grid")

    def continuous_dims(self) -> list[DimensionSpec]:
        extra = []
        if self.sample_priority:
            extra = [DimensionSpec(name=f"prio_key_{u}") for u in USES]
        if self.sample_shares:
            extra += [DimensionSpec(name=f"share_key_{u}") for u in USES]
        return [d for d in (*self.radius_dims, *self.sigma_dims, *self.rho_dims)
                if not d.is_discrete] + extra


@dataclass(frozen=True)
class Policy:
    tier_names: tuple[str, ...]
    radii: tuple[float, ...]  # coarse -> fine, meters
    sigmas: tuple[float, ...]
    rhos: tuple[float, ...]  # renormalized to sum 1
    shares: tuple[tuple[str, float], ...]
    gamma: tuple[tuple[str, float], ...]
    priority: tuple[str, ...]
    b_total: float

    def params(self) -> dict[str, float]:
        """Flat parameter view used for sensitivity grouping and export."""
        out: dict[str, float] = {}
        for name, r in zip(self.tier_names, self.radii):
            out[f"radius_{name}"] = r
        for i, s in enumerate(self.sigmas):
            out[f"sigma_{i}"] = s
        for i, r in enumerate(self.rhos):
            out[f"rho_{i}"] = r
        return out

    def share_dict(self) -> dict[str, float]:
        return dict(self.shares)

    def gamma_dict(self) -> dict[str, float]:
        return dict(self.gamma)


def sample_policies(space: PolicySpace, n: int, seed: int) -> list[Policy]:
    """Latin hypercube draw of n policies; identical seeds reproduce bytes.

    Continuous dimensions are stratified (one point per equal-probability
    stratum); discrete dimensions are drawn uniformly from their grids.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    cont = space.continuous_dims()
    rng = np.random.default_rng(seed)
    if cont:
        engine = qmc.LatinHypercube(d=len(cont), seed=rng)
        unit = engine.random(n)
    else:
        unit = np.zeros((n, 0))
    cont_vals = {d.name: d.low + unit[:, i] * (d.high - d.low)
                 for i, d in enumerate(cont)}
    disc_vals = {}
    for d in (*space.radius_dims, *space.sigma_dims, *space.rho_dims):
        if d.is_discrete:
            disc_vals[d.name] = rng.choice(np.asarray(d.grid), size=n)

    def value(name: str, k: int) -> float:
        if name in cont_vals:
            return float(cont_vals[name][k])
        return float(disc_vals[name][k])

    policies = []
    for k in range(n):
        radii = tuple(value(d.name, k) for d in space.radius_dims)
        sigmas = tuple(value(d.name, k) for d in space.sigma_dims)
        rhos = np.array([value(d.name, k) for d in space.rho_dims])
        if rhos.sum() <= 0:
            rhos = np.full(len(rhos), 1.0 / len(rhos))
        else:
            rhos = rhos / rhos.sum()
        priority = space.priority
        if space.sample_priority:
            keys = [(-(cont_vals[f"prio_key_{u}"][k]), u) for u in USES]
            priority = tuple(u for _, u in sorted(keys))
        shares = dict(space.shares)
        if space.sample_shares:
            raw = np.array([cont_vals[f"share_key_{u}"][k] for u in USES])
            raw = raw / raw.sum() if raw.sum() > 0 else np.full(len(USES), 1 / len(USES))
            shares = dict(zip(USES, (float(v) for v in raw)))
        policies.append(Policy(
            tier_names=space.tier_names, radii=radii, sigmas=sigmas,
            rhos=tuple(float(r) for r in rhos),
            shares=tuple(sorted(shares.items())),
            gamma=tuple(sorted(space.gamma.items())),
            priority=priority, b_total=space.b_total))
    return policies


@dataclass
class EvalSettings:
    """Pipeline knobs that are fixed across a sampling batch."""

    choice_cost: str = "metric"
    integration_cost: str = "angular"
    tau_int: float = 0.6
    min_parcels: dict[str, float] | None = None
    accounting: str = "mixed"
    f_bar: float = 0.8
    footprint_ratio: float = 0.5
    storey_height: float = 3.6
    jh_target: float = 1.2
    cluster_thresholds: tuple[float, ...] | None = None  # default: the radii
    frontage_weighted: bool = False


@dataclass
class SiteSnapshot:
    """Immutable site data shared by every policy evaluation."""

    network: StreetNetwork
    graph: SegmentGraph
    blocks: list[Block]
    adjacency: dict[int, list[int]]
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, network: StreetNetwork, blocks: list[Block],
              buffer: float = blockmap.DEFAULT_ADJACENCY_BUFFER,
              snap_tolerance: float = netgraph.DEFAULT_SNAP_TOLERANCE) -> "SiteSnapshot":
        graph = netgraph.build_segment_graph(network, snap_tolerance)
        adjacency = blockmap.associate_segments(blocks, network, buffer)
        return cls(network=network, graph=graph, blocks=blocks, adjacency=adjacency)

    def centrality(self, kind: str, cost: str, radius: float) -> netgraph.CentralityField:
        key = (kind, cost, round(radius, 6))
        if key not in self._cache:
            self._cache[key] = netgraph.compute_centrality(self.graph, kind, cost, radius)
        return self._cache[key]


@dataclass
class ObjectiveRecord:
    id: int
    policy: Policy
    raw: dict[str, float] = field(default_factory=dict)
    norm: dict[str, float] = field(default_factory=dict)
    valid: bool = True
    error: str | None = None


def accessibility_utility(lots: list[intensity.Lot], far: list[float]) -> float:
    """FAR- and area-weighted accessibility of non-industrial intensity."""
    denom = sum(f * lot.area for lot, f in zip(lots, far))
    if denom <= 0:
        raise ValueError("zero built area; accessibility utility undefined")
    keep = GOOD_USES | {"R"}
    num = sum(f * lot.area * lot.access
              for lot, f in zip(lots, far) if lot.use in keep)
    return num / denom


def jobs_housing_penalty(use_areas: dict[str, float], r0: float = 1.2) -> float:
    """Squared deviation of the jobs/housing area ratio from the target."""
    housing = use_areas.get("R", 0.0)
    if housing <= 0:
        raise ValueError("zero housing area; jobs-housing ratio undefined")
    jobs = use_areas.get("B", 0.0) + use_areas.get("F", 0.0)
    return (jobs / housing - r0) ** 2


def evaluate_policy(snapshot: SiteSnapshot, policy: Policy,
                    settings: EvalSettings | None = None,
                    record_id: int = 0) -> ObjectiveRecord:
    """Run the full pipeline for one policy; failures yield invalid records."""
    settings = settings or EvalSettings()
    record = ObjectiveRecord(id=record_id, policy=policy)
    try:
        record.raw = _evaluate_raw(snapshot, policy, settings)
    except Exception as exc:  # noqa: BLE001 - batch must survive bad policies
        record.valid = False
        record.error = f"{type(exc).__name__}: {exc}"
    return record


def _evaluate_raw(snapshot: SiteSnapshot, policy: Policy,
                  settings: EvalSettings) -> dict[str, float]:
    fields = []
    for radius, sigma in zip(policy.radii, policy.sigmas):
        choice = snapshot.centrality("choice", settings.choice_cost, radius)
        integ = snapshot.centrality("integration", settings.integration_cost, radius)
        fields.append(netgraph.mix_scores(choice, integ, sigma))
    block_ids = [b.id for b in snapshot.blocks]
    if settings.frontage_weighted:
        raw = blockmap.frontage_weighted_accessibility(fields, snapshot.adjacency, block_ids)
    else:
        raw = blockmap.block_accessibility(fields, snapshot.adjacency, block_ids)
    tensor = blockmap.normalize_per_tier(raw)

    thresholds = list(settings.cluster_thresholds or policy.radii)
    hierarchy = basins.build_clusters(snapshot.blocks, tensor, thresholds)
    result = allocator.allocate(
        snapshot.blocks, tensor, hierarchy, policy.share_dict(),
        priority=policy.priority, tier_names=list(policy.tier_names),
        min_parcels=settings.min_parcels, tau_int=settings.tau_int)

    a_tilde = intensity.weighted_accessibility(tensor, list(policy.rhos))
    access_of = dict(zip(block_ids, a_tilde))
    lots = [intensity.Lot(block=b, use=u, area=area, access=float(access_of[b]))
            for b in result.block_ids
            for u, area in result.x[b].items() if area > 0]
    config = intensity.IntensityConfig(
        b_total=policy.b_total, gamma=policy.gamma_dict(),
        rho=list(policy.rhos), f_bar=settings.f_bar,
        footprint_ratio=settings.footprint_ratio,
        storey_height=settings.storey_height)
    ir = intensity.compute_intensity(lots, config)

    diag = allocator.achieved_shares(result, policy.share_dict(),
                                     accounting=settings.accounting)
    au = accessibility_utility(ir.lots, ir.far)
    jh = jobs_housing_penalty(result.use_areas(), settings.jh_target)
    return {
        "au": float(au),
        "one_minus_au": float(1.0 - au),
        "d_b": float(ir.d_b),
        "d_lu": float(diag.d_lu),
        "d_cs": float(ir.d_cs),
        "jh_pen": float(jh),
    }


def evaluate_batch(snapshot: SiteSnapshot, policies: list[Policy],
                   settings: EvalSettings | None = None) -> list[ObjectiveRecord]:
    records = [evaluate_policy(snapshot, p, settings, record_id=i)
               for i, p in enumerate(policies)]
    normalize_objectives(records)
    return records


def _minmax(values: np.ndarray) -> np.ndarray:
    lo, hi = values.min(), values.max()
    if hi - lo <= 0:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def normalize_objectives(records: list[ObjectiveRecord]) -> list[ObjectiveRecord]:
    """Min-max every metric over the valid records; build the composite cost.

    The three deviation terms are normalized first, summed, and the sum is
    min-maxed again to give d_total in [0, 1]. Invalid records keep empty
    norm maps and never contribute to the ranges.
    """
    valid = [r for r in records if r.valid]
    if not valid:
        return records
    cols = {}
    for key in ("one_minus_au", "d_b", "d_lu", "d_cs", "jh_pen"):
        cols[key] = _minmax(np.array([r.raw[key] for r in valid]))
    d_total = _minmax(cols["d_b"] + cols["d_lu"] + cols["d_cs"])
    for i, r in enumerate(valid):
        r.norm = {key: float(cols[key][i]) for key in cols}
        r.norm["d_total"] = float(d_total[i])
    return records


def pareto_front(records: list[ObjectiveRecord]) -> list[int]:
    """Ids of non-dominated records on the three normalized objectives."""
    valid = [r for r in records if r.valid and r.norm]
    if not valid:
        return []
    pts = np.array([[r.norm[k] for k in OBJECTIVES] for r in valid])
    n = len(valid)
    keep = []
    for i in range(n):
        diff = pts - pts[i]
        dominated = ((diff <= 0).all(axis=1) & (diff < 0).any(axis=1)).any()
        if not dominated:
            keep.append(valid[i].id)
    return keep


def knee_point(records: list[ObjectiveRecord], front_ids: list[int]) -> int:
    """Front member nearest the utopia origin after within-front min-max.

    Ties are broken by lower raw construction-share deviation, then lower
    raw land-use deviation, then ascending id.
    """
    front = [r for r in records if r.id in set(front_ids)]
    if not front:
        raise ValueError("empty Pareto front")
    pts = np.array([[r.norm[k] for k in OBJECTIVES] for r in front])
    scaled = np.column_stack([_minmax(pts[:, j]) for j in range(pts.shape[1])])
    dists = np.sqrt((scaled ** 2).sum(axis=1))
    ranked = sorted(
        ((float(dists[i]), r.raw.get("d_cs", math.inf),
          r.raw.get("d_lu", math.inf), r.id)
         for i, r in enumerate(front)))
    return ranked[0][3]


def rank_correlations(records: list[ObjectiveRecord],
                      ids: list[int] | None = None) -> dict[str, dict[str, float | None]]:
    """Spearman rank correlation for every metric pair over a record subset.

    Constant columns have undefined correlation and are reported as None.
    """
    subset = [r for r in records if r.valid and r.norm
              and (ids is None or r.id in set(ids))]
    if len(subset) < 3:
        raise ValueError("need at least 3 records for rank correlations")
    data = {m: np.array([r.norm[m] for r in subset]) for m in METRICS}
    out: dict[str, dict[str, float | None]] = {m: {} for m in METRICS}
    for a in METRICS:
        for b in METRICS:
            if np.ptp(data[a]) == 0 or np.ptp(data[b]) == 0:
                out[a][b] = None
                continue
            rho = stats.spearmanr(data[a], data[b]).statistic
            out[a][b] = float(rho)
    return out


def sensitivity_groups(records: list[ObjectiveRecord], front_ids: list[int],
                       param: str) -> list[dict[str, float]]:
    """Objective quartiles per discrete parameter value, on frontier records.

    Returns one row per parameter value holding q25/q50/q75 of each
    screening objective; values chosen by no frontier policy are omitted.
    """
    front = [r for r in records if r.id in set(front_ids)]
    groups: dict[float, list[ObjectiveRecord]] = {}
    for r in front:
        params = r.policy.params()
        if param not in params:
            raise ValueError(f"unknown policy parameter {param!r}")
        groups.setdefault(params[param], []).append(r)
    rows = []
    for value in sorted(groups):
        row: dict[str, float] = {"value": value, "count": len(groups[value])}
        for obj in OBJECTIVES:
            vals = np.array([r.norm[obj] for r in groups[value]])
            row[f"{obj}_q25"] = float(np.percentile(vals, 25))
            row[f"{obj}_q50"] = float(np.percentile(vals, 50))
            row[f"{obj}_q75"] = float(np.percentile(vals, 75))
        rows.append(row)
    return rows
