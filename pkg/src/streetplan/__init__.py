"""Street-network accessibility to land-use allocation and FAR assignment.

Pipeline stages:
  netgraph  - segment dual graph, radius-bounded Choice/Integration
  blockmap  - segment scores onto block polygons, per-tier normalization
  basins    - peak-seeded service clusters per tier
  allocator - greedy priority-guided land-use assignment
  intensity - accessibility-weighted FAR and heights
  policy    - LHS sampling, objectives, Pareto front, knee selection
  dataio    - GeoJSON/CSV persistence and the synthetic grid fixture
  service   - JSON HTTP API for the planner UI
"""

__version__ = "0.1.0"
