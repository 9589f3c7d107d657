import math

import pytest

from streetplan import dataio, policy as pol
from streetplan.netgraph import Segment, StreetNetwork, build_segment_graph


def chain_network(n_segments: int = 3, length: float = 1.0) -> StreetNetwork:
    """Collinear chain of unit segments along the x axis."""
    nodes = [(i * length, 0.0) for i in range(n_segments + 1)]
    segments = [Segment(id=i, node_a=i, node_b=i + 1,
                        geometry=(nodes[i], nodes[i + 1]), length=length)
                for i in range(n_segments)]
    return StreetNetwork(nodes=nodes, segments=segments)


@pytest.fixture
def chain_graph():
    return build_segment_graph(chain_network(3))


@pytest.fixture(scope="session")
def grid_site():
    return dataio.make_synthetic_grid(6, 100.0)


@pytest.fixture(scope="session")
def grid_snapshot(grid_site):
    network, blocks = grid_site
    return pol.SiteSnapshot.build(network, blocks)


def assert_close(a, b, tol=1e-9):
    assert math.isclose(a, b, rel_tol=tol, abs_tol=tol), f"{a} != {b}"
