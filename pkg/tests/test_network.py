import math

import numpy as np
import pytest

from mesopark.errors import ConfigurationError
from mesopark.network import (
    Zone,
    build_grid,
    describe,
    drive_distance,
    junction_distance,
    zone_price,
)

from oracles import junction_shortest_distance, turn_graph_drive_distance


@pytest.fixture(scope="module")
def net():
    return build_grid(6, 6)


def test_standard_grid_counts(net):
    assert len(net.edges) == 120
    assert len(net.junctions) == 36
    assert net.n_spaces == 1800


def test_smallest_grid():
    small = build_grid(2, 2, capacity=1)
    assert len(small.edges) == 8
    assert len(small.junctions) == 4


def test_edge_count_formula_all_sizes():
    for rows in range(2, 9):
        for cols in range(2, 9):
            g = build_grid(rows, cols, capacity=1)
            expected = 2 * (rows * (cols - 1) + cols * (rows - 1))
            assert len(g.edges) == expected


def test_total_capacity(net):
    assert sum(a.capacity for a in net.areas) == 120 * 15
    assert all(len(a.space_ids) == a.capacity for a in net.areas)


def test_one_area_per_edge(net):
    assert len(net.areas) == len(net.edges)
    assert [a.edge_id for a in net.areas] == [e.id for e in net.edges]


def test_invalid_dimensions():
    with pytest.raises(ConfigurationError):
        build_grid(1, 6)
    with pytest.raises(ConfigurationError):
        build_grid(6, 6, spacing=0)
    with pytest.raises(ConfigurationError):
        build_grid(6, 6, capacity=0)


def test_junction_manhattan(net):
    assert junction_distance(net, 0, 2 * 6 + 1) == 300.0
    for j1 in (0, 7, 35):
        for j2 in (0, 14, 21):
            r1, c1 = divmod(j1, 6)
            r2, c2 = divmod(j2, 6)
            manhattan = (abs(r1 - r2) + abs(c1 - c2)) * 100.0
            assert junction_distance(net, j1, j2) == manhattan
            assert junction_distance(net, j1, j2) == junction_distance(net, j2, j1)


def test_junction_distance_matches_oracle(net):
    rng = np.random.default_rng(1)
    for _ in range(30):
        j1, j2 = rng.integers(0, 36, 2)
        assert junction_distance(net, int(j1), int(j2)) == pytest.approx(
            junction_shortest_distance(net, int(j1), int(j2))
        )


def test_drive_distance_zero_for_same_position(net):
    assert drive_distance(net, (17, 50.0), (17, 50.0)) == 0.0
    assert drive_distance(net, (3, 0.0), (3, 0.0)) == 0.0


def test_drive_distance_same_edge_forward(net):
    assert drive_distance(net, (5, 20.0), (5, 80.0)) == pytest.approx(60.0)


def test_drive_distance_matches_oracle_on_3x3():
    g = build_grid(3, 3)
    rng = np.random.default_rng(7)
    for _ in range(60):
        e1, e2 = rng.integers(0, len(g.edges), 2)
        p1, p2 = rng.uniform(0, 100, 2)
        got = drive_distance(g, (int(e1), float(p1)), (int(e2), float(p2)))
        want = turn_graph_drive_distance(g, (int(e1), float(p1)), (int(e2), float(p2)))
        assert got == pytest.approx(want), (e1, p1, e2, p2)


def test_drive_distance_exceeds_euclidean(net):
    xy = {j.id: j.xy for j in net.junctions}

    def pos_xy(edge, pos):
        (x1, y1) = xy[net.edges[edge].from_junction]
        (x2, y2) = xy[net.edges[edge].to_junction]
        f = pos / net.edges[edge].length
        return x1 + f * (x2 - x1), y1 + f * (y2 - y1)

    rng = np.random.default_rng(3)
    for _ in range(40):
        e1, e2 = rng.integers(0, 120, 2)
        p1, p2 = rng.uniform(0, 100, 2)
        d = drive_distance(net, (int(e1), float(p1)), (int(e2), float(p2)))
        (x1, y1), (x2, y2) = pos_xy(int(e1), p1), pos_xy(int(e2), p2)
        assert d >= math.hypot(x2 - x1, y2 - y1) - 1e-9


def test_triangle_inequality_sampled(net):
    rng = np.random.default_rng(11)
    for _ in range(60):
        pts = [(int(e), float(p)) for e, p in zip(rng.integers(0, 120, 3), rng.uniform(0, 100, 3))]
        a, b, c = pts
        assert drive_distance(net, a, c) <= (
            drive_distance(net, a, b) + drive_distance(net, b, c) + 1e-9
        )


def test_no_immediate_reversal_in_routes(net):
    for e in range(0, 120, 7):
        for t in range(0, 120, 11):
            route = net.route_after(e, t)
            assert route[-1] == t if e != t else route[-1] == e
            prev = e
            for nxt in route:
                assert nxt != net.reverse_edge[prev]
                assert net.tail(nxt) == net.head(prev)
                prev = nxt


def test_zone_partition(net):
    inner = [e for e in net.edges if e.zone == Zone.INNER]
    outer = [e for e in net.edges if e.zone == Zone.OUTER]
    assert len(inner) + len(outer) == 120
    assert len(inner) == 24  # 12 streets around the central four junctions


def test_zone_prices(net):
    innermost = next(e.id for e in net.edges if e.ring == 4)
    outermost = next(e.id for e in net.edges if e.ring == 0)
    assert zone_price(net, innermost) == 1.0
    assert zone_price(net, outermost) == 0.5


def test_custom_price_map():
    g = build_grid(6, 6, prices={Zone.OUTER: 0.3, Zone.INNER: 0.9})
    prices = {zone_price(g, e.id) for e in g.edges}
    assert prices == {0.3, 0.9}


def test_ring_distribution(net):
    counts = {}
    for e in net.edges:
        counts[e.ring] = counts.get(e.ring, 0) + 1
    assert counts == {0: 16, 1: 32, 2: 40, 3: 24, 4: 8}
    # Linear ring weights normalize with the closed-form constant.
    assert sum(e.ring + 1 for e in net.edges) == 336


def test_inner_edge_override():
    g = build_grid(6, 6, inner_edges={(0, 1), (1, 0)})
    inner = [e for e in g.edges if e.zone == Zone.INNER]
    assert {(e.from_junction, e.to_junction) for e in inner} == {(0, 1), (1, 0)}


def test_describe_dump(net):
    text = describe(net)
    lines = text.strip().splitlines()
    assert lines[0] == "grid 6 6 100 15"
    assert sum(1 for ln in lines if ln.startswith("junction ")) == 36
    assert sum(1 for ln in lines if ln.startswith("edge ")) == 120
    fields = next(ln for ln in lines if ln.startswith("edge 0 ")).split()
    assert len(fields) == 12
