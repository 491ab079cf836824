import numpy as np
import pytest

from mesopark.metrics import (
    DetectorBank,
    DetectorRecord,
    OccupancyIntegrator,
    ParkingEvent,
    nearest_rank,
    parking_distance,
    summarize,
)
from mesopark.network import build_grid, drive_distance

from oracles import turn_graph_drive_distance


@pytest.fixture(scope="module")
def net():
    return build_grid(6, 6)


def test_flow_conversion():
    assert DetectorRecord(edge=0, window=0, count=25).flow == pytest.approx(100.0)
    assert DetectorRecord(edge=0, window=0, count=0).flow == 0.0


def test_parking_distance_basic(net):
    assert parking_distance(net, 17, 17) == 0.0
    nxt = None
    for f in range(len(net.edges)):
        if net.tail(f) == net.head(0) and f != int(net.reverse_edge[0]):
            nxt = f
            break
    # Adjacent areas sit one midpoint-to-midpoint hop apart.
    assert parking_distance(net, 0, nxt) == pytest.approx(100.0)


def test_parking_distance_matches_oracle(net):
    rng = np.random.default_rng(2)
    for _ in range(25):
        a, b = (int(x) for x in rng.integers(0, 120, 2))
        want = turn_graph_drive_distance(net, (a, 50.0), (b, 50.0)) if a != b else 0.0
        assert parking_distance(net, a, b) == pytest.approx(want)
        assert parking_distance(net, a, b) == pytest.approx(
            drive_distance(net, (a, 50.0), (b, 50.0)) if a != b else 0.0
        )


def test_detector_windows_and_steady_state():
    bank = DetectorBank(4)
    # Hand-built trace over three windows: [0,900), [900,1800), [1800,2700).
    for t in (100, 200, 850):
        bank.fire(0, t)
    for t in (950, 960):
        bank.fire(1, t)
    for t in (1800, 2000, 2600):
        bank.fire(2, t)
    recs = {(r.edge, r.window): r.count for r in bank.records()}
    assert recs == {(0, 0): 3, (1, 1): 2, (2, 2): 3}

    # Steady state keeps only windows fully inside [1800, 2700]: window 2.
    # Mean over 4 edges: (0+0+3+0)/4 counts -> x4 veh/h.
    assert bank.mean_flow(1800, 2700) == pytest.approx(3 / 4 * 4.0)
    # A cut excluding everything yields zero flow.
    assert bank.mean_flow(2650, 2700) == 0.0


def test_flow_is_linear_in_counts():
    a = DetectorBank(2)
    b = DetectorBank(2)
    for t in (1900, 1910, 2000, 2500):
        a.fire(0, t)
        b.fire(0, t)
        b.fire(0, t)
    assert b.mean_flow(1800, 2700) == pytest.approx(2 * a.mean_flow(1800, 2700))


def test_detector_growth():
    bank = DetectorBank(1)
    bank.fire(0, 900 * 50 + 1)
    assert {(r.window, r.count) for r in bank.records()} == {(50, 1)}


def test_occupancy_integrator_means():
    occ = OccupancyIntegrator(2)
    occ.mark(0)
    occ.change(0, 10, +1)
    occ.change(0, 30, -1)  # 20 seconds occupied
    occ.change(1, 0, +1)  # occupied the whole interval
    occ.mark(40)
    means = occ.mean_between(0, 40, capacity=2)
    assert means[0] == pytest.approx(20 / (2 * 40))
    assert means[1] == pytest.approx(40 / (2 * 40))


def test_nearest_rank_percentiles():
    data = list(range(1, 11))
    assert nearest_rank(data, 10) == 1
    assert nearest_rank(data, 90) == 9
    assert nearest_rank(data, 100) == 10
    assert nearest_rank([1, 2, 3, 4], 50) == 2
    assert nearest_rank([7], 10) == 7
    with pytest.raises(ValueError):
        nearest_rank([], 50)


def test_percentiles_bracket_mean_on_monotone_data():
    data = list(range(100))
    assert nearest_rank(data, 10) <= np.mean(data) <= nearest_rank(data, 90)


def make_event(driver, participant, price, dist, area=0):
    return ParkingEvent(
        driver=driver,
        participant=participant,
        occupied_area=area,
        preferred_area=0,
        paid_price=price,
        parking_distance=dist,
        time=2000,
    )


def test_summarize_hand_computed():
    # Ten drivers: four participants, six not. Values chosen for easy
    # hand-checked means and nearest-rank percentiles.
    events = [make_event(i, i < 4, 0.5 + 0.1 * i, 10.0 * i) for i in range(10)]
    routes = {i: 1000.0 + 100.0 * i for i in range(10)}
    flags = {i: i < 4 for i in range(10)}
    bank = DetectorBank(2)
    for t in (1900, 1950, 2000):
        bank.fire(0, t)

    s = summarize(
        events,
        routes,
        flags,
        bank,
        steady_start=1800,
        steady_end=2700,
        reservations_granted=4,
        reservations_kept=3,
        short_route_fraction=0.015,
        bypassed_fraction=0.02,
    )
    assert s.n_drivers == 10
    assert s.n_participants == 4
    assert s.overall.price_mean == pytest.approx(0.95)
    assert s.overall.dist_mean == pytest.approx(45.0)
    assert s.overall.route_mean == pytest.approx(1450.0)
    assert s.overall.price_p10 == pytest.approx(0.5)
    assert s.overall.price_p90 == pytest.approx(1.3)
    assert s.participants.n == 4
    assert s.participants.price_mean == pytest.approx((0.5 + 0.6 + 0.7 + 0.8) / 4)
    assert s.participants.dist_p90 == pytest.approx(30.0)
    assert s.non_participants.n == 6
    assert s.non_participants.route_mean == pytest.approx(1650.0)
    assert s.success_rate == pytest.approx(0.75)
    # Window 2 holds 3 crossings on one of two edges.
    assert s.flow_mean == pytest.approx(3 / 2 * 4.0)


def test_summarize_baseline_prices_uniform():
    events = [make_event(i, False, 0.5, 0.0) for i in range(5)]
    s = summarize(
        events,
        {i: 500.0 for i in range(5)},
        {i: False for i in range(5)},
        DetectorBank(1),
        steady_start=0,
        steady_end=900,
    )
    assert s.overall.price_mean == 0.5
    assert np.isnan(s.participants.price_mean)
    assert np.isnan(s.success_rate)


def test_summarize_rejects_empty_run():
    with pytest.raises(ValueError):
        summarize({}, {}, {}, DetectorBank(1), steady_start=0, steady_end=900)
