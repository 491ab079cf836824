"""Run measurement: parking events, edge detectors, occupancy averages,
and per-run summaries split by participation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .network import RoadNetwork

WINDOW = 900  # seconds per detector counting interval
FLOW_PER_COUNT = 3600.0 / WINDOW  # one crossing per window in veh/h


@dataclass
class ParkingEvent:
    driver: int
    participant: bool
    occupied_area: int
    preferred_area: int
    paid_price: float
    parking_distance: float
    time: int


@dataclass
class DetectorRecord:
    edge: int
    window: int
    count: int

    @property
    def flow(self) -> float:
        return self.count * FLOW_PER_COUNT


def parking_distance(net: RoadNetwork, occupied_area: int, preferred_area: int) -> float:
    """Driving distance from the occupied parking area to the preferred one."""
    return float(net.area_dist[occupied_area, preferred_area])


class DetectorBank:
    """Per-edge crossing counters bucketed into fixed windows.

    A detector fires when a vehicle exits its edge; counts convert to
    vehicles/hour.
    """

    def __init__(self, n_edges: int):
        self.n_edges = n_edges
        self.counts = np.zeros((n_edges, 32), dtype=np.int64)

    def fire(self, edge: int, t: int) -> None:
        w = t // WINDOW
        if w >= self.counts.shape[1]:
            grown = np.zeros((self.n_edges, w + 16), dtype=np.int64)
            grown[:, : self.counts.shape[1]] = self.counts
            self.counts = grown
        self.counts[edge, w] += 1

    def records(self) -> list[DetectorRecord]:
        out = []
        edges, windows = np.nonzero(self.counts)
        for e, w in zip(edges, windows):
            out.append(DetectorRecord(int(e), int(w), int(self.counts[e, w])))
        return out

    def steady_windows(self, t_start: int, t_end: int) -> range:
        """Windows fully inside [t_start, t_end]."""
        first = math.ceil(t_start / WINDOW)
        last = t_end // WINDOW  # window w covers [900w, 900(w+1))
        return range(first, max(first, last))

    def mean_flow(self, t_start: int, t_end: int) -> float:
        """Unweighted mean flow over all edges and steady-state windows."""
        ws = self.steady_windows(t_start, t_end)
        if len(ws) == 0:
            return 0.0
        width = self.counts.shape[1]
        sel = [w for w in ws if w < width]
        block = np.zeros((self.n_edges, len(ws)))
        if sel:
            block[:, : len(sel)] = self.counts[:, sel]
        return float(block.mean() * FLOW_PER_COUNT)


class OccupancyIntegrator:
    """Time integral of occupied spaces per area, snapshotted at two marks."""

    def __init__(self, n_areas: int):
        self.integral = [0.0] * n_areas
        self.last_t = [0] * n_areas
        self.count = [0] * n_areas
        self.marks: dict[int, list[float]] = {}

    def change(self, area: int, t: int, delta: int) -> None:
        self.integral[area] += self.count[area] * (t - self.last_t[area])
        self.last_t[area] = t
        self.count[area] += delta

    def mark(self, t: int) -> None:
        for a in range(len(self.integral)):
            self.change(a, t, 0)
        self.marks[t] = list(self.integral)

    def mean_between(self, t0: int, t1: int, capacity: int) -> np.ndarray:
        """Mean occupancy ratio per area between two marked times."""
        if t1 <= t0:
            return np.zeros(len(self.integral))
        a = np.array(self.marks[t0])
        b = np.array(self.marks[t1])
        return (b - a) / (capacity * (t1 - t0))


def nearest_rank(values, q: float) -> float:
    """Nearest-rank percentile: smallest value with at least q% at or below."""
    if len(values) == 0:
        raise ValueError("percentile of empty data")
    s = sorted(values)
    k = max(1, math.ceil(q / 100.0 * len(s)))
    return float(s[k - 1])


@dataclass
class GroupStats:
    n: int = 0
    route_mean: float = float("nan")
    route_p10: float = float("nan")
    route_p90: float = float("nan")
    price_mean: float = float("nan")
    price_p10: float = float("nan")
    price_p90: float = float("nan")
    dist_mean: float = float("nan")
    dist_p10: float = float("nan")
    dist_p90: float = float("nan")


@dataclass
class RunSummary:
    n_drivers: int
    n_participants: int
    overall: GroupStats
    participants: GroupStats
    non_participants: GroupStats
    flow_mean: float
    reservations_granted: int
    reservations_kept: int
    short_route_fraction: float
    bypassed_fraction: float
    edge_occupancy: np.ndarray = field(repr=False, default=None)
    edge_mean_price: np.ndarray = field(repr=False, default=None)

    @property
    def success_rate(self) -> float:
        if self.reservations_granted == 0:
            return float("nan")
        return self.reservations_kept / self.reservations_granted


def _group_stats(routes, prices, dists) -> GroupStats:
    g = GroupStats(n=len(routes))
    if g.n == 0:
        return g
    g.route_mean = float(np.mean(routes))
    g.route_p10 = nearest_rank(routes, 10)
    g.route_p90 = nearest_rank(routes, 90)
    g.price_mean = float(np.mean(prices))
    g.price_p10 = nearest_rank(prices, 10)
    g.price_p90 = nearest_rank(prices, 90)
    g.dist_mean = float(np.mean(dists))
    g.dist_p10 = nearest_rank(dists, 10)
    g.dist_p90 = nearest_rank(dists, 90)
    return g


def summarize(
    events: list[ParkingEvent],
    route_lengths: dict[int, float],
    participant_flags: dict[int, bool],
    detectors: DetectorBank,
    *,
    steady_start: int,
    steady_end: int,
    reservations_granted: int = 0,
    reservations_kept: int = 0,
    short_route_fraction: float = 0.0,
    bypassed_fraction: float = 0.0,
    edge_occupancy: np.ndarray | None = None,
    edge_mean_price: np.ndarray | None = None,
) -> RunSummary:
    """Aggregate one completed run into Table-style means and percentiles."""
    if not events:
        raise ValueError("cannot summarize a run with no parking events")

    def split(selector):
        evs = [e for e in events if selector(e.participant)]
        routes = [route_lengths[e.driver] for e in evs]
        prices = [e.paid_price for e in evs]
        dists = [e.parking_distance for e in evs]
        return _group_stats(routes, prices, dists)

    n_participants = sum(1 for p in participant_flags.values() if p)
    return RunSummary(
        n_drivers=len(participant_flags),
        n_participants=n_participants,
        overall=split(lambda p: True),
        participants=split(lambda p: p),
        non_participants=split(lambda p: not p),
        flow_mean=detectors.mean_flow(steady_start, steady_end),
        reservations_granted=reservations_granted,
        reservations_kept=reservations_kept,
        short_route_fraction=short_route_fraction,
        bypassed_fraction=bypassed_fraction,
        edge_occupancy=edge_occupancy,
        edge_mean_price=edge_mean_price,
    )
