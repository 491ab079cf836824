"""Discrete 1 s mesoscopic traffic engine.

Vehicles traverse edges at free-flow speed and leave each edge through a
rate-limited FIFO exit; parking, cruising/rerouting, the three guidance
behaviors, periodic auction batches, and the reservation lifecycle all run
on top of that. Internally the world is event-driven, but it advances
through the public `step` in whole seconds and is fully deterministic for
a fixed seed.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import auction as auction_mod
from .auction import AuctionConfig
from .demand import Driver, cost_order
from .metrics import DetectorBank, OccupancyIntegrator, ParkingEvent
from .network import RoadNetwork

# Space states
FREE, RESERVED, OCCUPIED = 0, 1, 2

# Event kinds; the numeric value is also the within-second priority.
TICK, MARK, WAKE, SPAWN, ARRIVE, EXIT, REACH, ATTEMPT = range(8)

# What a vehicle does when it reaches its current on-edge target.
GOAL_PARK, GOAL_SEARCH, GOAL_HOME = range(3)

DEFAULT_EXIT_CAPACITY = 0.5  # vehicles per second per edge
AUCTION_PERIOD = 15  # seconds between batch runs


class Phase(IntEnum):
    EN_ROUTE = 0
    CRUISING = 1
    PARKED = 2
    RETURNING = 3
    DONE = 4


@dataclass(slots=True)
class VehicleState:
    driver: Driver
    phase: Phase = Phase.EN_ROUTE
    current_edge: int = -1
    entry_pos: float = 0.0
    entry_time: int = 0
    in_queue: bool = False
    route: list[int] = field(default_factory=list)
    target_area: int = -1
    target_edge: int = -1
    target_pos: float = 0.0
    goal: int = GOAL_PARK
    reservation: int = -1  # space id, -1 when none
    won_price: float = -1.0
    fallback: bool = False  # lost a reservation, back to traditional search
    awaiting: bool = False  # participant still due to enter its batch
    paid_price: float = -1.0
    occupied_space: int = -1
    odometer: float = 0.0
    spawn_time: int = -1
    park_time: int = -1
    exit_time: int = -1
    version: int = 0  # invalidates superseded movement events


@dataclass(slots=True)
class DriverRecord:
    driver: int
    participant: bool
    beta: float
    origin_edge: int
    destination_edge: int
    preferred_area: int
    depart: int
    occupied_area: int = -1
    paid_price: float = float("nan")
    parking_distance: float = float("nan")
    route_length: float = float("nan")
    park_time: int = -1
    exit_time: int = -1
    reserved_space: int = -1
    won_price: float = float("nan")
    reservation_outcome: str = ""  # "", "kept", "lost"
    bypassed: bool = False  # reached its lot before the collecting batch


class World:
    """One scenario run: network, population, occupancy, and event queue."""

    def __init__(
        self,
        net: RoadNetwork,
        drivers: list[Driver],
        behavior: str = "baseline",
        *,
        seed: int = 0,
        exit_capacity: float = DEFAULT_EXIT_CAPACITY,
        auction_cfg: AuctionConfig | None = None,
        auction_period: int = AUCTION_PERIOD,
        steady_start: int = 1800,
        event_log: bool = False,
    ):
        if behavior not in ("baseline", "information", "auction"):
            raise ValueError(f"unknown behavior {behavior!r}")
        self.net = net
        self.drivers = drivers
        self.behavior = behavior
        self.seed = seed
        self.period = auction_period
        self.auction_cfg = auction_cfg or AuctionConfig()
        self.clock = 0
        self.rng = random.Random(f"{seed}:cruise")

        n_areas = len(net.areas)
        cap = net.capacity
        self.space_state = np.zeros(net.n_spaces, dtype=np.int8)
        self.space_holder = np.full(net.n_spaces, -1, dtype=np.int32)
        self.occupied_count = [0] * n_areas
        self.cap = cap

        self.exit_period = 1.0 / exit_capacity
        self.next_grant = [0.0] * len(net.edges)

        # Preferred area per driver (composite-cost argmin, static prices).
        self.pref = self._preferred_lots()
        self._rank_cache: dict[tuple[float, int], np.ndarray] = {}

        # Bidding agents register at auctions within the cruising radius of
        # their vehicular destination, the preferred lot they start driving
        # toward and the anchor of all their distance terms.
        self.reach = 2.0 * net.spacing

        # Candidate lots for a cruising vehicle standing at the end of an
        # edge: reachable without reversing, within two blocks. The divert
        # trigger watches one block farther out.
        thr = 2.0 * net.spacing + 1e-9
        self.areas_near = tuple(
            tuple(
                a
                for a in range(n_areas)
                if net.follow_dist[e, a] + net.area_pos[a] <= thr
            )
            for e in range(len(net.edges))
        )
        divert_thr = 3.0 * net.spacing + 1e-9
        self._near_sets = tuple(
            frozenset(
                a
                for a in range(n_areas)
                if net.follow_dist[e, a] + net.area_pos[a] <= divert_thr
            )
            for e in range(len(net.edges))
        )

        self.vehicles: dict[int, VehicleState] = {}
        self.records: dict[int, DriverRecord] = {}
        self.detectors = DetectorBank(len(net.edges))
        self.occupancy = OccupancyIntegrator(n_areas)
        self.events: list[ParkingEvent] = []
        self.price_sum = np.zeros(n_areas)
        self.price_n = np.zeros(n_areas, dtype=np.int64)
        self.log: list[str] | None = [] if event_log else None

        self.spawned = 0
        self.done = 0
        self.active = 0
        self.reservations_granted = 0
        self.reservations_kept = 0
        self.reservations_stolen = 0
        self.bypassed = 0
        self._window: list[int] = []

        ids = sorted(d.id for d in drivers)
        if ids != list(range(len(drivers))):
            raise ValueError("driver ids must be 0..n-1")

        self._heap: list[tuple] = []
        self._seq = 0
        self.last_depart = max((d.depart for d in drivers), default=0)
        self.steady_start = steady_start
        self.mark_t0 = min(steady_start, self.last_depart)
        self.mark_t1 = self.last_depart
        for d in sorted(drivers, key=lambda d: (d.depart, d.id)):
            self._push(d.depart, SPAWN, d.id)
        if behavior == "auction":
            self._push(self.period, TICK, 1)
        self._push(self.mark_t0, MARK, 0)
        self._push(self.mark_t1, MARK, 0)

    # ------------------------------------------------------------------ #
    # event plumbing

    def _push(self, t: int, kind: int, a: int, b: int = 0) -> None:
        heapq.heappush(self._heap, (t, kind, self._seq, a, b))
        self._seq += 1

    def step(self) -> None:
        """Advance the world by one second."""
        t = self.clock
        heap = self._heap
        while heap and heap[0][0] <= t:
            _, kind, _, a, b = heapq.heappop(heap)
            self._dispatch(kind, a, b)
        self.clock = t + 1

    def run(self, max_time: int | None = None) -> None:
        """Step until every vehicle has left the simulation."""
        guard = max_time or (self.last_depart + 2700 + 6 * 3600)
        while self._heap or self.active:
            if self.clock > guard:
                raise RuntimeError(
                    f"simulation did not drain by t={guard}: {self.active} active"
                )
            if self._heap and not self.active:
                self.clock = max(self.clock, self._heap[0][0])
            self.step()

    def _dispatch(self, kind: int, a: int, b: int) -> None:
        if kind == SPAWN:
            self._spawn(self.drivers[a])
        elif kind in (ARRIVE, REACH, ATTEMPT):
            v = self.vehicles[a]
            if b != v.version:
                return
            if kind == ARRIVE:
                self._arrive_edge_end(v)
            elif kind == REACH:
                self._reach_target(v)
            else:
                # The vehicle stood still while waiting to retry.
                v.entry_time = self.clock
                self._attempt_flow(v)
        elif kind == EXIT:
            self._exit_edge(self.vehicles[a])
        elif kind == WAKE:
            self._wake(self.vehicles[a])
        elif kind == TICK:
            self.auction_tick(a)
        elif kind == MARK:
            self.occupancy.mark(self.clock)

    # ------------------------------------------------------------------ #
    # movement

    def _position(self, v: VehicleState) -> float:
        length = float(self.net.edge_length[v.current_edge])
        if v.in_queue:
            return length
        speed = float(self.net.edge_speed[v.current_edge])
        return min(length, v.entry_pos + (self.clock - v.entry_time) * speed)

    def _set_route(self, v: VehicleState, target_edge: int, target_pos: float, goal: int) -> None:
        """Point the vehicle at an on-edge position, replacing any prior plan."""
        v.version += 1
        v.target_edge = target_edge
        v.target_pos = target_pos
        v.goal = goal
        net = self.net
        if v.in_queue:
            # The exit grant stands; the fresh route applies on release.
            v.route = net.route_after(v.current_edge, target_edge)
            return
        pos = self._position(v)
        speed = float(net.edge_speed[v.current_edge])
        if v.current_edge == target_edge and target_pos >= pos:
            v.route = []
            delay = math.ceil((target_pos - pos) / speed)
            self._push(self.clock + delay, REACH, v.driver.id, v.version)
        else:
            v.route = net.route_after(v.current_edge, target_edge)
            length = float(net.edge_length[v.current_edge])
            delay = math.ceil((length - pos) / speed)
            self._push(self.clock + delay, ARRIVE, v.driver.id, v.version)

    def _arrive_edge_end(self, v: VehicleState) -> None:
        e = v.current_edge
        v.in_queue = True
        grant = max(float(self.clock), self.next_grant[e])
        self.next_grant[e] = grant + self.exit_period
        self._push(int(math.ceil(grant)), EXIT, v.driver.id)

    def _exit_edge(self, v: VehicleState) -> None:
        e = v.current_edge
        self.detectors.fire(e, self.clock)
        v.odometer += float(self.net.edge_length[e]) - v.entry_pos
        v.in_queue = False
        nxt = v.route.pop(0)
        v.current_edge = nxt
        v.entry_pos = 0.0
        v.entry_time = self.clock
        if self._divert_if_full(v):
            return
        speed = float(self.net.edge_speed[nxt])
        if v.route:
            delay = math.ceil(float(self.net.edge_length[nxt]) / speed)
            self._push(self.clock + delay, ARRIVE, v.driver.id, v.version)
        else:
            delay = math.ceil(v.target_pos / speed)
            self._push(self.clock + delay, REACH, v.driver.id, v.version)

    def _divert_if_full(self, v: VehicleState) -> bool:
        """Divert a parking-bound vehicle approaching a full target: once the
        lot is within the two-block rerouting range, the vehicle picks an
        alternative instead of driving up to the curb. Reservation holders
        drive on; they only learn about a stolen space at the curb."""
        if (
            v.goal == GOAL_PARK
            and v.reservation < 0
            and not v.awaiting
            and self.occupied_count[v.target_area] >= self.cap
            and v.target_area in self._near_sets[v.current_edge]
        ):
            v.phase = Phase.CRUISING
            self.reroute_cruising(v)
            return True
        return False

    def _reach_target(self, v: VehicleState) -> None:
        v.odometer += v.target_pos - v.entry_pos
        v.entry_pos = v.target_pos
        v.entry_time = self.clock
        if v.goal == GOAL_PARK:
            self._attempt_flow(v)
        elif v.goal == GOAL_SEARCH:
            self.reroute_cruising(v)
        else:
            self._complete(v)

    # ------------------------------------------------------------------ #
    # population entry and exit

    def _spawn(self, d: Driver) -> None:
        v = VehicleState(driver=d)
        v.current_edge = d.origin_edge
        v.entry_pos = 0.0
        v.entry_time = self.clock
        v.spawn_time = self.clock
        self.vehicles[d.id] = v
        self.records[d.id] = DriverRecord(
            driver=d.id,
            participant=d.participant,
            beta=d.beta,
            origin_edge=d.origin_edge,
            destination_edge=d.destination_edge,
            preferred_area=int(self.pref[d.id]),
            depart=self.clock,
        )
        self.spawned += 1
        self.active += 1
        if self.behavior == "information" and d.participant:
            area = self.information_destination(d)
        else:
            area = int(self.pref[d.id])
        v.target_area = area
        if self.behavior == "auction" and d.participant:
            v.awaiting = True
            self._window.append(d.id)
        self._set_route(v, self.net.areas[area].edge_id, float(self.net.area_pos[area]), GOAL_PARK)
        self._divert_if_full(v)
        if self.log is not None:
            self.log.append(f"{self.clock} spawn {d.id} edge={d.origin_edge} target={area}")

    def _complete(self, v: VehicleState) -> None:
        v.phase = Phase.DONE
        v.exit_time = self.clock
        rec = self.records[v.driver.id]
        rec.route_length = v.odometer
        rec.exit_time = self.clock
        self.active -= 1
        self.done += 1
        if self.log is not None:
            self.log.append(f"{self.clock} exit {v.driver.id} route={v.odometer:.1f}")

    # ------------------------------------------------------------------ #
    # parking

    def attempt_park(self, v: VehicleState, area: int) -> int:
        """Space the vehicle may occupy right now, or -1 when the stop fails.

        A vehicle holding a reservation for this area insists on its reserved
        space; it fails if someone else physically occupies or re-reserves it.
        Everyone else takes the lowest-index space not physically occupied,
        reservations being invisible to them.
        """
        if v.reservation >= 0:
            s = v.reservation
            state = self.space_state[s]
            if state == FREE or (state == RESERVED and self.space_holder[s] == v.driver.id):
                return s
            return -1
        base = area * self.cap
        for s in range(base, base + self.cap):
            if self.space_state[s] != OCCUPIED:
                return s
        return -1

    def _attempt_flow(self, v: VehicleState) -> None:
        area = v.target_area
        space = self.attempt_park(v, area)
        if space >= 0:
            self.park_and_pay(v, area, space)
            return
        if v.reservation >= 0:
            # Reservation was physically taken before arrival.
            rec = self.records[v.driver.id]
            rec.reservation_outcome = "lost"
            v.reservation = -1
            v.fallback = True
            if self.log is not None:
                self.log.append(f"{self.clock} reservation-lost {v.driver.id}")
        v.phase = Phase.CRUISING
        self.reroute_cruising(v)

    def park_and_pay(self, v: VehicleState, area: int, space: int) -> None:
        prev = self.space_state[space]
        if prev == RESERVED and self.space_holder[space] != v.driver.id:
            # A traditional parker grabbed a reserved space; void the claim.
            victim = int(self.space_holder[space])
            self.reservations_stolen += 1
            if self.log is not None:
                self.log.append(f"{self.clock} reservation-stolen {victim} by={v.driver.id}")
        own = v.reservation == space
        self.space_state[space] = OCCUPIED
        self.space_holder[space] = v.driver.id
        self.occupied_count[area] += 1
        self.occupancy.change(area, self.clock, +1)
        v.occupied_space = space
        v.phase = Phase.PARKED
        v.park_time = self.clock
        v.paid_price = v.won_price if own else float(self.net.area_price[area])
        if own:
            self.reservations_kept += 1
            self.records[v.driver.id].reservation_outcome = "kept"
            v.reservation = -1

        rec = self.records[v.driver.id]
        rec.occupied_area = area
        rec.paid_price = v.paid_price
        rec.parking_distance = float(self.net.area_dist[area, rec.preferred_area])
        rec.park_time = self.clock
        self.events.append(
            ParkingEvent(
                driver=v.driver.id,
                participant=v.driver.participant,
                occupied_area=area,
                preferred_area=rec.preferred_area,
                paid_price=v.paid_price,
                parking_distance=rec.parking_distance,
                time=self.clock,
            )
        )
        self.price_sum[area] += v.paid_price
        self.price_n[area] += 1
        self._push(self.clock + v.driver.stay_duration, WAKE, v.driver.id)
        if self.log is not None:
            self.log.append(
                f"{self.clock} park {v.driver.id} area={area} space={space} paid={v.paid_price:.2f}"
            )

    def _wake(self, v: VehicleState) -> None:
        space = v.occupied_space
        area = space // self.cap
        self.space_state[space] = FREE
        self.space_holder[space] = -1
        self.occupied_count[area] -= 1
        self.occupancy.change(area, self.clock, -1)
        v.occupied_space = -1
        v.phase = Phase.RETURNING
        v.entry_time = self.clock
        origin = v.driver.origin_edge
        self._set_route(v, origin, float(self.net.edge_length[origin]), GOAL_HOME)
        if self.log is not None:
            self.log.append(f"{self.clock} depart-parking {v.driver.id}")

    # ------------------------------------------------------------------ #
    # cruising

    def reroute_cruising(self, v: VehicleState) -> None:
        """Pick a new lot within two blocks, or wander one random edge."""
        e = v.current_edge
        cands = [a for a in self.areas_near[e] if self.occupied_count[a] < self.cap]
        if cands:
            area = cands[self.rng.randrange(len(cands))]
            v.target_area = area
            te = self.net.areas[area].edge_id
            tp = float(self.net.area_pos[area])
            if te == v.current_edge and tp == self._position(v):
                # Already standing at the spot; retry next second.
                v.version += 1
                v.target_edge, v.target_pos, v.goal = te, tp, GOAL_PARK
                self._push(self.clock + 1, ATTEMPT, v.driver.id, v.version)
            else:
                self._set_route(v, te, tp, GOAL_PARK)
        else:
            rev = int(self.net.reverse_edge[e])
            out = [w for w in self.net.out_edges[self.net.head(e)] if w != rev]
            e2 = out[self.rng.randrange(len(out))]
            self._set_route(v, e2, float(self.net.edge_length[e2]), GOAL_SEARCH)

    # ------------------------------------------------------------------ #
    # guidance systems

    def information_destination(self, d: Driver) -> int:
        """Cheapest-cost area with a visibly free space at this instant."""
        key = (d.beta, d.destination_edge)
        order = self._rank_cache.get(key)
        if order is None:
            order = cost_order(self.net, d.beta, d.destination_edge)
            self._rank_cache[key] = order
        for a in order:
            if self.occupied_count[a] < self.cap:
                return int(a)
        return int(self.pref[d.id])

    def auction_tick(self, k: int) -> None:
        """Run the batch collecting participants that departed in the last window."""
        now = self.clock
        agents: list[int] = []
        for did in self._window:
            v = self.vehicles[did]
            v.awaiting = False
            if v.phase == Phase.EN_ROUTE and v.reservation < 0 and not v.fallback:
                agents.append(did)
            else:
                self.bypassed += 1
                self.records[did].bypassed = True
        self._window.clear()

        if agents:
            self._run_tick_batch(agents, k)
        if now < self.last_depart + self.period:
            self._push(now + self.period, TICK, k + 1)

    def _run_tick_batch(self, agents: list[int], k: int) -> None:
        net = self.net
        free = np.flatnonzero(self.space_state == FREE)
        if free.size == 0:
            return
        # Auction ids ascend by area and, within an area, from the highest
        # space index down: reservations claim spaces from the far end while
        # walk-in traffic fills from the low end.
        area_arr = free // self.cap
        offset = free % self.cap
        order = np.argsort(area_arr * self.cap + (self.cap - 1 - offset), kind="stable")
        spaces = free[order]
        areas = area_arr[order]
        start_prices = net.area_price[areas]

        dists = []
        d_maxes = []
        for a in agents:
            d = net.area_dist[areas, self.pref[a]].copy()
            # The reach stretches past two blocks when nothing nearer is on
            # offer, just far enough to cover the closest available lot.
            reach = max(self.reach, d.min())
            d[d > reach] = np.inf
            finite = d[np.isfinite(d)]
            dists.append(d)
            d_maxes.append(finite.max() if finite.size else 0.0)
        prices, leader, leader_bid, _, _ = auction_mod.run_batch_arrays(
            spaces,
            start_prices,
            agents,
            np.array([self.drivers[a].beta for a in agents]),
            np.array([self.drivers[a].valuation for a in agents]),
            dists,
            np.array(d_maxes),
            self.auction_cfg,
            f"{self.seed}:batch:{k}",
        )
        for i in np.flatnonzero(leader >= 0):
            did = agents[int(leader[i])]
            space = int(spaces[i])
            price = float(leader_bid[i])
            area = int(areas[i])
            v = self.vehicles[did]
            self.space_state[space] = RESERVED
            self.space_holder[space] = did
            v.reservation = space
            v.won_price = price
            self.reservations_granted += 1
            rec = self.records[did]
            rec.reserved_space = space
            rec.won_price = price
            v.target_area = area
            self._set_route(v, net.areas[area].edge_id, float(net.area_pos[area]), GOAL_PARK)
            if self.log is not None:
                self.log.append(
                    f"{self.clock} reservation-won {did} space={space} price={price:.2f}"
                )

    # ------------------------------------------------------------------ #
    # bookkeeping

    def check_conservation(self) -> None:
        assert self.spawned == self.done + self.active, (
            self.spawned,
            self.done,
            self.active,
        )

    def edge_mean_price(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return np.where(self.price_n > 0, self.price_sum / np.maximum(self.price_n, 1), np.nan)

    def _preferred_lots(self) -> np.ndarray:
        net = self.net
        prices = net.area_price
        out = np.zeros(len(self.drivers), dtype=np.int64)
        by_beta: dict[float, np.ndarray] = {}
        for beta in sorted({d.beta for d in self.drivers}):
            price_term = beta * (prices / prices.max())
            dmax = net.area_dist.max(axis=0)
            dist = np.where(dmax > 0, net.area_dist / np.where(dmax > 0, dmax, 1.0)[None, :], 0.0)
            costs = price_term[:, None] + (1.0 - beta) * dist
            by_beta[beta] = costs.argmin(axis=0)
        for d in self.drivers:
            out[d.id] = by_beta[d.beta][d.destination_edge]
        return out
