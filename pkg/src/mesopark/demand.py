"""Trip population sampling: origins, destinations, stay durations,
attitude mixes, departure schedule, and participation flags.

All sampling is a pure function of (network, config); the same seed always
reproduces the same population.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .network import RoadNetwork


class Mix(str, Enum):
    """Population mixes: share of drivers with the distance-first attitude."""

    MIX10 = "MIX10"
    MIX25 = "MIX25"
    MIX50 = "MIX50"

    @property
    def p_distance_first(self) -> float:
        return {"MIX10": 0.10, "MIX25": 0.25, "MIX50": 0.50}[self.value]


BETA_DISTANCE_FIRST = 0.01
BETA_NEUTRAL = 0.5
DEFAULT_VALUATION = 5.0  # euros, personal cap on any parking bid


@dataclass(frozen=True)
class Driver:
    id: int
    origin_edge: int
    destination_edge: int
    beta: float  # attitude factor in (0, 1]: low values favor proximity
    valuation: float
    participant: bool
    base_depart: int  # seconds
    depart_offset: int  # seconds
    stay_duration: int  # seconds

    @property
    def depart(self) -> int:
        return self.base_depart + self.depart_offset


@dataclass
class DemandConfig:
    n_drivers: int = 11520
    horizon: int = 14400  # seconds over which base departures spread
    mix: Mix = Mix.MIX10
    penetration: float = 0.0
    seed: int = 0
    valuation: float = DEFAULT_VALUATION
    depart_offset_max: int = 300
    stay_min: int = 900
    stay_max: int = 2700


def attraction_weights(net: RoadNetwork) -> np.ndarray:
    """Destination probability per edge, linear in the edge ring index.

    Weight is (ring+1) units; the unit normalizes the sum to one, which on
    the standard 6x6 grid makes the outermost edges 1/336 and the innermost
    5/336 exactly.
    """
    w = (net.edge_ring + 1).astype(float)
    return w / w.sum()


def origin_weights(net: RoadNetwork) -> np.ndarray:
    """Origin probability per edge, growing with distance from the center.

    Euclidean midpoint distances are rescaled affinely so the farthest edge
    is exactly 9 times more likely than the closest one, then normalized.
    """
    xy = np.array([j.xy for j in net.junctions])
    mids = (xy[net.edge_from] + xy[net.edge_to]) / 2.0
    center = np.array([(net.cols - 1) * net.spacing / 2.0, (net.rows - 1) * net.spacing / 2.0])
    d = np.hypot(*(mids - center).T)
    dmin, dmax = d.min(), d.max()
    if dmax == dmin:
        w = np.ones_like(d)
    else:
        w = 1.0 + 8.0 * (d - dmin) / (dmax - dmin)
    return w / w.sum()


def sample_population(net: RoadNetwork, cfg: DemandConfig) -> list[Driver]:
    """Draw the full driver population for one scenario run.

    Base departures are evenly spaced over the horizon; the random offset,
    stay duration, attitude, and trip endpoints are drawn per driver.
    Participation takes exactly round(penetration * n) drivers via a seeded
    shuffle so the participant count never varies between seeds.
    """
    n = cfg.n_drivers
    rng = np.random.default_rng(cfg.seed)
    dest = rng.choice(len(net.edges), size=n, p=attraction_weights(net))
    orig = rng.choice(len(net.edges), size=n, p=origin_weights(net))
    beta = np.where(rng.random(n) < cfg.mix.p_distance_first, BETA_DISTANCE_FIRST, BETA_NEUTRAL)
    offsets = rng.integers(0, cfg.depart_offset_max + 1, size=n)
    stays = rng.integers(cfg.stay_min, cfg.stay_max + 1, size=n)
    order = rng.permutation(n)
    participants = np.zeros(n, dtype=bool)
    participants[order[: round(cfg.penetration * n)]] = True

    base = (np.arange(n, dtype=np.int64) * cfg.horizon) // n
    return [
        Driver(
            id=i,
            origin_edge=int(orig[i]),
            destination_edge=int(dest[i]),
            beta=float(beta[i]),
            valuation=cfg.valuation,
            participant=bool(participants[i]),
            base_depart=int(base[i]),
            depart_offset=int(offsets[i]),
            stay_duration=int(stays[i]),
        )
        for i in range(n)
    ]


def static_costs(net: RoadNetwork, beta: float, dest_area: int) -> np.ndarray:
    """Composite cost of every parking area under static zone prices.

    Price is normalized by the maximum zone price, distance by the distance
    of the remotest area from the destination.
    """
    prices = net.area_price
    d = net.area_dist[:, dest_area]
    dmax = d.max()
    dist_term = d / dmax if dmax > 0 else np.zeros_like(d)
    return beta * (prices / prices.max()) + (1.0 - beta) * dist_term


def preferred_lot(net: RoadNetwork, driver: Driver) -> int:
    """Most preferred parking area: composite-cost argmin, ties to lowest id."""
    return int(np.argmin(static_costs(net, driver.beta, driver.destination_edge)))


def cost_order(net: RoadNetwork, beta: float, dest_area: int) -> np.ndarray:
    """Area ids sorted by ascending composite cost, ties to lowest id."""
    return np.argsort(static_costs(net, beta, dest_area), kind="stable")


def dump_population(drivers: list[Driver], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["driver", "origin", "destination", "beta", "valuation",
             "participant", "depart", "stay"]
        )
        for d in drivers:
            w.writerow(
                [d.id, d.origin_edge, d.destination_edge, repr(d.beta),
                 repr(d.valuation), int(d.participant), d.depart, d.stay_duration]
            )


def load_population(path) -> list[Driver]:
    drivers = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            depart = int(row["depart"])
            drivers.append(
                Driver(
                    id=int(row["driver"]),
                    origin_edge=int(row["origin"]),
                    destination_edge=int(row["destination"]),
                    beta=float(row["beta"]),
                    valuation=float(row["valuation"]),
                    participant=bool(int(row["participant"])),
                    base_depart=depart,
                    depart_offset=0,
                    stay_duration=int(row["stay"]),
                )
            )
    return drivers
