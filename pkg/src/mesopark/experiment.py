"""Scenario configuration, single-run and matrix execution, CSV persistence.

One YAML file describes a scenario; the matrix runner sweeps mixes,
behaviors, penetration levels, and seeds, and aggregates seed-averaged rows.
"""

from __future__ import annotations

import csv
import math
import os
import warnings
from dataclasses import asdict, dataclass, replace
from multiprocessing import Pool

import numpy as np
import yaml

from .auction import AuctionConfig
from .demand import DemandConfig, Mix, sample_population
from .errors import ConfigurationError
from .metrics import RunSummary, summarize
from .network import Zone, build_grid, describe, drive_distance
from .simcore import World

BEHAVIORS = ("baseline", "information", "auction")


@dataclass
class ScenarioConfig:
    rows: int = 6
    cols: int = 6
    spacing: float = 100.0
    capacity: int = 15
    price_outer: float = 0.5
    price_inner: float = 1.0
    free_flow_speed: float = 13.9
    exit_capacity: float = 0.5
    n_drivers: int = 11520
    horizon: int = 14400
    mix: str = "MIX10"
    behavior: str = "baseline"
    penetration: float = 0.0
    epsilon: float = 0.05
    valuation: float = 5.0
    auction_period: int = 15
    depart_offset_max: int = 300
    stay_min: int = 900
    stay_max: int = 2700
    steady_start: int = 1800
    seed: int = 0

    def validate(self) -> "ScenarioConfig":
        if self.behavior not in BEHAVIORS:
            raise ConfigurationError(
                f"behavior must be one of {BEHAVIORS}, got {self.behavior!r}"
            )
        if self.mix not in Mix.__members__:
            raise ConfigurationError(f"unknown mix {self.mix!r}")
        if not 0.0 <= self.penetration <= 1.0:
            raise ConfigurationError(f"penetration must be in [0, 1], got {self.penetration}")
        if self.n_drivers <= 0:
            raise ConfigurationError("n_drivers must be positive")
        if self.auction_period < 1:
            raise ConfigurationError("auction_period must be at least 1 second")
        if self.behavior == "baseline" and self.penetration != 0.0:
            # Baseline has no participants by definition.
            return replace(self, penetration=0.0)
        return self

    @classmethod
    def from_yaml(cls, path) -> "ScenarioConfig":
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_yaml(self, path) -> None:
        with open(path, "w") as fh:
            yaml.safe_dump(asdict(self), fh, sort_keys=False)


@dataclass
class MatrixSpec:
    mixes: tuple[str, ...] = ("MIX10", "MIX25", "MIX50")
    behaviors: tuple[str, ...] = ("information", "auction")
    penetrations: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8, 1.0)
    seeds: tuple[int, ...] = tuple(range(10))

    def expand(self, base: ScenarioConfig) -> list[ScenarioConfig]:
        """Every (mix, behavior, penetration, seed) cell plus one baseline
        per (mix, seed)."""
        cfgs = []
        for mix in self.mixes:
            for seed in self.seeds:
                cfgs.append(
                    replace(base, mix=mix, behavior="baseline", penetration=0.0, seed=seed)
                )
            for behavior in self.behaviors:
                for pen in self.penetrations:
                    for seed in self.seeds:
                        cfgs.append(
                            replace(base, mix=mix, behavior=behavior, penetration=pen, seed=seed)
                        )
        return [c.validate() for c in cfgs]


def build_network(cfg: ScenarioConfig):
    return build_grid(
        cfg.rows,
        cfg.cols,
        cfg.spacing,
        cfg.capacity,
        {Zone.OUTER: cfg.price_outer, Zone.INNER: cfg.price_inner},
        cfg.free_flow_speed,
    )


def run_scenario(
    cfg: ScenarioConfig, out_dir: str | None = None, *, write_events: bool = True
) -> RunSummary:
    """Run one scenario to completion; optionally persist the four CSVs."""
    cfg = cfg.validate()
    net = build_network(cfg)
    drivers = sample_population(
        net,
        DemandConfig(
            n_drivers=cfg.n_drivers,
            horizon=cfg.horizon,
            mix=Mix(cfg.mix),
            penetration=cfg.penetration,
            seed=cfg.seed,
            valuation=cfg.valuation,
            depart_offset_max=cfg.depart_offset_max,
            stay_min=cfg.stay_min,
            stay_max=cfg.stay_max,
        ),
    )
    world = World(
        net,
        drivers,
        cfg.behavior,
        seed=cfg.seed,
        exit_capacity=cfg.exit_capacity,
        auction_cfg=AuctionConfig(epsilon=cfg.epsilon),
        auction_period=cfg.auction_period,
        steady_start=cfg.steady_start,
    )
    world.run()
    world.check_conservation()
    summary = summarize_world(world, cfg)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        if write_events:
            write_events_csv(world, os.path.join(out_dir, "events.csv"))
        write_detectors_csv(world, os.path.join(out_dir, "detectors.csv"))
        write_summary_csv([(cfg, summary)], os.path.join(out_dir, "summary.csv"))
        write_edge_stats_csv(world, summary, os.path.join(out_dir, "edge_stats.csv"))
        cfg.to_yaml(os.path.join(out_dir, "config.yaml"))
        with open(os.path.join(out_dir, "network.txt"), "w") as fh:
            fh.write(describe(net))
    return summary


def summarize_world(world: World, cfg: ScenarioConfig) -> RunSummary:
    participants = sum(1 for d in world.drivers if d.participant)
    short = short_route_fraction(world)
    return summarize(
        world.events,
        {r.driver: r.route_length for r in world.records.values()},
        {d.id: d.participant for d in world.drivers},
        world.detectors,
        steady_start=world.mark_t0,
        steady_end=world.mark_t1,
        reservations_granted=world.reservations_granted,
        reservations_kept=world.reservations_kept,
        short_route_fraction=short,
        bypassed_fraction=(world.bypassed / participants) if participants else 0.0,
        edge_occupancy=world.occupancy.mean_between(world.mark_t0, world.mark_t1, world.cap),
        edge_mean_price=world.edge_mean_price(),
    )


def short_route_fraction(world: World) -> float:
    """Share of drivers whose free-flow drive to their preferred lot takes
    less than one auction period."""
    net = world.net
    n_short = 0
    for d in world.drivers:
        area = int(world.pref[d.id])
        dist = drive_distance(
            net, (d.origin_edge, 0.0), (net.areas[area].edge_id, float(net.area_pos[area]))
        )
        if dist / net.edge_speed[d.origin_edge] < world.period:
            n_short += 1
    return n_short / len(world.drivers) if world.drivers else 0.0


# --------------------------------------------------------------------- #
# CSV writers.  Events keep full float precision; summaries round prices
# to cents.

EVENT_COLUMNS = [
    "driver", "participant", "beta", "origin_edge", "destination_edge",
    "preferred_area", "depart", "occupied_area", "paid_price",
    "parking_distance", "route_length", "park_time", "exit_time",
    "reserved_space", "won_price", "reservation_outcome", "bypassed",
]


def write_events_csv(world: World, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EVENT_COLUMNS)
        for did in sorted(world.records):
            r = world.records[did]
            w.writerow(
                [
                    r.driver, int(r.participant), repr(r.beta), r.origin_edge,
                    r.destination_edge, r.preferred_area, r.depart,
                    r.occupied_area, repr(r.paid_price), repr(r.parking_distance),
                    repr(r.route_length), r.park_time, r.exit_time,
                    r.reserved_space, repr(r.won_price), r.reservation_outcome,
                    int(r.bypassed),
                ]
            )


def write_detectors_csv(world: World, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["edge", "window", "count", "flow_veh_h"])
        for rec in world.detectors.records():
            w.writerow([rec.edge, rec.window, rec.count, repr(rec.flow)])


def write_edge_stats_csv(world: World, summary: RunSummary, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["edge", "zone", "base_price", "occupancy", "mean_paid_price", "n_parked"])
        for e in world.net.edges:
            occ = summary.edge_occupancy[e.id]
            price = summary.edge_mean_price[e.id]
            w.writerow(
                [
                    e.id, e.zone.value, repr(float(world.net.area_price[e.id])),
                    repr(float(occ)),
                    "" if math.isnan(price) else repr(float(price)),
                    int(world.price_n[e.id]),
                ]
            )


SUMMARY_METRICS = [
    "route_len_mean", "route_len_p10", "route_len_p90",
    "price_mean", "price_p10", "price_p90",
    "park_dist_mean", "park_dist_p10", "park_dist_p90",
]


def _group_cells(g) -> list:
    def money(x):
        return "" if math.isnan(x) else f"{x:.2f}"

    def meters(x):
        return "" if math.isnan(x) else f"{x:.1f}"

    return [
        meters(g.route_mean), meters(g.route_p10), meters(g.route_p90),
        money(g.price_mean), money(g.price_p10), money(g.price_p90),
        meters(g.dist_mean), meters(g.dist_p10), meters(g.dist_p90),
    ]


def summary_header() -> list[str]:
    cols = ["mix", "behavior", "penetration", "seed", "n_drivers", "n_participants"]
    cols += SUMMARY_METRICS
    cols += ["part_" + m for m in SUMMARY_METRICS]
    cols += ["nonpart_" + m for m in SUMMARY_METRICS]
    cols += [
        "flow_veh_h", "reservations_granted", "reservations_kept",
        "success_rate", "short_route_fraction", "bypassed_fraction",
    ]
    return cols


def summary_row(cfg: ScenarioConfig, s: RunSummary) -> list:
    row = [cfg.mix, cfg.behavior, f"{cfg.penetration:.1f}", cfg.seed,
           s.n_drivers, s.n_participants]
    row += _group_cells(s.overall)
    row += _group_cells(s.participants)
    row += _group_cells(s.non_participants)
    rate = s.success_rate
    row += [
        f"{s.flow_mean:.3f}", s.reservations_granted, s.reservations_kept,
        "" if math.isnan(rate) else f"{rate:.4f}",
        f"{s.short_route_fraction:.4f}", f"{s.bypassed_fraction:.4f}",
    ]
    return row


def write_summary_csv(rows: list[tuple[ScenarioConfig, RunSummary]], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(summary_header())
        for cfg, s in rows:
            w.writerow(summary_row(cfg, s))


# --------------------------------------------------------------------- #
# matrix execution


def _run_cell(cfg: ScenarioConfig):
    try:
        return cfg, run_scenario(cfg, out_dir=None), None
    except Exception as exc:  # pragma: no cover - surfaced in the report
        return cfg, None, f"{type(exc).__name__}: {exc}"


MATRIX_GROUP_METRICS = [
    ("route_len_mean", "route_mean"), ("route_len_p10", "route_p10"),
    ("route_len_p90", "route_p90"),
    ("price_mean", "price_mean"), ("price_p10", "price_p10"),
    ("price_p90", "price_p90"),
    ("park_dist_mean", "dist_mean"), ("park_dist_p10", "dist_p10"),
    ("park_dist_p90", "dist_p90"),
]


def matrix_header() -> list[str]:
    cols = ["mix", "behavior", "penetration", "n_runs"]
    for prefix in ("", "part_", "nonpart_"):
        cols += [prefix + name for name, _ in MATRIX_GROUP_METRICS]
    cols += ["flow_veh_h", "success_rate", "short_route_fraction", "bypassed_fraction"]
    return cols


def _cell_key(cfg: ScenarioConfig):
    return (cfg.mix, cfg.behavior, cfg.penetration)


def run_matrix(
    spec: MatrixSpec,
    base: ScenarioConfig,
    out_dir: str,
    jobs: int = 1,
) -> list[dict]:
    """Run the full sweep and write matrix.csv, summary.csv, edge_stats.csv.

    Returns the matrix rows as dicts. Raises RuntimeError listing failed
    runs, if any.
    """
    cfgs = spec.expand(base)
    os.makedirs(out_dir, exist_ok=True)
    if jobs > 1:
        with Pool(jobs) as pool:
            results = pool.map(_run_cell, cfgs)
    else:
        results = [_run_cell(c) for c in cfgs]

    failures = [(c, err) for c, _, err in results if err]
    if failures:
        lines = "; ".join(f"{_cell_key(c)} seed={c.seed}: {e}" for c, e in failures)
        raise RuntimeError(f"{len(failures)} runs failed: {lines}")

    write_summary_csv([(c, s) for c, s, _ in results], os.path.join(out_dir, "summary.csv"))

    # Seed-averaged cell rows, ordered deterministically.
    cells: dict[tuple, list[RunSummary]] = {}
    for c, s, _ in results:
        cells.setdefault(_cell_key(c), []).append(s)
    order = sorted(
        cells,
        key=lambda k: (k[0], BEHAVIORS.index(k[1]), k[2]),
    )
    rows = []
    for key in order:
        group = cells[key]
        row = {"mix": key[0], "behavior": key[1],
               "penetration": f"{key[2]:.1f}", "n_runs": len(group)}
        for prefix, attr in (("", "overall"), ("part_", "participants"),
                             ("nonpart_", "non_participants")):
            for name, field_name in MATRIX_GROUP_METRICS:
                vals = [getattr(getattr(s, attr), field_name) for s in group]
                row[prefix + name] = _mean_or_blank(vals)
        row["flow_veh_h"] = _mean_or_blank([s.flow_mean for s in group])
        row["success_rate"] = _mean_or_blank([s.success_rate for s in group])
        row["short_route_fraction"] = _mean_or_blank(
            [s.short_route_fraction for s in group]
        )
        row["bypassed_fraction"] = _mean_or_blank([s.bypassed_fraction for s in group])
        rows.append(row)

    with open(os.path.join(out_dir, "matrix.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=matrix_header())
        w.writeheader()
        w.writerows(rows)

    _write_matrix_edge_stats(results, os.path.join(out_dir, "edge_stats.csv"))
    net = build_network(base)
    with open(os.path.join(out_dir, "network.txt"), "w") as fh:
        fh.write(describe(net))
    base.to_yaml(os.path.join(out_dir, "config.yaml"))
    return rows


def _mean_or_blank(vals) -> str:
    vals = [v for v in vals if not math.isnan(v)]
    if not vals:
        return ""
    return repr(float(np.mean(vals)))


def _write_matrix_edge_stats(results, path) -> None:
    cells: dict[tuple, list[RunSummary]] = {}
    for c, s, _ in results:
        cells.setdefault(_cell_key(c), []).append(s)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mix", "behavior", "penetration", "edge", "occupancy", "mean_paid_price"])
        for key in sorted(cells, key=lambda k: (k[0], BEHAVIORS.index(k[1]), k[2])):
            group = cells[key]
            occ = np.mean([s.edge_occupancy for s in group], axis=0)
            with warnings.catch_warnings():
                # Edges where nobody parked in any seed stay blank.
                warnings.simplefilter("ignore", RuntimeWarning)
                price = np.nanmean([s.edge_mean_price for s in group], axis=0)
            for e in range(len(occ)):
                w.writerow(
                    [
                        key[0], key[1], f"{key[2]:.1f}", e, repr(float(occ[e])),
                        "" if math.isnan(price[e]) else repr(float(price[e])),
                    ]
                )
