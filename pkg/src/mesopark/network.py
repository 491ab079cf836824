"""Grid road network: junctions, directed edges, curbside parking areas,
price zones, and precomputed driving distances.

Vehicles cannot reverse direction mid-route: driving distances and routes
never chain an edge into its own opposite, so reaching something behind you
means looping around a block. Junction-to-junction queries have no approach
direction and use the plain shortest path.

The network is immutable after construction and safe to share between
parallel scenario runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import ConfigurationError


class Zone(str, Enum):
    OUTER = "outer"
    INNER = "inner"


DEFAULT_PRICES = {Zone.OUTER: 0.5, Zone.INNER: 1.0}
DEFAULT_SPEED = 13.9  # m/s (50 km/h urban street)


@dataclass(frozen=True)
class Junction:
    id: int
    grid_pos: tuple[int, int]  # (row, col)
    xy: tuple[float, float]  # meters


@dataclass(frozen=True)
class Edge:
    id: int
    from_junction: int
    to_junction: int
    length: float
    free_flow_speed: float
    ring: int  # 0 = outermost ring of edges, increasing toward the center
    zone: Zone


@dataclass(frozen=True)
class ParkingArea:
    id: int
    edge_id: int
    capacity: int
    space_ids: tuple[int, ...]
    position_on_edge: float  # meters from the upstream end
    base_price: float  # euros


class RoadNetwork:
    """Directed grid graph plus parking areas and distance tables.

    One parking area sits on every directed edge, so area ids coincide
    with edge ids.
    """

    def __init__(self, rows, cols, spacing, junctions, edges, areas, prices):
        self.rows = rows
        self.cols = cols
        self.spacing = spacing
        self.junctions: list[Junction] = junctions
        self.edges: list[Edge] = edges
        self.areas: list[ParkingArea] = areas
        self.prices = dict(prices)
        self.capacity = areas[0].capacity
        self.n_spaces = sum(a.capacity for a in areas)

        self.edge_from = np.array([e.from_junction for e in edges], dtype=np.int32)
        self.edge_to = np.array([e.to_junction for e in edges], dtype=np.int32)
        self.edge_length = np.array([e.length for e in edges])
        self.edge_speed = np.array([e.free_flow_speed for e in edges])
        self.edge_ring = np.array([e.ring for e in edges], dtype=np.int32)
        self.area_pos = np.array([a.position_on_edge for a in areas])
        self.area_price = np.array([a.base_price for a in areas])

        self.edge_index: dict[tuple[int, int], int] = {
            (e.from_junction, e.to_junction): e.id for e in edges
        }
        self.reverse_edge = np.array(
            [self.edge_index[(e.to_junction, e.from_junction)] for e in edges],
            dtype=np.int32,
        )
        out: list[list[int]] = [[] for _ in junctions]
        for e in edges:
            out[e.from_junction].append(e.id)
        self.out_edges: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(o)) for o in out)

        # Junction-to-junction shortest driving distances over edge lengths.
        n_j = len(junctions)
        graph = csr_matrix(
            (self.edge_length, (self.edge_from, self.edge_to)), shape=(n_j, n_j)
        )
        dist, jpred = dijkstra(graph, directed=True, return_predecessors=True)
        if np.isinf(dist).any():
            raise ConfigurationError("grid network is not strongly connected")
        self.junction_dist = dist
        self._junction_pred = jpred

        # Edge-to-edge driving over the turn graph (no immediate reversal):
        # nodes are directed edges, an arc u->w exists when w leaves u's head
        # and is not u's opposite, weighted by w's length. On grids too small
        # to change rotation direction without reversing (2 junctions per
        # side), fall back to plain junction routing with reversals allowed.
        n_e = len(edges)
        rows_, cols_, wts = [], [], []
        for u in range(n_e):
            for w in self.out_edges[self.edge_to[u]]:
                if w != self.reverse_edge[u]:
                    rows_.append(u)
                    cols_.append(w)
                    wts.append(float(self.edge_length[w]))
        turn = csr_matrix((wts, (rows_, cols_)), shape=(n_e, n_e))
        raw, pred = dijkstra(turn, directed=True, return_predecessors=True)
        self.no_reversal = not np.isinf(raw[~np.eye(n_e, dtype=bool)]).any()
        self._turn_pred = pred

        if self.no_reversal:
            # follow_dist[u, f]: meters driven between leaving u's downstream
            # end and reaching f's upstream end.
            self.follow_dist = raw - self.edge_length[None, :]
            first = np.full(n_e, -1, dtype=np.int32)
            cyc = np.full(n_e, np.inf)
            for u in range(n_e):
                for w in self.out_edges[self.edge_to[u]]:
                    if w == self.reverse_edge[u]:
                        continue
                    total = float(self.edge_length[w]) + raw[w, u] - float(self.edge_length[u])
                    if total < cyc[u]:
                        cyc[u] = total
                        first[u] = w
            for u in range(n_e):
                self.follow_dist[u, u] = cyc[u]
            self._cycle_first = first
        else:
            self.follow_dist = dist[self.edge_to[:, None], self.edge_from[None, :]]

        # Area-to-area driving distances between on-edge positions.
        remainder = self.edge_length - self.area_pos
        self.area_dist = remainder[:, None] + self.follow_dist + self.area_pos[None, :]
        np.fill_diagonal(self.area_dist, 0.0)

    # Convenience accessors used in the hot simulation loop.
    def head(self, edge_id: int) -> int:
        return int(self.edge_to[edge_id])

    def tail(self, edge_id: int) -> int:
        return int(self.edge_from[edge_id])

    def _turn_path(self, u: int, f: int) -> list[int]:
        """Edges after u on the shortest no-reversal path, ending with f."""
        nodes = [f]
        while nodes[-1] != u:
            p = int(self._turn_pred[u, nodes[-1]])
            if p < 0:
                raise ConfigurationError(f"no turn path from edge {u} to {f}")
            nodes.append(p)
        nodes.reverse()
        return nodes[1:]

    def _junction_path(self, u: int, w: int) -> list[int]:
        """Edge ids of the shortest junction path from u to w."""
        if u == w:
            return []
        nodes = [w]
        while nodes[-1] != u:
            p = int(self._junction_pred[u, nodes[-1]])
            if p < 0:
                raise ConfigurationError(f"no path from junction {u} to {w}")
            nodes.append(p)
        nodes.reverse()
        return [self.edge_index[(a, b)] for a, b in zip(nodes, nodes[1:])]

    def route_after(self, edge_id: int, target_edge: int) -> list[int]:
        """Edges to traverse after exiting `edge_id`, ending with `target_edge`."""
        if not self.no_reversal:
            path = self._junction_path(self.head(edge_id), self.tail(target_edge))
            path.append(target_edge)
            return path
        if target_edge == edge_id:
            w = int(self._cycle_first[edge_id])
            return [w] + self._turn_path(w, edge_id)
        return self._turn_path(edge_id, target_edge)


def build_grid(
    rows: int,
    cols: int,
    spacing: float = 100.0,
    capacity: int = 15,
    prices: dict[Zone, float] | None = None,
    free_flow_speed: float = DEFAULT_SPEED,
    inner_edges: set[tuple[int, int]] | None = None,
) -> RoadNetwork:
    """Build a rows x cols junction grid with two directed edges per street.

    Every edge carries one parking area of `capacity` spaces at its midpoint.
    An edge belongs to the inner price zone iff it touches the central
    (rows-4) x (cols-4) junction block, giving a compact expensive core
    (for 6x6: the 12 streets around the central four junctions);
    `inner_edges` overrides the rule with explicit (from, to) pairs.
    """
    if rows < 2 or cols < 2:
        raise ConfigurationError(f"grid needs at least 2x2 junctions, got {rows}x{cols}")
    if spacing <= 0:
        raise ConfigurationError(f"junction spacing must be positive, got {spacing}")
    if capacity < 1:
        raise ConfigurationError(f"parking capacity must be at least 1, got {capacity}")
    prices = dict(DEFAULT_PRICES if prices is None else prices)

    junctions = [
        Junction(r * cols + c, (r, c), (c * spacing, r * spacing))
        for r in range(rows)
        for c in range(cols)
    ]

    def in_core(jid: int) -> bool:
        r, c = divmod(jid, cols)
        return 2 <= r <= rows - 3 and 2 <= c <= cols - 3

    streets: list[tuple[int, int]] = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                streets.append((r * cols + c, r * cols + c + 1))
            if r + 1 < rows:
                streets.append((r * cols + c, (r + 1) * cols + c))

    pairs: list[tuple[int, int]] = []
    for u, v in streets:
        pairs.append((u, v))
        pairs.append((v, u))

    # Ring index: Manhattan distance classes of edge midpoints from the grid
    # center, in spacing units.  Classes step by one spacing; ring 0 is the
    # farthest class so attraction weight grows linearly toward the center.
    cx = (cols - 1) * spacing / 2.0
    cy = (rows - 1) * spacing / 2.0
    dman = []
    for u, v in pairs:
        (x1, y1), (x2, y2) = junctions[u].xy, junctions[v].xy
        mx, my = (x1 + x2) / 2.0, (y1 + y2) / 2.0
        dman.append((abs(mx - cx) + abs(my - cy)) / spacing)
    dmax = max(dman)

    edges = []
    for eid, (u, v) in enumerate(pairs):
        if inner_edges is not None:
            inner = (u, v) in inner_edges
        else:
            inner = in_core(u) or in_core(v)
        edges.append(
            Edge(
                id=eid,
                from_junction=u,
                to_junction=v,
                length=spacing,
                free_flow_speed=free_flow_speed,
                ring=int(round(dmax - dman[eid])),
                zone=Zone.INNER if inner else Zone.OUTER,
            )
        )

    areas = [
        ParkingArea(
            id=e.id,
            edge_id=e.id,
            capacity=capacity,
            space_ids=tuple(range(e.id * capacity, (e.id + 1) * capacity)),
            position_on_edge=e.length / 2.0,
            base_price=prices[e.zone],
        )
        for e in edges
    ]
    return RoadNetwork(rows, cols, spacing, junctions, edges, areas, prices)


def zone_price(net: RoadNetwork, edge_id: int) -> float:
    """Static per-zone parking price of the area on `edge_id`, in euros."""
    return float(net.area_price[edge_id])


def junction_distance(net: RoadNetwork, j1: int, j2: int) -> float:
    return float(net.junction_dist[j1, j2])


def drive_distance(
    net: RoadNetwork,
    origin: tuple[int, float],
    target: tuple[int, float],
) -> float:
    """Shortest driving distance between two on-edge positions.

    Positions on the same edge with the target downstream are reached
    directly; anything else follows the turn graph, so a target behind the
    origin costs a loop around a block.
    """
    e1, p1 = origin
    e2, p2 = target
    if e1 == e2 and p2 >= p1:
        return p2 - p1
    remainder = float(net.edge_length[e1]) - p1
    return remainder + float(net.follow_dist[e1, e2]) + p2


def describe(net: RoadNetwork) -> str:
    """Plain-text dump of the network: junction and edge listing with zones.

    One line per element; edge lines carry endpoint coordinates so plots can
    be drawn from the dump alone.
    """
    lines = [f"grid {net.rows} {net.cols} {net.spacing:g} {net.capacity}"]
    for j in net.junctions:
        x, y = j.xy
        lines.append(f"junction {j.id} {j.grid_pos[0]} {j.grid_pos[1]} {x:g} {y:g}")
    for e in net.edges:
        (x1, y1) = net.junctions[e.from_junction].xy
        (x2, y2) = net.junctions[e.to_junction].xy
        price = net.area_price[e.id]
        lines.append(
            f"edge {e.id} {e.from_junction} {e.to_junction} {e.length:g} "
            f"{e.ring} {e.zone.value} {price:g} {x1:g} {y1:g} {x2:g} {y2:g}"
        )
    return "\n".join(lines) + "\n"
