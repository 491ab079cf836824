"""Simultaneous independent ascending auctions with local greedy bidding.

One auction per free parking space. In every global round each non-leading
agent picks the auction minimizing its composite cost at current prices and,
if it can afford the asking price, takes the lead there; the price then rises
by one increment. A round without any accepted bid ends the batch and leaders
win at their bid price.

The engine is pure and deterministic for a fixed agent-order seed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .errors import ProtocolError


@dataclass
class AuctionConfig:
    epsilon: float = 0.05  # euros added to the asking price after each bid
    quiescence_rounds: int = 1  # consecutive bid-free rounds ending the batch
    max_rounds_guard: int | None = None  # None derives a bound from the inputs

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if abs(self.epsilon * 100 - round(self.epsilon * 100)) > 1e-9:
            raise ValueError("epsilon must be a whole number of cents")
        if self.quiescence_rounds < 1:
            raise ValueError("quiescence_rounds must be at least 1")

    @property
    def epsilon_cents(self) -> int:
        return int(round(self.epsilon * 100))


@dataclass
class Auction:
    id: int
    space_id: int
    area_id: int
    start_price: float
    current_price: float
    leader: int | None = None
    leader_bid_price: float | None = None


@dataclass
class BidderView:
    """One agent's view of a batch: attitude, budget, and distances.

    `dists[i]` is the driving distance from auction i's parking area to the
    agent's destination, infinite for auctions the agent did not register
    at; `d_max` is the largest finite one.
    """

    agent_id: int
    beta: float
    valuation: float
    dest: tuple[int, float]  # (edge, position) of the human destination
    dists: np.ndarray
    d_max: float


@dataclass
class BatchResult:
    assignments: dict[int, tuple[int, float]]  # agent -> (space_id, price)
    unassigned: set[int]
    rounds_used: int
    total_bids: int


def cost(beta: float, price: float, max_price: float, dist: float, max_dist: float) -> float:
    """Composite cost: beta-weighted normalized price plus normalized distance.

    With all candidate lots co-located (max_dist = 0) the distance term is 0.
    """
    dist_term = dist / max_dist if max_dist > 0 else 0.0
    return beta * (price / max_price) + (1.0 - beta) * dist_term


def _preferred_index(
    cents: np.ndarray, beta: float, valuation_cents: int, dists: np.ndarray, d_max: float
) -> int:
    """Index of the cost-minimizing affordable auction, or -1 if none.

    Prices are handled in whole cents so bid ladders and cost ties are
    exact. Ties resolve to the lowest index. The price normalizer is the
    maximum current price across the batch's auctions. An infinite distance
    marks an auction outside the agent's registered reach.
    """
    max_cents = cents.max()
    finite = np.isfinite(dists)
    eligible = (cents <= valuation_cents) & finite
    if not eligible.any():
        return -1
    dist_term = np.where(finite, dists, 0.0) / d_max if d_max > 0 else np.zeros_like(dists)
    costs = beta * (cents / max_cents) + (1.0 - beta) * dist_term
    costs = np.where(eligible, costs, np.inf)
    return int(np.argmin(costs))


def _to_cents(value: float) -> int:
    return int(math.floor(value * 100 + 1e-9))


def preferred_auction(view: BidderView, auctions: list[Auction]) -> int | None:
    """Id of the auction the agent would bid on next, or None if priced out."""
    cents = np.array([int(round(a.current_price * 100)) for a in auctions])
    idx = _preferred_index(cents, view.beta, _to_cents(view.valuation), view.dists, view.d_max)
    return None if idx < 0 else auctions[idx].id


def run_batch_arrays(
    space_ids: np.ndarray,
    start_prices: np.ndarray,
    agent_ids: list[int],
    betas: np.ndarray,
    valuations: np.ndarray,
    dists: list[np.ndarray],
    d_maxes: np.ndarray,
    cfg: AuctionConfig,
    agent_order_seed,
    audit: list[str] | None = None,
):
    """Array-level batch runner; see `run_batch` for the object interface.

    Returns (prices, leader, leader_bid, rounds_used, total_bids).
    """
    n_auc = len(space_ids)
    n_agents = len(agent_ids)
    cents = np.round(np.asarray(start_prices) * 100).astype(np.int64)
    eps = cfg.epsilon_cents
    val_cents = [_to_cents(float(v)) for v in valuations]
    leader = np.full(n_auc, -1, dtype=np.int64)  # agent index per auction
    leader_bid = np.zeros(n_auc, dtype=np.int64)
    leads = np.full(n_agents, -1, dtype=np.int64)  # auction index per agent
    dropped = [False] * n_agents

    order = list(range(n_agents))
    random.Random(agent_order_seed).shuffle(order)

    if cfg.max_rounds_guard is not None:
        guard = cfg.max_rounds_guard
    else:
        span = max(max(val_cents, default=0) - int(cents.min(initial=0)), 0)
        guard = n_auc * (math.ceil(span / eps) + 1) + n_agents + cfg.quiescence_rounds + 2

    rounds = 0
    total_bids = 0
    quiet = 0
    while True:
        if rounds >= guard:
            raise ProtocolError(f"auction batch did not terminate within {guard} rounds")
        rounds += 1
        bids_this_round = 0
        for ai in order:
            if dropped[ai] or leads[ai] >= 0:
                continue
            pick = _preferred_index(cents, float(betas[ai]), val_cents[ai],
                                    dists[ai], float(d_maxes[ai]))
            if pick < 0:
                dropped[ai] = True
                continue
            prev = leader[pick]
            if prev >= 0:
                leads[prev] = -1
            leader[pick] = ai
            leads[ai] = pick
            leader_bid[pick] = cents[pick]
            if audit is not None:
                audit.append(
                    f"round={rounds} agent={agent_ids[ai]} auction={pick} "
                    f"price={cents[pick] / 100:.2f}"
                )
            cents[pick] += eps
            bids_this_round += 1
            total_bids += 1
        if bids_this_round == 0:
            quiet += 1
            if quiet >= cfg.quiescence_rounds:
                break
        else:
            quiet = 0
    return cents / 100.0, leader, leader_bid / 100.0, rounds, total_bids


def run_batch(
    auctions: list[Auction],
    views: list[BidderView],
    cfg: AuctionConfig,
    agent_order_seed,
    audit: list[str] | None = None,
) -> BatchResult:
    """Run one batch to quiescence and assign leaders their spaces.

    Auctions must be passed in ascending id order (ids are the tie-break).
    Mutates the Auction objects to their final prices and leaders.
    """
    if [a.id for a in auctions] != list(range(len(auctions))):
        raise ValueError("auctions must be sorted with ids 0..n-1")
    prices, leader, leader_bid, rounds, total_bids = run_batch_arrays(
        np.array([a.space_id for a in auctions]),
        np.array([a.start_price for a in auctions]),
        [v.agent_id for v in views],
        np.array([v.beta for v in views]),
        np.array([v.valuation for v in views]),
        [v.dists for v in views],
        np.array([v.d_max for v in views]),
        cfg,
        agent_order_seed,
        audit,
    )
    assignments: dict[int, tuple[int, float]] = {}
    for i, a in enumerate(auctions):
        a.current_price = float(prices[i])
        if leader[i] >= 0:
            a.leader = views[leader[i]].agent_id
            a.leader_bid_price = float(leader_bid[i])
            assignments[a.leader] = (a.space_id, a.leader_bid_price)
    unassigned = {v.agent_id for v in views if v.agent_id not in assignments}
    return BatchResult(assignments, unassigned, rounds, total_bids)
