"""Independent brute-force reference for the bidding protocol.

Plain-loop reimplementation used to cross-check the production engine on
small random instances (also exposed through the `oracle` CLI verb). It
shares no code with the engine on purpose; keep it that way.
"""

from __future__ import annotations

import math
import random


def reference_run_batch(
    start_prices: list[float],
    agents: list[dict],
    epsilon: float,
    quiescence_rounds: int,
    agent_order_seed,
):
    """Replay the round protocol with naive scalar arithmetic.

    `agents` entries carry beta, valuation, and dists (one driving distance
    per auction). Returns (assignments, prices, rounds, total_bids) where
    assignments maps agent index -> (auction index, price).
    """
    n = len(start_prices)
    cents = [int(round(p * 100)) for p in start_prices]
    eps = int(round(epsilon * 100))
    leader = [-1] * n
    leader_bid = [0] * n
    leads = [-1] * len(agents)
    out = [False] * len(agents)

    order = list(range(len(agents)))
    random.Random(agent_order_seed).shuffle(order)

    rounds = 0
    total_bids = 0
    quiet = 0
    while True:
        rounds += 1
        bids = 0
        for ai in order:
            if out[ai] or leads[ai] >= 0:
                continue
            a = agents[ai]
            beta, dists = a["beta"], a["dists"]
            val_cents = int(math.floor(a["valuation"] * 100 + 1e-9))
            d_max = max((d for d in dists if math.isfinite(d)), default=0.0)
            max_cents = max(cents)
            best = -1
            best_cost = None
            for i in range(n):
                if cents[i] > val_cents or math.isinf(dists[i]):
                    continue
                dist_term = dists[i] / d_max if d_max > 0 else 0.0
                c = beta * (cents[i] / max_cents) + (1.0 - beta) * dist_term
                if best < 0 or c < best_cost:
                    best = i
                    best_cost = c
            if best < 0:
                out[ai] = True
                continue
            if leader[best] >= 0:
                leads[leader[best]] = -1
            leader[best] = ai
            leads[ai] = best
            leader_bid[best] = cents[best]
            cents[best] += eps
            bids += 1
            total_bids += 1
        if bids == 0:
            quiet += 1
            if quiet >= quiescence_rounds:
                break
        else:
            quiet = 0

    assignments = {
        leader[i]: (i, leader_bid[i] / 100.0) for i in range(n) if leader[i] >= 0
    }
    return assignments, [c / 100.0 for c in cents], rounds, total_bids
