"""Command-line interface: run one scenario, sweep the matrix, validate a
config, or cross-check the auction engine against the brute-force reference.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import crosscheck
from .auction import AuctionConfig, run_batch_arrays
from .errors import ConfigurationError
from .experiment import MatrixSpec, ScenarioConfig, run_matrix, run_scenario


def _load_config(args) -> ScenarioConfig:
    cfg = ScenarioConfig.from_yaml(args.config) if args.config else ScenarioConfig()
    if getattr(args, "behavior", None):
        cfg.behavior = args.behavior
    if getattr(args, "penetration", None) is not None:
        cfg.penetration = args.penetration
    if getattr(args, "mix", None):
        cfg.mix = args.mix
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg.validate()


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="scenario YAML; defaults cover the standard case")
    p.add_argument("--behavior", choices=["baseline", "information", "auction"])
    p.add_argument("--penetration", type=float)
    p.add_argument("--mix", choices=["MIX10", "MIX25", "MIX50"])
    p.add_argument("--seed", type=int)


def cmd_run(args) -> int:
    cfg = _load_config(args)
    t0 = time.perf_counter()
    summary = run_scenario(cfg, out_dir=args.out)
    dt = time.perf_counter() - t0
    o = summary.overall
    print(
        f"{cfg.mix} {cfg.behavior} pen={cfg.penetration:.0%} seed={cfg.seed}: "
        f"route={o.route_mean:.0f} m price={o.price_mean:.3f} EUR "
        f"dist={o.dist_mean:.0f} m flow={summary.flow_mean:.1f} veh/h "
        f"({dt:.1f} s)"
    )
    if summary.reservations_granted:
        print(
            f"reservations: {summary.reservations_kept}/{summary.reservations_granted} "
            f"kept ({summary.success_rate:.1%})"
        )
    return 0


def cmd_matrix(args) -> int:
    cfg = _load_config(args)
    spec = MatrixSpec()
    if args.mixes:
        spec.mixes = tuple(args.mixes.split(","))
    if args.behaviors:
        spec.behaviors = tuple(args.behaviors.split(","))
    if args.penetrations:
        spec.penetrations = tuple(float(x) for x in args.penetrations.split(","))
    if args.seeds is not None:
        spec.seeds = tuple(range(args.seeds))
    n = len(spec.expand(cfg))
    print(f"running {n} scenarios with {args.jobs} worker(s) into {args.out}")
    t0 = time.perf_counter()
    rows = run_matrix(spec, cfg, args.out, jobs=args.jobs)
    print(f"{len(rows)} matrix rows written in {time.perf_counter() - t0:.0f} s")
    return 0


def cmd_validate(args) -> int:
    try:
        cfg = _load_config(args)
    except (ConfigurationError, OSError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    print(f"ok: {cfg}")
    return 0


def cmd_oracle(args) -> int:
    """Compare the engine against the reference protocol on random batches."""
    rng = np.random.default_rng(args.seed)
    mismatches = 0
    for i in range(args.batches):
        n_auc = int(rng.integers(1, 4))
        n_ag = int(rng.integers(1, 7))
        prices = np.round(rng.uniform(0.3, 1.2, n_auc), 2)
        betas = rng.choice([0.01, 0.5], n_ag)
        vals = np.round(rng.uniform(0.5, 5.0, n_ag), 2)
        dists = [np.round(rng.uniform(0, 800, n_auc), 1) for _ in range(n_ag)]
        cfg = AuctionConfig()
        got_prices, leader, leader_bid, _, _ = run_batch_arrays(
            np.arange(n_auc), prices, list(range(n_ag)), betas, vals,
            dists, np.array([d.max() for d in dists]), cfg, i,
        )
        got = {
            int(leader[j]): (j, float(leader_bid[j]))
            for j in range(n_auc)
            if leader[j] >= 0
        }
        want, _, _, _ = crosscheck.reference_run_batch(
            list(prices),
            [
                {"beta": float(betas[a]), "valuation": float(vals[a]),
                 "dists": list(dists[a])}
                for a in range(n_ag)
            ],
            cfg.epsilon,
            cfg.quiescence_rounds,
            i,
        )
        if got != want:
            mismatches += 1
            print(f"batch {i}: engine={got} reference={want}", file=sys.stderr)
    if mismatches:
        print(f"FAIL: {mismatches}/{args.batches} batches disagree", file=sys.stderr)
        return 1
    print(f"PASS: {args.batches} random batches match the reference protocol")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mesopark")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    _add_common(p_run)
    p_run.add_argument("--out", help="output directory for the CSV artifacts")
    p_run.set_defaults(func=cmd_run)

    p_mat = sub.add_parser("matrix", help="run the penetration sweep")
    _add_common(p_mat)
    p_mat.add_argument("--out", required=True)
    p_mat.add_argument("--jobs", type=int, default=1)
    p_mat.add_argument("--mixes", help="comma-separated mix names")
    p_mat.add_argument("--behaviors", help="comma-separated behaviors")
    p_mat.add_argument("--penetrations", help="comma-separated fractions")
    p_mat.add_argument("--seeds", type=int, help="number of seeds (0..n-1)")
    p_mat.set_defaults(func=cmd_matrix)

    p_val = sub.add_parser("validate", help="check a config file")
    _add_common(p_val)
    p_val.set_defaults(func=cmd_validate)

    p_orc = sub.add_parser("oracle", help="cross-check the auction engine")
    p_orc.add_argument("--batches", type=int, default=1000)
    p_orc.add_argument("--seed", type=int, default=0)
    p_orc.set_defaults(func=cmd_oracle)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
