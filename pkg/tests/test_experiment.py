import csv
import filecmp
import os

import numpy as np
import pytest

from mesopark.errors import ConfigurationError
from mesopark.experiment import (
    MatrixSpec,
    ScenarioConfig,
    run_matrix,
    run_scenario,
)

SMALL = dict(n_drivers=500, horizon=1500)


def test_config_yaml_roundtrip(tmp_path):
    cfg = ScenarioConfig(behavior="auction", penetration=0.4, mix="MIX25", seed=7)
    path = tmp_path / "cfg.yaml"
    cfg.to_yaml(path)
    assert ScenarioConfig.from_yaml(path) == cfg


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("behavior: auction\nbogus_knob: 3\n")
    with pytest.raises(ConfigurationError, match="bogus_knob"):
        ScenarioConfig.from_yaml(path)


def test_validate_catches_bad_values():
    with pytest.raises(ConfigurationError, match="behavior"):
        ScenarioConfig(behavior="teleport").validate()
    with pytest.raises(ConfigurationError, match="mix"):
        ScenarioConfig(mix="MIX33").validate()
    with pytest.raises(ConfigurationError, match="penetration"):
        ScenarioConfig(penetration=1.5).validate()


def test_baseline_forces_zero_penetration():
    cfg = ScenarioConfig(behavior="baseline", penetration=0.8).validate()
    assert cfg.penetration == 0.0


def test_run_scenario_writes_artifacts(tmp_path):
    cfg = ScenarioConfig(behavior="auction", penetration=0.5, seed=1, **SMALL)
    out = tmp_path / "run"
    summary = run_scenario(cfg, out_dir=str(out))
    for name in ("events.csv", "detectors.csv", "summary.csv", "edge_stats.csv",
                 "config.yaml", "network.txt"):
        assert (out / name).exists(), name
    with open(out / "events.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 500
    assert summary.n_drivers == 500
    with open(out / "edge_stats.csv") as fh:
        for row in csv.DictReader(fh):
            assert 0.0 <= float(row["occupancy"]) <= 1.0


def test_determinism_byte_identical(tmp_path):
    cfg = ScenarioConfig(behavior="auction", penetration=0.6, seed=3, **SMALL)
    run_scenario(cfg, out_dir=str(tmp_path / "a"))
    run_scenario(cfg, out_dir=str(tmp_path / "b"))
    assert filecmp.cmp(tmp_path / "a" / "events.csv", tmp_path / "b" / "events.csv", shallow=False)


def test_config_echo_reproduces_run(tmp_path):
    cfg = ScenarioConfig(behavior="information", penetration=0.4, seed=2, **SMALL)
    run_scenario(cfg, out_dir=str(tmp_path / "a"))
    echoed = ScenarioConfig.from_yaml(tmp_path / "a" / "config.yaml")
    run_scenario(echoed, out_dir=str(tmp_path / "b"))
    assert filecmp.cmp(tmp_path / "a" / "events.csv", tmp_path / "b" / "events.csv", shallow=False)


def test_penetration_zero_outputs_match_baseline(tmp_path):
    base = ScenarioConfig(behavior="baseline", seed=5, **SMALL)
    run_scenario(base, out_dir=str(tmp_path / "base"))
    for behavior in ("auction", "information"):
        cfg = ScenarioConfig(behavior=behavior, penetration=0.0, seed=5, **SMALL)
        run_scenario(cfg, out_dir=str(tmp_path / behavior))
        for name in ("events.csv", "detectors.csv", "edge_stats.csv"):
            assert filecmp.cmp(
                tmp_path / "base" / name, tmp_path / behavior / name, shallow=False
            ), (behavior, name)


def test_matrix_spec_expansion_counts():
    base = ScenarioConfig()
    assert len(MatrixSpec().expand(base)) == 330
    single = MatrixSpec(mixes=("MIX10",), behaviors=("auction",), penetrations=(0.6,))
    assert len(single.expand(base)) == 20  # 10 baseline + 10 auction runs
    tiny = MatrixSpec(mixes=("MIX10",), behaviors=(), penetrations=(), seeds=(0,))
    assert len(tiny.expand(base)) == 1


def test_run_matrix_rows_and_offline_recompute(tmp_path):
    base = ScenarioConfig(**SMALL)
    spec = MatrixSpec(
        mixes=("MIX10",), behaviors=("auction",), penetrations=(0.5,), seeds=(0, 1)
    )
    out = tmp_path / "matrix"
    rows = run_matrix(spec, base, str(out), jobs=1)
    assert [(r["mix"], r["behavior"], r["penetration"]) for r in rows] == [
        ("MIX10", "baseline", "0.0"),
        ("MIX10", "auction", "0.5"),
    ]
    assert all(r["n_runs"] == 2 for r in rows)

    # The seed-averaged cell means must equal the mean of per-run summaries
    # recomputed independently.
    per_run = {}
    for seed in (0, 1):
        cfg = ScenarioConfig(behavior="auction", penetration=0.5, seed=seed, **SMALL)
        run_dir = tmp_path / f"solo{seed}"
        run_scenario(cfg, out_dir=str(run_dir))
        with open(run_dir / "events.csv") as fh:
            evs = list(csv.DictReader(fh))
        per_run[seed] = {
            "price": np.mean([float(e["paid_price"]) for e in evs]),
            "route": np.mean([float(e["route_length"]) for e in evs]),
            "dist": np.mean([float(e["parking_distance"]) for e in evs]),
        }
    cell = rows[1]
    want_price = np.mean([per_run[s]["price"] for s in (0, 1)])
    want_route = np.mean([per_run[s]["route"] for s in (0, 1)])
    want_dist = np.mean([per_run[s]["dist"] for s in (0, 1)])
    assert float(cell["price_mean"]) == pytest.approx(want_price, abs=1e-9)
    assert float(cell["route_len_mean"]) == pytest.approx(want_route, abs=1e-9)
    assert float(cell["park_dist_mean"]) == pytest.approx(want_dist, abs=1e-9)

    with open(out / "matrix.csv") as fh:
        written = list(csv.DictReader(fh))
    assert len(written) == 2
    with open(out / "summary.csv") as fh:
        assert len(list(csv.DictReader(fh))) == 4  # one row per run


def test_matrix_parallel_matches_serial(tmp_path):
    base = ScenarioConfig(**SMALL)
    spec = MatrixSpec(
        mixes=("MIX10",), behaviors=("information",), penetrations=(0.4,), seeds=(0, 1)
    )
    run_matrix(spec, base, str(tmp_path / "serial"), jobs=1)
    run_matrix(spec, base, str(tmp_path / "parallel"), jobs=2)
    for name in ("matrix.csv", "summary.csv", "edge_stats.csv"):
        assert filecmp.cmp(
            tmp_path / "serial" / name, tmp_path / "parallel" / name, shallow=False
        ), name
