"""Experiment harness: gates, determinism, verification.

Worker-count independence is the load-bearing property here: every sample
derives its randomness from (seed, sample index), so the report text must
not change when the work is spread over processes.
"""

import math
import os

import pytest

from dtq import (
    ExperimentConfig,
    Model,
    binomial_sigma,
    config_echo,
    nearest_rank,
    parse_report,
    render,
    run_and_render,
    run_experiment,
    shallow_leaf_probability,
    verify_report,
)
from fractions import Fraction


def cfg(**kw) -> ExperimentConfig:
    return ExperimentConfig(**kw)


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        cfg(experiment="nope")
    with pytest.raises(ValueError):
        cfg(experiment="leaf-mean", model="full-uniform")  # must be a Model
    with pytest.raises(ValueError):
        cfg(experiment="leaf-mean", d=3, n=2)
    with pytest.raises(ValueError):
        cfg(experiment="leaf-mean", samples=0)
    with pytest.raises(ValueError):
        cfg(experiment="leaf-mean", epsilon=1.0)
    with pytest.raises(ValueError):
        cfg(experiment="leaf-mean", assignments=1)
    with pytest.raises(ValueError):
        cfg(experiment="leaf-mean", fmt="yaml")
    with pytest.raises(ValueError):
        cfg(experiment="leaf-mean", workers=0)


def test_config_echo_excludes_presentation_fields():
    config = cfg(experiment="leaf-mean", output="/tmp/x.csv", fmt="json",
                 workers=5, seed=3)
    echo = config_echo(config)
    assert "output" not in echo and "fmt" not in echo and "workers" not in echo
    assert echo["experiment"] == "leaf-mean"
    assert echo["model"] == "full-uniform"
    assert echo["seed"] == 3


def test_helper_statistics():
    assert binomial_sigma(0.5, 100) == 0.05
    assert binomial_sigma(0.0, 10) == 0.0
    vals = [1.0, 2.0, 3.0, 4.0]
    assert nearest_rank(vals, 1) == 1.0
    assert nearest_rank(vals, 25) == 1.0
    assert nearest_rank(vals, 50) == 2.0
    assert nearest_rank(vals, 100) == 4.0
    with pytest.raises(ValueError):
        nearest_rank([], 50)


# ---------------------------------------------------------------------------
# individual experiments, small configurations
# ---------------------------------------------------------------------------

def test_leaf_mean_exhaustive_rows():
    report = run_experiment(cfg(experiment="leaf-mean", d=3, n=4, samples=40,
                                seed=11))
    assert report.passed
    assert all(r["exact"] == 1 for r in report.records)  # d=3 has <= 8 leaves
    assert all(r["mean_sbar"] == r["expected_sbar"] for r in report.records)
    assert report.aggregates["exact_cases"] == 40
    assert report.aggregates["max_deviation"] == 0.0


def test_leaf_mean_sampled_rows():
    report = run_experiment(cfg(experiment="leaf-mean", model=Model.COMPLETE,
                                d=5, n=6, samples=3, assignments=256, seed=12))
    assert report.passed
    assert all(r["exact"] == 0 for r in report.records)  # 32 leaves > cap
    assert all(r["assignments"] == 256 for r in report.records)
    assert all(r["mean_sbar"] == "NA" for r in report.records)
    # complete depth-5 structures have expected sbar exactly 5/2
    assert all(r["expected_sbar"] == "5/2^1" for r in report.records)


def test_leaf_flip_bound_holds():
    report = run_experiment(cfg(experiment="leaf-flip", d=4, n=6, samples=25,
                                flips=8, seed=13))
    assert report.passed
    assert report.aggregates["violations"] == 0
    assert 0.0 <= report.aggregates["max_ratio"] <= 1.0
    assert all(r["ok"] == 1 for r in report.records)
    # at most `flips` rows per sampled tree
    per_tree: dict = {}
    for r in report.records:
        per_tree[r["sample_id"]] = per_tree.get(r["sample_id"], 0) + 1
    assert all(v <= 8 for v in per_tree.values())


def test_shallow_leaf_exact_mode():
    report = run_experiment(cfg(experiment="shallow-leaf",
                                model=Model.SHAPE_UNIFORM, d=6, n=6,
                                samples=1, seed=14))
    assert report.theory["mode"] == "exact"
    assert report.passed
    assert [r["h"] for r in report.records] == list(range(6))
    for r in report.records:
        assert 0 <= Fraction(r["exact_prob"]) <= 1
    assert report.aggregates["violations"] == 0


def test_shallow_leaf_exact_single_h():
    report = run_experiment(cfg(experiment="shallow-leaf",
                                model=Model.SHAPE_UNIFORM, d=12, n=12, h=3,
                                samples=1, seed=15))
    assert [r["h"] for r in report.records] == [3]
    assert report.records[0]["in_range"] == 1
    assert report.passed


def test_shallow_leaf_probability_values():
    assert shallow_leaf_probability(2, 0) == Fraction(1, 5)
    assert shallow_leaf_probability(3, 0) == Fraction(1, 26)
    assert shallow_leaf_probability(3, 1) == Fraction(10, 26)
    assert shallow_leaf_probability(3, 2) == Fraction(25, 26)
    assert shallow_leaf_probability(3, 3) == 1  # depth <= 3 forces a leaf by 3


def test_shallow_leaf_mc_mode():
    report = run_experiment(cfg(experiment="shallow-leaf",
                                model=Model.FULL_UNIFORM, d=6, n=8, h=1,
                                samples=150, seed=16))
    assert report.theory["mode"] == "mc"
    names = [a["name"] for a in report.assertions]
    assert "shallow-leaf-monotone" in names
    assert "shallow-leaf-tail" in names  # h=1 is inside the guaranteed window
    assert report.passed
    assert report.aggregates["cases"] == 150


def test_shallow_leaf_mc_out_of_window():
    report = run_experiment(cfg(experiment="shallow-leaf",
                                model=Model.FULL_UNIFORM, d=6, n=8,
                                samples=60, seed=17))
    # default h = 4 sits outside the d=6 window, so no tail gate
    assert report.theory["h"] == 4
    names = [a["name"] for a in report.assertions]
    assert "shallow-leaf-tail" not in names
    assert "shallow-leaf-monotone" in names
    assert report.passed


def test_sensitivity_tail_small():
    report = run_experiment(cfg(experiment="sensitivity-tail", d=6, n=8,
                                samples=120, seed=18))
    assert report.passed
    agg = report.aggregates
    assert agg["cases"] == 120
    assert agg["range_ok"] == 1
    assert agg["min_sbar"] <= agg["p01"] <= agg["p50"] <= agg["p99"] <= agg["max_sbar"]
    assert agg["threshold"] == 1.0  # (1 - 1/2) * 6/3
    for r in report.records:
        assert r["q2_lower_float"] == r["sbar_float"] / 18.0


def test_model_compare_small():
    report = run_experiment(cfg(experiment="model-compare", d=2, n=3,
                                samples=400, seed=19))
    assert report.passed
    assert len(report.records) == 800
    two = [r for r in report.records if r["model"] == "structure-two-stage"]
    full = [r for r in report.records if r["model"] == "full-uniform"]
    assert len(two) == len(full) == 400
    assert report.theory["classes"] == [1, 2, 3, 4]


def test_model_compare_exact_tv_value():
    report = run_experiment(cfg(experiment="model-compare", d=1, n=1,
                                samples=300, seed=20))
    # two structures (leaf, one query); leaf weighs 1/2 under the structure
    # reading but only 2/6 under the labeled reading: TV = 1/6
    assert report.theory["tv_exact"] == "1/6"
    assert report.theory["two_stage_prob"] == [0.5, 0.5]
    assert report.theory["full_prob"] == [2 / 6, 4 / 6]
    assert report.passed


def test_model_compare_depth_cap():
    with pytest.raises(ValueError):
        run_experiment(cfg(experiment="model-compare", d=5, n=6, samples=10))


# ---------------------------------------------------------------------------
# reproducibility and verification
# ---------------------------------------------------------------------------

def test_reports_roundtrip_and_verify():
    for experiment, extra in [
        ("leaf-mean", {}),
        ("leaf-flip", {"flips": 4}),
        ("shallow-leaf", {"model": Model.SHAPE_UNIFORM}),
        ("sensitivity-tail", {}),
        ("model-compare", {"d": 2, "n": 3}),
    ]:
        base = dict(experiment=experiment, d=3, n=4, samples=30, seed=21)
        base.update(extra)
        report = run_experiment(cfg(**base))
        for fmt in ("csv", "json"):
            back = parse_report(render(report, fmt))
            assert back.records == report.records, (experiment, fmt)
            assert back.aggregates == report.aggregates, (experiment, fmt)
            assert verify_report(back), (experiment, fmt)


def test_verify_detects_tampering():
    report = run_experiment(cfg(experiment="sensitivity-tail", d=3, n=4,
                                samples=20, seed=22))
    assert verify_report(report)
    report.aggregates["mean_sbar"] += 0.5
    assert not verify_report(report)


def test_workers_do_not_change_bytes():
    base = dict(experiment="sensitivity-tail", d=5, n=7, samples=24, seed=23)
    texts = []
    for workers in (1, 3):
        _, text = run_and_render(cfg(fmt="json", workers=workers, **base))
        texts.append(text)
    assert texts[0] == texts[1]


def test_workers_do_not_change_bytes_csv():
    base = dict(experiment="leaf-flip", d=3, n=4, samples=16, flips=4, seed=24)
    _, serial = run_and_render(cfg(fmt="csv", workers=1, **base))
    _, parallel = run_and_render(cfg(fmt="csv", workers=2, **base))
    assert serial == parallel


def test_seed_changes_output():
    a = run_experiment(cfg(experiment="sensitivity-tail", d=4, n=5,
                           samples=20, seed=1))
    b = run_experiment(cfg(experiment="sensitivity-tail", d=4, n=5,
                           samples=20, seed=2))
    assert a.records != b.records


def test_rerun_is_identical():
    config = cfg(experiment="leaf-mean", d=3, n=5, samples=25, seed=25)
    assert run_experiment(config) == run_experiment(config)


def test_run_and_render_writes_file(tmp_path):
    out = tmp_path / "report.csv"
    config = cfg(experiment="sensitivity-tail", d=3, n=4, samples=10,
                 seed=26, output=str(out))
    _, text = run_and_render(config)
    written = out.read_bytes().decode("utf-8")
    assert written == text
    assert "\r" not in written
