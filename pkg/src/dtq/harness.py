"""Monte Carlo and exhaustive experiment driver.

Five experiments, all driven by one seeded config:

* ``leaf-mean``        -- mean of avg sensitivity over a structure's leaf
                          assignments vs the closed-form half-expected-path
                          -length; exhaustive when the structure has at most
                          16 leaves, sampled otherwise.
* ``leaf-flip``        -- effect of rewriting a single leaf vs the
                          per-profile Lipschitz bound.
* ``shallow-leaf``     -- probability of a leaf at depth <= h: exact count
                          ratios for uniform shapes, sampled frequencies for
                          the other models, against the closed-form tail.
* ``sensitivity-tail`` -- distribution of avg sensitivity vs the assembled
                          two-term tail and its threshold (1-eps)*d/3.
* ``model-compare``    -- structure marginals of the two uniform-tree
                          readings, compared by total variation on
                          leaf-count classes.

Reproducibility: sample i always uses the substream derived from
(seed, i), so results are independent of worker count and identical runs
are byte-identical.  Statistical gates are one-sided 3-sigma allowances on
top of the theoretical value; a failed gate turns into a failed assertion
in the report and a nonzero exit from the CLI.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .bounds import (
    BoundValue,
    leaf_depth_tail,
    lipschitz_bound,
    typical_sensitivity_tail,
)
from .combinatorics import (
    Model,
    RandomStream,
    assign_uniform_bits,
    count_labeled,
    count_min_depth_shapes,
    count_shapes,
    count_structures,
    leaf_count_profile,
    sample,
)
from .dyadic import Dyadic
from .report import ExperimentReport, render
from .sensitivity import (
    avg_sensitivity_auto,
    expected_sensitivity_over_leaves,
    mean_sensitivity_over_assignments,
)
from .trees import (
    flip_leaf,
    leaf_count,
    leaf_depths,
    leaf_profile,
    min_leaf_depth,
    structure_of,
)

EXPERIMENTS = (
    "leaf-mean",
    "leaf-flip",
    "shallow-leaf",
    "sensitivity-tail",
    "model-compare",
)

#: Structures with at most this many leaves get the exhaustive assignment
#: sweep in leaf-mean; larger ones fall back to sampled assignments.
EXHAUSTIVE_LEAF_CAP = 16

#: Exact shallow-leaf count ratios are computed up to this depth.
EXACT_SHAPE_DEPTH_CAP = 14


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    model: Model = Model.FULL_UNIFORM
    d: int = 4
    n: int = 6
    samples: int = 200
    seed: int = 0
    epsilon: float = 0.5
    h: "int | None" = None
    assignments: int = 512
    flips: int = 32
    output: "str | None" = None
    fmt: str = "csv"
    workers: int = 1

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; "
                             f"choose from {', '.join(EXPERIMENTS)}")
        if not isinstance(self.model, Model):
            raise ValueError(f"model must be a Model, got {self.model!r}")
        if self.d < 0:
            raise ValueError("d must be >= 0")
        if self.n < self.d:
            raise ValueError(f"need n >= d, got n={self.n}, d={self.d}")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.assignments < 2:
            raise ValueError("assignments must be >= 2")
        if self.flips < 1:
            raise ValueError("flips must be >= 1")
        if self.fmt not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.fmt!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def config_echo(config: ExperimentConfig) -> dict:
    """The semantic part of the config, embedded in every report.

    Output path, format and worker count are deliberately excluded: they
    affect where and how fast the report is produced, never its content,
    and reports must be byte-identical across worker counts.
    """
    return {
        "experiment": config.experiment,
        "model": config.model.value,
        "d": config.d,
        "n": config.n,
        "samples": config.samples,
        "seed": config.seed,
        "epsilon": config.epsilon,
        "h": config.h,
        "assignments": config.assignments,
        "flips": config.flips,
    }


def _bound_dict(b: BoundValue) -> dict:
    return {"raw": b.raw, "log2": b.log2, "clamped": b.clamped,
            "in_range": 1 if b.in_range else 0}


def _map_samples(fn, payloads, workers: int) -> list:
    if workers <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    chunk = max(1, len(payloads) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, payloads, chunksize=chunk))


def binomial_sigma(p: float, k: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / k)


def nearest_rank(sorted_vals: list, pct: float):
    if not sorted_vals:
        raise ValueError("no values")
    k = max(1, math.ceil(pct / 100.0 * len(sorted_vals)))
    return sorted_vals[min(k, len(sorted_vals)) - 1]


def _assertion(name: str, passed: bool, detail: str) -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


# ---------------------------------------------------------------------------
# leaf-mean
# ---------------------------------------------------------------------------

LEAF_MEAN_COLUMNS = [
    "sample_id", "leaves", "depth", "min_depth", "exact", "assignments",
    "mean_sbar", "mean_sbar_float", "expected_sbar", "expected_sbar_float",
    "deviation", "sigma", "ok",
]


def _leaf_mean_one(payload) -> dict:
    config, i = payload
    rng = RandomStream(config.seed).substream(i)
    structure = structure_of(sample(config.model, config.d, config.n, rng))
    profile = leaf_profile(structure)
    expected = expected_sensitivity_over_leaves(structure)
    row = {
        "sample_id": i,
        "leaves": profile.leaf_count,
        "depth": profile.max_depth,
        "min_depth": profile.min_depth,
        "expected_sbar": str(expected),
        "expected_sbar_float": float(expected),
    }
    if profile.leaf_count <= EXHAUSTIVE_LEAF_CAP:
        mean = mean_sensitivity_over_assignments(structure)
        row.update(
            exact=1,
            assignments=1 << profile.leaf_count,
            mean_sbar=str(mean),
            mean_sbar_float=float(mean),
            deviation=abs(float(mean) - float(expected)),
            sigma=0.0,
            ok=1 if mean == expected else 0,
        )
        return row
    k = config.assignments
    values = []
    for _ in range(k):
        tree = assign_uniform_bits(structure, rng)
        values.append(float(avg_sensitivity_auto(tree)))
    mean_f = math.fsum(values) / k
    var = math.fsum((v - mean_f) ** 2 for v in values) / (k - 1)
    sem = math.sqrt(var / k)
    deviation = abs(mean_f - float(expected))
    row.update(
        exact=0,
        assignments=k,
        mean_sbar="NA",
        mean_sbar_float=mean_f,
        deviation=deviation,
        sigma=sem,
        # tiny cushion so an exactly-correct mean cannot fail on float dust
        ok=1 if deviation <= 3.0 * sem + 1e-9 else 0,
    )
    return row


def _aggregate_leaf_mean(records: list[dict], config: dict, theory: dict) -> dict:
    exact = [r for r in records if r["exact"] == 1]
    sampled = [r for r in records if r["exact"] == 0]
    return {
        "cases": len(records),
        "exact_cases": len(exact),
        "exact_matches": sum(r["ok"] for r in exact),
        "mc_cases": len(sampled),
        "mc_within_3sigma": sum(r["ok"] for r in sampled),
        "max_deviation": max((r["deviation"] for r in records), default=0.0),
    }


def run_leaf_mean(config: ExperimentConfig) -> ExperimentReport:
    echo = config_echo(config)
    theory = {
        "identity": "mean over leaf assignments of sbar equals half the expected path length",
        "exhaustive_leaf_cap": EXHAUSTIVE_LEAF_CAP,
    }
    payloads = [(config, i) for i in range(config.samples)]
    records = _map_samples(_leaf_mean_one, payloads, config.workers)
    aggregates = _aggregate_leaf_mean(records, echo, theory)
    assertions = [
        _assertion(
            "leaf-mean-exact",
            aggregates["exact_matches"] == aggregates["exact_cases"],
            f"{aggregates['exact_matches']}/{aggregates['exact_cases']} exhaustive "
            "assignment means equal the closed form exactly",
        ),
        _assertion(
            "leaf-mean-sampled",
            aggregates["mc_within_3sigma"] == aggregates["mc_cases"],
            f"{aggregates['mc_within_3sigma']}/{aggregates['mc_cases']} sampled "
            "assignment means within 3 sigma of the closed form",
        ),
    ]
    return ExperimentReport(echo, theory, LEAF_MEAN_COLUMNS, records,
                            aggregates, assertions)


# ---------------------------------------------------------------------------
# leaf-flip
# ---------------------------------------------------------------------------

LEAF_FLIP_COLUMNS = [
    "sample_id", "flip", "leaf_index", "leaf_depth", "leaves", "sbar",
    "sbar_flipped", "delta", "delta_float", "bound", "bound_float", "ratio",
    "ok",
]


def _leaf_flip_one(payload) -> list[dict]:
    config, i = payload
    rng = RandomStream(config.seed).substream(i)
    tree = sample(config.model, config.d, config.n, rng)
    depths = leaf_depths(tree)
    total = len(depths)
    bound = lipschitz_bound(leaf_profile(tree))
    base = avg_sensitivity_auto(tree)
    if total <= config.flips:
        indices = list(range(total))
    else:
        # partial Fisher-Yates over leaf indices, driven by the substream
        pool = list(range(total))
        indices = []
        for j in range(config.flips):
            t = rng.uniform_below(total - j)
            indices.append(pool[t])
            pool[t] = pool[total - 1 - j]
    rows = []
    for ordinal, idx in enumerate(indices):
        flipped = avg_sensitivity_auto(flip_leaf(tree, idx))
        delta = abs(flipped - base)
        ratio = float(delta) / float(bound) if bound.num else 0.0
        rows.append({
            "sample_id": i,
            "flip": ordinal,
            "leaf_index": idx,
            "leaf_depth": depths[idx],
            "leaves": total,
            "sbar": str(base),
            "sbar_flipped": str(flipped),
            "delta": str(delta),
            "delta_float": float(delta),
            "bound": str(bound),
            "bound_float": float(bound),
            "ratio": ratio,
            "ok": 1 if delta <= bound else 0,
        })
    return rows


def _aggregate_leaf_flip(records: list[dict], config: dict, theory: dict) -> dict:
    return {
        "cases": len(records),
        "violations": sum(1 for r in records if r["ok"] == 0),
        "max_ratio": max((r["ratio"] for r in records), default=0.0),
        "max_delta": max((r["delta_float"] for r in records), default=0.0),
    }


def run_leaf_flip(config: ExperimentConfig) -> ExperimentReport:
    echo = config_echo(config)
    theory = {
        "bound": "one leaf flip moves sbar by at most max over leaves of d(l)*2^(1-d(l))",
        "flips_per_tree_cap": config.flips,
    }
    payloads = [(config, i) for i in range(config.samples)]
    nested = _map_samples(_leaf_flip_one, payloads, config.workers)
    records = [row for rows in nested for row in rows]
    aggregates = _aggregate_leaf_flip(records, echo, theory)
    assertions = [
        _assertion(
            "leaf-flip-bound",
            aggregates["violations"] == 0,
            f"{aggregates['cases']} flips, {aggregates['violations']} above the "
            f"Lipschitz bound (exact comparison); max ratio {aggregates['max_ratio']:.6f}",
        ),
    ]
    return ExperimentReport(echo, theory, LEAF_FLIP_COLUMNS, records,
                            aggregates, assertions)


# ---------------------------------------------------------------------------
# shallow-leaf
# ---------------------------------------------------------------------------

SHALLOW_EXACT_COLUMNS = [
    "h", "exact_prob", "exact_prob_float", "bound_raw", "bound_log2",
    "in_range", "ok",
]
SHALLOW_MC_COLUMNS = ["sample_id", "leaves", "min_depth", "shallow"]


def shallow_leaf_probability(d: int, h: int) -> Fraction:
    """Exact Pr[some leaf at depth <= h] for a uniform shape of depth <= d."""
    total = count_shapes(d)
    return Fraction(total - count_min_depth_shapes(d, h), total)


def _shallow_bound_holds_exactly(d: int, h: int, prob: Fraction) -> bool:
    # Compare against 2^(1-2^(d-h-2)) without ever leaving the rationals;
    # the float form underflows long before d reaches the cap.
    inner = d - h - 2
    if inner < 0:
        return True  # bound exceeds 1
    return prob <= Fraction(2, 2 ** (2 ** inner))


def _shallow_mc_one(payload) -> dict:
    config, i = payload
    h = config.h if config.h is not None else (2 * config.d) // 3
    rng = RandomStream(config.seed).substream(i)
    tree = sample(config.model, config.d, config.n, rng)
    md = min_leaf_depth(tree)
    return {
        "sample_id": i,
        "leaves": leaf_count(tree),
        "min_depth": md,
        "shallow": 1 if md <= h else 0,
    }


def _aggregate_shallow_exact(records: list[dict], config: dict, theory: dict) -> dict:
    binding = [r for r in records if r["in_range"] == 1]
    return {
        "mode": "exact",
        "rows": len(records),
        "binding_rows": len(binding),
        "violations": sum(1 for r in binding if r["ok"] == 0),
    }


def _aggregate_shallow_mc(records: list[dict], config: dict, theory: dict) -> dict:
    k = len(records)
    shallow = sum(r["shallow"] for r in records)
    freq = shallow / k
    out = {
        "mode": "mc",
        "cases": k,
        "shallow": shallow,
        "shallow_freq": freq,
        "h": theory["h"],
    }
    shape_prob = theory.get("shape_prob_float")
    if shape_prob is not None:
        sigma = binomial_sigma(shape_prob, k)
        out["shape_prob_float"] = shape_prob
        out["monotone_sigma"] = sigma
        out["monotone_ok"] = 1 if freq <= shape_prob + 3.0 * sigma else 0
    bound = theory["bound"]
    if bound["in_range"]:
        clamped = bound["clamped"]
        sigma = binomial_sigma(clamped, k)
        out["bound_clamped"] = clamped
        out["tail_sigma"] = sigma
        out["tail_ok"] = 1 if freq <= clamped + 3.0 * sigma else 0
    return out


def run_shallow_leaf(config: ExperimentConfig) -> ExperimentReport:
    echo = config_echo(config)
    exact_mode = (config.model is Model.SHAPE_UNIFORM
                  and config.d <= EXACT_SHAPE_DEPTH_CAP)
    if exact_mode:
        d = config.d
        theory = {
            "mode": "exact",
            "shape_count": str(count_shapes(d)),
            "bound": "2^(1-2^(d-h-2)) for h <= d - log2(d) - 2",
        }
        hs = [config.h] if config.h is not None else list(range(d))
        records = []
        for h in hs:
            prob = shallow_leaf_probability(d, h)
            bound = leaf_depth_tail(d, h)
            holds = _shallow_bound_holds_exactly(d, h, prob)
            records.append({
                "h": h,
                "exact_prob": str(prob),
                "exact_prob_float": float(prob),
                "bound_raw": bound.raw,
                "bound_log2": bound.log2,
                "in_range": 1 if bound.in_range else 0,
                "ok": 1 if (not bound.in_range or holds) else 0,
            })
        aggregates = _aggregate_shallow_exact(records, echo, theory)
        assertions = [
            _assertion(
                "shallow-leaf-dominance",
                aggregates["violations"] == 0,
                f"{aggregates['binding_rows']} in-range thresholds checked "
                f"exactly, {aggregates['violations']} above the tail bound",
            ),
        ]
        return ExperimentReport(echo, theory, SHALLOW_EXACT_COLUMNS, records,
                                aggregates, assertions)

    h = config.h if config.h is not None else (2 * config.d) // 3
    bound = leaf_depth_tail(config.d, h)
    theory = {
        "mode": "mc",
        "h": h,
        "bound": _bound_dict(bound),
        "shape_prob_float": (
            float(shallow_leaf_probability(config.d, h))
            if config.d <= EXACT_SHAPE_DEPTH_CAP else None
        ),
    }
    payloads = [(config, i) for i in range(config.samples)]
    records = _map_samples(_shallow_mc_one, payloads, config.workers)
    aggregates = _aggregate_shallow_mc(records, echo, theory)
    assertions = []
    if "monotone_ok" in aggregates:
        assertions.append(_assertion(
            "shallow-leaf-monotone",
            aggregates["monotone_ok"] == 1,
            f"frequency {aggregates['shallow_freq']:.6f} vs uniform-shape "
            f"probability {aggregates['shape_prob_float']:.6f} + 3 sigma "
            "(labels can only make shallow leaves rarer)",
        ))
    if "tail_ok" in aggregates:
        assertions.append(_assertion(
            "shallow-leaf-tail",
            aggregates["tail_ok"] == 1,
            f"frequency {aggregates['shallow_freq']:.6f} vs closed-form tail "
            f"{aggregates['bound_clamped']:.6f} + 3 sigma",
        ))
    if not assertions:
        assertions.append(_assertion(
            "shallow-leaf-report-only", True,
            "h outside the guaranteed window and depth above the exact cap; "
            "frequencies reported without a binding gate",
        ))
    return ExperimentReport(echo, theory, SHALLOW_MC_COLUMNS, records,
                            aggregates, assertions)


# ---------------------------------------------------------------------------
# sensitivity-tail
# ---------------------------------------------------------------------------

SENSITIVITY_TAIL_COLUMNS = [
    "sample_id", "leaves", "depth", "min_depth", "sbar", "sbar_float",
    "expected_sbar", "expected_sbar_float", "below_threshold",
    "q2_lower_float",
]


def _sensitivity_tail_one(payload) -> dict:
    config, i = payload
    rng = RandomStream(config.seed).substream(i)
    tree = sample(config.model, config.d, config.n, rng)
    profile = leaf_profile(tree)
    sbar = avg_sensitivity_auto(tree)
    expected = expected_sensitivity_over_leaves(tree)
    threshold = (1.0 - config.epsilon) * config.d / 3.0
    below = 1 if sbar.as_fraction() < Fraction(threshold) else 0
    return {
        "sample_id": i,
        "leaves": profile.leaf_count,
        "depth": profile.max_depth,
        "min_depth": profile.min_depth,
        "sbar": str(sbar),
        "sbar_float": float(sbar),
        "expected_sbar": str(expected),
        "expected_sbar_float": float(expected),
        "below_threshold": below,
        "q2_lower_float": float(sbar) / 18.0,
    }


def _aggregate_sensitivity_tail(records: list[dict], config: dict, theory: dict) -> dict:
    k = len(records)
    values = sorted(r["sbar_float"] for r in records)
    below = sum(r["below_threshold"] for r in records)
    freq = below / k
    clamped = theory["tail"]["total"]["clamped"]
    sigma = binomial_sigma(clamped, k)
    d = config["d"]
    range_ok = all(
        Dyadic(0) <= Dyadic.parse(r["sbar"]) <= d for r in records
    )
    return {
        "cases": k,
        "mean_sbar": math.fsum(values) / k,
        "min_sbar": values[0],
        "max_sbar": values[-1],
        "p01": nearest_rank(values, 1),
        "p05": nearest_rank(values, 5),
        "p25": nearest_rank(values, 25),
        "p50": nearest_rank(values, 50),
        "p75": nearest_rank(values, 75),
        "p95": nearest_rank(values, 95),
        "p99": nearest_rank(values, 99),
        "threshold": theory["threshold"],
        "below_threshold": below,
        "tail_freq": freq,
        "bound_clamped": clamped,
        "gate_sigma": sigma,
        "within_gate": 1 if freq <= clamped + 3.0 * sigma else 0,
        "range_ok": 1 if range_ok else 0,
    }


def run_sensitivity_tail(config: ExperimentConfig) -> ExperimentReport:
    echo = config_echo(config)
    tail = typical_sensitivity_tail(config.d, config.epsilon)
    theory = {
        "threshold": tail.threshold,
        "tail": {
            "leaf_term": _bound_dict(tail.leaf_term),
            "concentration_term": _bound_dict(tail.concentration_term),
            "total": _bound_dict(tail.total),
        },
        "q2_rule": "q2_lower_float = sbar/18",
    }
    payloads = [(config, i) for i in range(config.samples)]
    records = _map_samples(_sensitivity_tail_one, payloads, config.workers)
    aggregates = _aggregate_sensitivity_tail(records, echo, theory)
    assertions = [
        _assertion(
            "sensitivity-tail-gate",
            aggregates["within_gate"] == 1,
            f"frequency of sbar below {aggregates['threshold']:.6f} is "
            f"{aggregates['tail_freq']:.6f} vs bound "
            f"{aggregates['bound_clamped']:.6f} + 3 sigma",
        ),
        _assertion(
            "sensitivity-range",
            aggregates["range_ok"] == 1,
            "every sampled sbar lies in [0, d] (exact comparison)",
        ),
    ]
    return ExperimentReport(echo, theory, SENSITIVITY_TAIL_COLUMNS, records,
                            aggregates, assertions)


# ---------------------------------------------------------------------------
# model-compare
# ---------------------------------------------------------------------------

MODEL_COMPARE_COLUMNS = ["sample_id", "model", "leaves", "min_depth"]

#: Exact class probabilities need the full leaf-count profile; depth 4
#: already has 2^4 classes and count_structures(5, 5) is astronomically
#: branchy to cross-check, so the experiment is capped here.
MODEL_COMPARE_DEPTH_CAP = 4


def _model_compare_one(payload) -> dict:
    config, i = payload
    model = (Model.STRUCTURE_TWO_STAGE if i < config.samples
             else Model.FULL_UNIFORM)
    rng = RandomStream(config.seed).substream(i)
    tree = sample(model, config.d, config.n, rng)
    return {
        "sample_id": i,
        "model": model.value,
        "leaves": leaf_count(tree),
        "min_depth": min_leaf_depth(tree),
    }


def _aggregate_model_compare(records: list[dict], config: dict, theory: dict) -> dict:
    k = config["samples"]
    classes = theory["classes"]
    index = {L: j for j, L in enumerate(classes)}
    counts = {
        Model.STRUCTURE_TWO_STAGE.value: [0] * len(classes),
        Model.FULL_UNIFORM.value: [0] * len(classes),
    }
    for r in records:
        counts[r["model"]][index[r["leaves"]]] += 1
    freq_two = [c / k for c in counts[Model.STRUCTURE_TWO_STAGE.value]]
    freq_full = [c / k for c in counts[Model.FULL_UNIFORM.value]]
    tv_emp = 0.5 * math.fsum(abs(a - b) for a, b in zip(freq_two, freq_full))
    tv_exact = theory["tv_exact_float"]
    # 3-sigma allowance on the folded difference plus its worst-case bias
    per_class = [
        (p * (1.0 - p) + q * (1.0 - q)) / k
        for p, q in zip(theory["two_stage_prob"], theory["full_prob"])
    ]
    sigma = 0.5 * math.sqrt(math.fsum(per_class))
    bias = 0.5 * math.fsum(math.sqrt(v) for v in per_class)
    lo = tv_exact - 3.0 * sigma
    hi = tv_exact + 3.0 * sigma + bias
    return {
        "samples_per_model": k,
        "freq_two_stage": freq_two,
        "freq_full": freq_full,
        "tv_empirical": tv_emp,
        "tv_exact_float": tv_exact,
        "gate_lo": lo,
        "gate_hi": hi,
        "within_gate": 1 if lo <= tv_emp <= hi else 0,
    }


def run_model_compare(config: ExperimentConfig) -> ExperimentReport:
    if config.d > MODEL_COMPARE_DEPTH_CAP:
        raise ValueError(
            f"model-compare computes exact class probabilities; need d <= "
            f"{MODEL_COMPARE_DEPTH_CAP}, got {config.d}"
        )
    echo = config_echo(config)
    pairs = leaf_count_profile(config.d, config.n)
    c_total = count_structures(config.d, config.n)
    f_total = count_labeled(config.d, config.n)
    classes = [L for L, _ in pairs]
    p_two = [Fraction(c, c_total) for _, c in pairs]
    p_full = [Fraction(c * (1 << L), f_total) for L, c in pairs]
    tv_exact = sum(abs(p - q) for p, q in zip(p_two, p_full)) / 2
    theory = {
        "classes": classes,
        "structure_counts": [str(c) for _, c in pairs],
        "two_stage_prob": [float(p) for p in p_two],
        "full_prob": [float(q) for q in p_full],
        "two_stage_prob_exact": [str(p) for p in p_two],
        "full_prob_exact": [str(q) for q in p_full],
        "tv_exact": str(tv_exact),
        "tv_exact_float": float(tv_exact),
    }
    payloads = [(config, i) for i in range(2 * config.samples)]
    records = _map_samples(_model_compare_one, payloads, config.workers)
    aggregates = _aggregate_model_compare(records, echo, theory)
    assertions = [
        _assertion(
            "model-compare-tv",
            aggregates["within_gate"] == 1,
            f"empirical total variation {aggregates['tv_empirical']:.6f} vs "
            f"exact {aggregates['tv_exact_float']:.6f} "
            f"(allowed [{aggregates['gate_lo']:.6f}, {aggregates['gate_hi']:.6f}])",
        ),
    ]
    return ExperimentReport(echo, theory, MODEL_COMPARE_COLUMNS, records,
                            aggregates, assertions)


# ---------------------------------------------------------------------------
# dispatch, verification, output
# ---------------------------------------------------------------------------

_RUNNERS = {
    "leaf-mean": run_leaf_mean,
    "leaf-flip": run_leaf_flip,
    "shallow-leaf": run_shallow_leaf,
    "sensitivity-tail": run_sensitivity_tail,
    "model-compare": run_model_compare,
}

_AGGREGATORS = {
    "leaf-mean": _aggregate_leaf_mean,
    "leaf-flip": _aggregate_leaf_flip,
    "sensitivity-tail": _aggregate_sensitivity_tail,
    "model-compare": _aggregate_model_compare,
}


def _aggregate_shallow(records: list[dict], config: dict, theory: dict) -> dict:
    if theory.get("mode") == "exact":
        return _aggregate_shallow_exact(records, config, theory)
    return _aggregate_shallow_mc(records, config, theory)


_AGGREGATORS["shallow-leaf"] = _aggregate_shallow


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    return _RUNNERS[config.experiment](config)


def verify_report(report: ExperimentReport) -> bool:
    """Recompute the aggregates from the records alone and compare.

    Aggregation is a pure function of (records, config, theory), so a
    parsed report must reproduce its own aggregates bit for bit.
    """
    experiment = report.config["experiment"]
    recomputed = _AGGREGATORS[experiment](report.records, report.config,
                                          report.theory)
    return recomputed == report.aggregates


def run_and_render(config: ExperimentConfig) -> tuple[ExperimentReport, str]:
    report = run_experiment(config)
    text = render(report, config.fmt)
    if config.output:
        with open(config.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return report, text
