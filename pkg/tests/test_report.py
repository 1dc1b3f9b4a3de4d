"""Report rendering and parsing: exact round-trips in both formats."""

import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dtq import (
    SCHEMA,
    ExperimentReport,
    format_float,
    jsonable,
    parse_report,
    render,
    render_csv,
    render_json,
)
from dtq.report import _cell


def small_report() -> ExperimentReport:
    return ExperimentReport(
        config={
            "experiment": "sensitivity-tail", "model": "full-uniform",
            "d": 2, "n": 2, "samples": 2, "seed": 7, "epsilon": 0.5,
            "h": None, "assignments": 512, "flips": 32,
        },
        theory={"threshold": 0.5, "note": "hand-built fixture"},
        columns=["sample_id", "sbar", "sbar_float", "below_threshold"],
        records=[
            {"sample_id": 0, "sbar": "3/2^1", "sbar_float": 1.5,
             "below_threshold": 0},
            {"sample_id": 1, "sbar": "1/2^2", "sbar_float": 0.25,
             "below_threshold": 1},
        ],
        aggregates={"cases": 2, "tail_freq": 0.5},
        assertions=[{"name": "demo", "passed": True, "detail": "fixture"}],
    )


def test_json_roundtrip():
    report = small_report()
    back = parse_report(render_json(report))
    assert back.config == report.config
    assert back.theory == report.theory
    assert back.columns == report.columns
    assert back.records == report.records
    assert back.aggregates == report.aggregates
    assert back.assertions == report.assertions


def test_csv_roundtrip():
    report = small_report()
    text = render_csv(report)
    back = parse_report(text)
    assert back.config == report.config
    assert back.theory == report.theory
    assert back.columns == report.columns
    assert back.records == report.records
    assert back.aggregates == report.aggregates
    assert back.assertions == report.assertions


def test_csv_layout():
    text = render_csv(small_report())
    lines = text.splitlines()
    assert lines[0] == f"#schema={SCHEMA}"
    assert lines[1].startswith("#config=")
    assert lines[2].startswith("#theory=")
    assert lines[3] == "sample_id,sbar,sbar_float,below_threshold"
    assert lines[4].split(",")[1] == "3/2^1"
    assert lines[-2].startswith("#aggregates=")
    assert lines[-1].startswith("#assertions=")
    assert text.endswith("\n")


def test_rendering_is_deterministic():
    a, b = small_report(), small_report()
    assert render_csv(a) == render_csv(b)
    assert render_json(a) == render_json(b)


def test_render_dispatch():
    report = small_report()
    assert render(report, "csv") == render_csv(report)
    assert render(report, "json") == render_json(report)
    with pytest.raises(ValueError):
        render(report, "xml")


def test_passed_property():
    report = small_report()
    assert report.passed
    report.assertions.append({"name": "bad", "passed": False, "detail": ""})
    assert not report.passed


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_format_float_is_lossless(x):
    assert float(format_float(x)) == x


def test_format_float_examples():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(1.0) == "1"
    assert float(format_float(1e-300)) == 1e-300


def test_jsonable_maps_non_finite_to_none():
    doc = jsonable({"a": math.nan, "b": [math.inf, 1.5], "c": (2, -math.inf)})
    assert doc == {"a": None, "b": [None, 1.5], "c": [2, None]}


def test_cell_rules():
    assert _cell(3) == "3"
    assert _cell(0.5) == "0.5"
    assert _cell("7/2^3") == "7/2^3"
    with pytest.raises(TypeError):
        _cell(True)
    with pytest.raises(TypeError):
        _cell(None)
    for bad in ("a,b", "a\nb", "a#b"):
        with pytest.raises(ValueError):
            _cell(bad)


def test_parse_rejects_wrong_schema():
    text = render_json(small_report()).replace(SCHEMA, "dtq-report/999")
    with pytest.raises(ValueError):
        parse_report(text)
    csv_text = render_csv(small_report()).replace(SCHEMA, "other/1")
    with pytest.raises(ValueError):
        parse_report(csv_text)


def test_parse_rejects_unknown_experiment():
    report = small_report()
    report.config["experiment"] = "mystery"
    with pytest.raises(ValueError):
        parse_report(render_csv(report))


def test_parse_rejects_ragged_rows():
    text = render_csv(small_report())
    lines = text.splitlines()
    lines[4] = lines[4] + ",999"
    with pytest.raises(ValueError):
        parse_report("\n".join(lines) + "\n")


def test_csv_cells_are_retyped():
    back = parse_report(render_csv(small_report()))
    row = back.records[0]
    assert isinstance(row["sample_id"], int)
    assert isinstance(row["sbar_float"], float)
    assert isinstance(row["sbar"], str)


def test_json_format_is_strict():
    # non-finite floats must not leak into the JSON text
    report = small_report()
    report.aggregates["weird"] = math.inf
    text = render_json(report)
    json.loads(text)  # would fail on bare Infinity
    assert "Infinity" not in text
