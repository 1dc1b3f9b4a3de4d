"""Experiment report container and its two wire formats.

A report is config + theory + per-sample records + aggregates + assertion
results.  Both formats round-trip exactly:

* JSON: one object with fixed key order; floats use Python's shortest
  round-trip repr.
* CSV: '#'-prefixed preamble lines carrying schema/config/theory as JSON,
  then a header row and one comma-separated row per record, then trailing
  '#aggregates=' / '#assertions=' lines.  Floats use 17 significant digits,
  which is lossless for doubles, and exact rationals ride along as strings
  ("a/2^k" and "p/q").  The comment prefix keeps the record block loadable
  by any csv reader with comment support.

Everything is deterministic: rendering the same report twice is
byte-identical, and parse(render(r)) reproduces r's values exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

SCHEMA = "dtq-report/1"

#: Per-experiment column type codes ('i' int, 'f' float, 's' str).  The
#: active column subset and order live in each report; this registry only
#: supplies value types when parsing CSV back.
COLUMN_TYPES: dict[str, dict[str, str]] = {
    "leaf-mean": {
        "sample_id": "i", "leaves": "i", "depth": "i", "min_depth": "i",
        "exact": "i", "assignments": "i", "mean_sbar": "s",
        "mean_sbar_float": "f", "expected_sbar": "s",
        "expected_sbar_float": "f", "deviation": "f", "sigma": "f", "ok": "i",
    },
    "leaf-flip": {
        "sample_id": "i", "flip": "i", "leaf_index": "i", "leaf_depth": "i",
        "leaves": "i", "sbar": "s", "sbar_flipped": "s", "delta": "s",
        "delta_float": "f", "bound": "s", "bound_float": "f", "ratio": "f",
        "ok": "i",
    },
    "shallow-leaf": {
        # exact mode rows
        "h": "i", "exact_prob": "s", "exact_prob_float": "f",
        "bound_raw": "f", "bound_log2": "f", "in_range": "i", "ok": "i",
        # monte carlo mode rows
        "sample_id": "i", "leaves": "i", "min_depth": "i", "shallow": "i",
    },
    "sensitivity-tail": {
        "sample_id": "i", "leaves": "i", "depth": "i", "min_depth": "i",
        "sbar": "s", "sbar_float": "f", "expected_sbar": "s",
        "expected_sbar_float": "f", "below_threshold": "i",
        "q2_lower_float": "f",
    },
    "model-compare": {
        "sample_id": "i", "model": "s", "leaves": "i", "min_depth": "i",
    },
}


@dataclass
class ExperimentReport:
    config: dict
    theory: dict
    columns: list[str]
    records: list[dict]
    aggregates: dict = field(default_factory=dict)
    assertions: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(a["passed"] for a in self.assertions)


def format_float(x: float) -> str:
    return format(x, ".17g")


def jsonable(value):
    """Deep copy with non-finite floats mapped to None (strict JSON)."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


def _dump(obj) -> str:
    return json.dumps(jsonable(obj), separators=(",", ":"), allow_nan=False)


def render_json(report: ExperimentReport) -> str:
    doc = {
        "schema": SCHEMA,
        "config": jsonable(report.config),
        "theory": jsonable(report.theory),
        "columns": list(report.columns),
        "records": jsonable(report.records),
        "aggregates": jsonable(report.aggregates),
        "assertions": jsonable(report.assertions),
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _cell(value) -> str:
    if isinstance(value, bool):
        raise TypeError("record cells must be int, float or str, not bool")
    if isinstance(value, float):
        text = format_float(value)
    elif isinstance(value, int):
        text = str(value)
    elif isinstance(value, str):
        text = value
    else:
        raise TypeError(f"record cells must be int, float or str, got {type(value).__name__}")
    if "," in text or "\n" in text or "#" in text:
        raise ValueError(f"cell value not representable in csv: {text!r}")
    return text


def render_csv(report: ExperimentReport) -> str:
    lines = [
        f"#schema={SCHEMA}",
        f"#config={_dump(report.config)}",
        f"#theory={_dump(report.theory)}",
        ",".join(report.columns),
    ]
    for record in report.records:
        lines.append(",".join(_cell(record[c]) for c in report.columns))
    lines.append(f"#aggregates={_dump(report.aggregates)}")
    lines.append(f"#assertions={_dump(report.assertions)}")
    return "\n".join(lines) + "\n"


def render(report: ExperimentReport, fmt: str) -> str:
    if fmt == "json":
        return render_json(report)
    if fmt == "csv":
        return render_csv(report)
    raise ValueError(f"unknown report format: {fmt!r}")


def parse_report(text: str) -> ExperimentReport:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        if doc.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema: {doc.get('schema')!r}")
        return ExperimentReport(
            config=doc["config"],
            theory=doc["theory"],
            columns=list(doc["columns"]),
            records=doc["records"],
            aggregates=doc["aggregates"],
            assertions=doc["assertions"],
        )
    return _parse_csv(text)


def _parse_csv(text: str) -> ExperimentReport:
    meta: dict[str, str] = {}
    columns: list[str] = []
    rows: list[list[str]] = []
    for line in text.splitlines():
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            meta[key] = value
        elif not columns:
            columns = line.split(",")
        else:
            rows.append(line.split(","))
    if meta.get("schema") != SCHEMA:
        raise ValueError(f"unsupported report schema: {meta.get('schema')!r}")
    config = json.loads(meta["config"])
    experiment = config.get("experiment")
    types = COLUMN_TYPES.get(experiment)
    if types is None:
        raise ValueError(f"unknown experiment in report: {experiment!r}")

    def revive(column: str, cell: str):
        kind = types.get(column, "s")
        if kind == "i":
            return int(cell)
        if kind == "f":
            return float(cell)
        return cell

    records = []
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} cells, header has {len(columns)}")
        records.append({c: revive(c, v) for c, v in zip(columns, row)})
    return ExperimentReport(
        config=config,
        theory=json.loads(meta["theory"]),
        columns=columns,
        records=records,
        aggregates=json.loads(meta["aggregates"]),
        assertions=json.loads(meta["assertions"]),
    )
