"""Serialization of residual reports: sorted-key JSON and an aligned text table."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import jsonschema

from .verify import ResidualReport


@lru_cache(maxsize=1)
def schema() -> dict:
    text = resources.files("finsler").joinpath("data/report_schema.json").read_text()
    return json.loads(text)


def validate(doc: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``doc`` is not a valid report."""
    jsonschema.validate(doc, schema())


def to_json(report: ResidualReport) -> str:
    doc = report.as_dict()
    validate(doc)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _fmt(x) -> str:
    return "-" if x is None else f"{x:.3e}"


def table(rows: list[list[str]], header: list[str]) -> str:
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    return "\n".join(lines) + "\n"


def to_table(report: ResidualReport) -> str:
    rows = []
    for c in report.checks:
        rows.append([c.status.upper(), c.id, _fmt(c.residual), f"{c.tolerance:.0e}",
                     ">" if c.mode == "witness" else "<=", c.error or ""])
    head = (f"metric {report.metric}  dim {report.dim}  seed {report.seed}  "
            f"points {report.n_points}\n")
    s = report.summary
    tail = (f"\n{s['pass']} passed, {s['fail']} failed, {s['error']} errored, "
            f"{s['skipped']} skipped of {s['total']}\n")
    return head + table(rows, ["status", "check", "residual", "tol", "need", "error"]) + tail
