"""Report documents and their json / csv / text renderings.

A document is deterministic for fixed inputs except for its ``timing`` block,
which is the only place run-dependent values (elapsed time, thread count) go.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any

from . import __version__
from .sbox import SBox

SCHEMA_VERSION = 1


@dataclass
class Check:
    """One reproduced claim: the published value next to the computed one."""

    name: str
    description: str
    published: Any
    computed: Any
    passed: bool | None = None

    def __post_init__(self) -> None:
        if self.passed is None:
            self.passed = self.published == self.computed

    def as_dict(self) -> dict:
        return {"check": self.name, "description": self.description, "published": self.published,
                "computed": self.computed, "status": "pass" if self.passed else "MISMATCH"}


@dataclass
class ReportDocument:
    command: str
    arguments: dict
    sbox: SBox
    results: dict
    columns: list[str] = field(default_factory=list)
    rows: list[list] = field(default_factory=list)
    truncated: bool = False
    checks: list[Check] = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self, with_timing: bool = True) -> dict:
        doc = {
            "schema": SCHEMA_VERSION,
            "tool": f"sboxminer {__version__}",
            "command": self.command,
            "arguments": self.arguments,
            "sbox": {
                "name": self.sbox.name,
                "n_in": self.sbox.n_in,
                "n_out": self.sbox.n_out,
                "permutation": self.sbox.is_permutation,
                "sha256": self.sbox.digest,
            },
            "results": self.results,
            "truncated": self.truncated,
            "checks": [c.as_dict() for c in self.checks],
        }
        if with_timing:
            doc["timing"] = self.timing
        return doc


def render_json(doc: ReportDocument) -> str:
    return json.dumps(doc.as_dict(), indent=2, sort_keys=False) + "\n"


def render_csv(doc: ReportDocument) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if doc.checks and not doc.rows:
        writer.writerow(["check", "published", "computed", "status"])
        for c in doc.checks:
            d = c.as_dict()
            writer.writerow([d["check"], _cell(d["published"]), _cell(d["computed"]), d["status"]])
        return buf.getvalue()
    writer.writerow(doc.columns)
    for row in doc.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return " ".join(str(v) for v in value)
    if value is None:
        return ""
    return str(value)


def render_text(doc: ReportDocument) -> str:
    lines = [f"# sboxminer {doc.command}",
             f"# table: {doc.sbox.name} ({doc.sbox.n_in}->{doc.sbox.n_out}, "
             f"sha256 {doc.sbox.digest[:16]})"]
    for key, value in doc.arguments.items():
        lines.append(f"# {key}: {_cell(value)}")
    for key, value in doc.results.items():
        if not isinstance(value, (list, dict)):
            lines.append(f"{key}: {_cell(value)}")
    if doc.rows:
        widths = [len(c) for c in doc.columns]
        cells = [[_cell(v) for v in row] for row in doc.rows]
        for row in cells:
            widths = [max(w, len(v)) for w, v in zip(widths, row)]
        lines.append("  ".join(c.ljust(w) for c, w in zip(doc.columns, widths)).rstrip())
        for row in cells:
            lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    if doc.truncated:
        lines.append("(truncated at result limit)")
    if doc.checks:
        name_w = max(len(c.name) for c in doc.checks)
        lines.append("")
        lines.append(f"{'check'.ljust(name_w)}  {'published':>10}  {'computed':>10}  status")
        for c in doc.checks:
            d = c.as_dict()
            lines.append(f"{c.name.ljust(name_w)}  {_cell(d['published']):>10}  "
                         f"{_cell(d['computed']):>10}  {d['status']}")
        failed = [c for c in doc.checks if not c.passed]
        lines.append(f"{len(doc.checks) - len(failed)}/{len(doc.checks)} checks pass")
    return "\n".join(lines) + "\n"


RENDERERS = {"json": render_json, "csv": render_csv, "text": render_text}
