"""Deterministic report rendering: JSON, CSV and aligned text."""

from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Any

SIG_DIGITS = 9


@dataclass(frozen=True)
class Money:
    value: float

    @property
    def cents(self) -> int:
        q = Decimal(repr(float(self.value))).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN)
        return int(q * 100)

    def text(self) -> str:
        c = self.cents
        sign = "-" if c < 0 else ""
        return f"{sign}${abs(c) // 100:,}.{abs(c) % 100:02d}"


@dataclass
class Report:
    command: str
    summary: dict[str, Any] = field(default_factory=dict)
    tables: dict[str, list[dict[str, Any]]] = field(default_factory=dict)
    meta: dict[str, Any] = field(default_factory=dict)


def config_hash(payload: str) -> str:
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def _round(x: float):
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(format(x, f".{SIG_DIGITS}g"))


def _machine(value):
    if isinstance(value, Money):
        return value.cents
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return _round(value)
    if isinstance(value, dict):
        return _machine_dict(value)
    if isinstance(value, (list, tuple)):
        return [_machine(v) for v in value]
    if hasattr(value, "item"):  # numpy scalar
        return _machine(value.item())
    return str(value)


def _key(k: str, v) -> str:
    return f"{k}_cents" if isinstance(v, Money) else k


def _machine_dict(d: dict) -> dict:
    return {_key(k, v): _machine(v) for k, v in d.items()}


def to_json(report: Report) -> str:
    doc = dict(report.meta)
    doc["command"] = report.command
    doc["summary"] = _machine_dict(report.summary)
    doc["tables"] = {name: [_machine_dict(r) for r in rows] for name, rows in report.tables.items()}
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, list):
        return ";".join(str(_cell(x)) for x in v)
    return v


def to_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    buf.write("# summary\n")
    w.writerow(["key", "value"])
    for k, v in sorted(_machine_dict(report.summary).items()):
        w.writerow([k, _cell(v)])
    for name, rows in sorted(report.tables.items()):
        buf.write(f"\n# {name}\n")
        if not rows:
            continue
        w.writerow([_key(k, v) for k, v in rows[0].items()])
        for r in rows:
            w.writerow([_cell(_machine(x)) for x in r.values()])
    return buf.getvalue()


def _text(value) -> str:
    if isinstance(value, Money):
        return value.text()
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, float):
        r = _round(value)
        return "nan" if r is None else (r if isinstance(r, str) else f"{r:.{SIG_DIGITS}g}")
    if value is None:
        return "-"
    if isinstance(value, (list, tuple)):
        return ",".join(_text(v) for v in value) or "-"
    if hasattr(value, "item"):
        return _text(value.item())
    return str(value)


def to_text(report: Report) -> str:
    out = [f"{report.command}"]
    for k in ("tool_version", "seed", "config_hash"):
        if k in report.meta:
            out.append(f"  {k}: {report.meta[k]}")
    for k, v in report.summary.items():
        out.append(f"  {k}: {_text(v)}")
    for name, rows in report.tables.items():
        out.append("")
        out.append(f"[{name}]")
        if not rows:
            out.append("  (empty)")
            continue
        cols = list(rows[0].keys())
        cells = [[_text(r.get(c)) for c in cols] for r in rows]
        widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
        out.append("  ".join(c.rjust(w) for c, w in zip(cols, widths)))
        for row in cells:
            out.append("  ".join(v.rjust(w) for v, w in zip(row, widths)))
    return "\n".join(out) + "\n"


RENDERERS = {"json": to_json, "csv": to_csv, "text": to_text}
