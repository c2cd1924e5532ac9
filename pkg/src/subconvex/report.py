"""Result records and deterministic CSV/JSON emission."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import PreconditionError

SIG_DIGITS = 12


@dataclass(frozen=True)
class IdentityCheck:
    """Two evaluations of one identity.

    ``truncation_bound`` is absolute (same units as lhs/rhs): the summed
    absolute value of the next block of dropped dual terms. The check passes
    when the relative error is at most ``tolerance`` plus that bound taken
    relative to the same scale.
    """

    lhs: complex
    rhs: complex
    truncation_bound: float
    tolerance: float
    anchor: str
    params: dict[str, Any] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def scale(self) -> float:
        return max(abs(self.lhs), abs(self.rhs), 1e-30)

    @property
    def rel_error(self) -> float:
        return abs(self.lhs - self.rhs) / self.scale

    @property
    def passed(self) -> bool:
        return self.rel_error <= self.tolerance + self.truncation_bound / self.scale

    def as_record(self) -> dict[str, Any]:
        rec = {"anchor": self.anchor}
        rec.update(self.params)
        rec.update({
            "re_lhs": self.lhs.real, "im_lhs": self.lhs.imag,
            "re_rhs": self.rhs.real, "im_rhs": self.rhs.imag,
            "rel_error": self.rel_error, "truncation_bound": self.truncation_bound,
            "tolerance": self.tolerance, "passed": self.passed,
        })
        rec.update(self.extra)
        return rec


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return format(v, f".{SIG_DIGITS}g")
    if isinstance(v, complex):
        return f"{format_value(v.real)}{'+' if v.imag >= 0 else '-'}{format_value(abs(v.imag))}j"
    return str(v)


def _json_value(v):
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, float):
        return float(format_value(v)) if math.isfinite(v) else str(v)
    if isinstance(v, complex):
        return [_json_value(v.real), _json_value(v.imag)]
    if hasattr(v, "item"):
        return _json_value(v.item())
    return str(v)


def _columns(records: list[dict]) -> list[str]:
    cols: list[str] = []
    seen = set()
    for rec in records:
        for key in rec:
            if key not in seen:
                seen.add(key)
                cols.append(key)
    return cols


def render(records: list[dict], fmt: str) -> str:
    if not records:
        raise PreconditionError("refusing to write an empty report")
    records = [{k: (v.item() if hasattr(v, "item") else v) for k, v in r.items()} for r in records]
    if fmt == "csv":
        cols = _columns(records)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for rec in records:
            writer.writerow([format_value(rec[c]) if c in rec else "" for c in cols])
        return buf.getvalue()
    if fmt == "json":
        out = [{k: _json_value(v) for k, v in rec.items()} for rec in records]
        return json.dumps(out, indent=1) + "\n"
    raise PreconditionError(f"unknown report format {fmt!r}")


def emit_report(records: list[dict], fmt: str, path) -> Path:
    """Write records as CSV (union of keys, first-seen order) or JSON."""
    text = render(records, fmt)
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path
