"""Tabular (CSV) and certificate (JSON) report writers."""
from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

COLUMNS = ("command", "cell", "n", "weight", "D", "symbol", "residual", "value",
           "exactness", "threshold", "status", "exploratory", "basis_size", "message")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.9e}"
    return str(x)


@dataclass
class ReportRow:
    command: str
    cell: int
    n: int
    weight: str
    D: int | str
    symbol: str
    residual: str
    value: float | None
    exactness: str
    threshold: float | None
    status: str = ""
    exploratory: bool = False
    basis_size: int | None = None
    wall_ms: float | None = None
    message: str = ""

    def __post_init__(self):
        if self.value is not None and self.value < 0:
            raise ValueError("residual values are non-negative")
        if not self.status:
            if self.value is None:
                self.status = "ERROR"
            elif self.threshold is None:
                self.status = "INFO"  # measured, nothing to compare against
            else:
                self.status = "PASS" if self.value <= self.threshold else "FAIL"

    @property
    def passed(self) -> bool:
        return self.status == "PASS"


def render_csv(rows: Iterable[ReportRow], comments: Sequence[str] = (),
               timings: bool = False) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    cols = COLUMNS + (("wall_ms",) if timings else ())
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([fmt(getattr(r, c)) if c != "wall_ms" else f"{r.wall_ms or 0.0:.1f}"
                    for c in cols])
    return buf.getvalue()


def header_comments(command: str, digest: str, seed: int) -> list[str]:
    return [f"generated {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}",
            f"ballop {command}; config sha256 {digest}; seed {seed}; norm spectral"]


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def write_json(path: Path, payload) -> None:
    write_text(path, json.dumps(payload, indent=2, sort_keys=True, default=_default) + "\n")


def _default(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if hasattr(x, "tolist"):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x)}")
