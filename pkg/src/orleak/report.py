"""Report rows and their CSV / JSON rendering.

Floats are printed with six decimals so repeated runs diff cleanly;
comparisons elsewhere use the full precision.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, fields

TOL = 1e-9
FORMATS = ("csv", "json")


@dataclass
class LeakageRow:
    graph: str
    algo: str
    mode: str
    F: str = ""
    p: float | None = None
    k: int | None = None
    value_bits: float = 0.0
    method: str = "exact"
    samples: int = 0
    stderr: float = 0.0
    tape_bits: int = 0


@dataclass
class BoundRow:
    theorem: str
    params: str
    bound_bits: float | None
    measured_bits: float | None = None
    hypothesis_ok: bool = True
    note: str = ""

    @property
    def margin(self) -> float | None:
        if self.measured_bits is None or self.bound_bits is None:
            return None
        return self.measured_bits - self.bound_bits

    @property
    def ok(self) -> bool:
        """A bound can only fail when its hypothesis holds and it was measured."""
        m = self.margin
        return m is None or not self.hypothesis_ok or m >= -TOL

    def as_dict(self) -> dict:
        d = asdict(self)
        d["margin"] = self.margin
        return {k: d[k] for k in ("theorem", "params", "bound_bits", "measured_bits",
                                  "margin", "hypothesis_ok", "note")}


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.6f}"
    return x


def _json_value(x):
    if isinstance(x, float):
        return round(x, 6) + 0.0
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    return x


def _as_dict(row) -> dict:
    if hasattr(row, "as_dict"):
        return row.as_dict()
    if hasattr(row, "__dataclass_fields__"):
        return {f.name: getattr(row, f.name) for f in fields(row)}
    return dict(row)


def render(rows, fmt: str = "csv", header: list[str] | None = None) -> str:
    """Render dataclass rows or plain dicts; ``header`` pins the column order."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    dicts = [_as_dict(r) for r in rows]
    if fmt == "json":
        return json.dumps([_json_value(d) for d in dicts], indent=2) + "\n"
    if header is None:
        header = list(dicts[0]) if dicts else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for d in dicts:
        w.writerow([_cell(d.get(h)) for h in header])
    return buf.getvalue()


LEAKAGE_HEADER = [f.name for f in fields(LeakageRow)]
BOUND_HEADER = ["theorem", "params", "bound_bits", "measured_bits", "margin", "hypothesis_ok", "note"]
