"""Deterministic report writers: JSON with fixed key order and CSV, 17 significant digits."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field as dc_field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

__all__ = ["Check", "Report", "fmt_float", "dumps", "write_csv", "write_report"]


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _enc(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        s = fmt_float(obj)
        # non-finite values are not JSON numbers
        return '"%s"' % s if s in ("nan", "inf", "-inf") else s
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _enc(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_enc(str(k), indent, level + 1)}: {_enc(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating, bool, type(None))) for v in obj):
            return "[" + ", ".join(_enc(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _enc(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with insertion-ordered keys and ``%.17g`` floats."""
    return _enc(obj, indent, 0) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    s = str(v)
    if any(c in s for c in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def write_csv(path, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


@dataclass
class Check:
    name: str
    value: Optional[float]
    tolerance: Optional[float]
    passed: bool
    detail: str = ""

    def as_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "value": self.value,
            "tolerance": self.tolerance,
            "passed": bool(self.passed),
            "detail": self.detail,
        }


@dataclass
class Report:
    command: str
    spec: Dict[str, Any]
    checks: List[Check] = dc_field(default_factory=list)
    results: Dict[str, Any] = dc_field(default_factory=dict)
    columns: List[str] = dc_field(default_factory=list)
    rows: List[List[Any]] = dc_field(default_factory=list)
    wall_time: Optional[float] = None

    def check(self, name: str, value, tolerance, passed: bool, detail: str = "") -> Check:
        c = Check(name, None if value is None else float(value), None if tolerance is None else float(tolerance), bool(passed), detail)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> Dict[str, Any]:
        d = {
            "command": self.command,
            "spec": self.spec,
            "summary": {
                "passed": self.passed,
                "checks": len(self.checks),
                "failed": sum(not c.passed for c in self.checks),
            },
            "checks": [c.as_dict() for c in self.checks],
            "results": self.results,
            "data_columns": self.columns,
        }
        if self.wall_time is not None:
            d["wall_time"] = self.wall_time
        return d


def write_report(report: Report, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(report.as_dict()))
    write_csv(os.path.join(out_dir, "data.csv"), report.columns, report.rows)
