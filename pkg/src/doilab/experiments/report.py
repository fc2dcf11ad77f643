"""Tabular experiment output: one CSV row per trial plus a JSON summary."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

SCHEMA_VERSION = 1


def _clean(v: Any) -> Any:
    """JSON-safe, deterministic scalar conversion (infinities become strings)."""
    if isinstance(v, (np.floating, float)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_clean(x) for x in v]
    return v


@dataclass
class ExperimentReport:
    name: str
    params: dict
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def column(self, key: str) -> np.ndarray:
        return np.array([float(r[key]) if r.get(key) is not None else math.nan for r in self.rows])

    def summarize(self, ratio_key: str = "ratio", extra: dict | None = None) -> dict:
        r = self.column(ratio_key) if self.rows else np.zeros(0)
        finite = r[np.isfinite(r)]
        self.summary = {
            "trials": len(self.rows),
            "finite": int(finite.size),
            "max_ratio": float(finite.max()) if finite.size else math.nan,
            "median_ratio": float(np.median(finite)) if finite.size else math.nan,
            **(extra or {}),
        }
        return self.summary

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.columns, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                        for k, v in row.items()})
        return buf.getvalue()

    def json_text(self) -> str:
        payload = {"schema_version": SCHEMA_VERSION, "name": self.name, "params": self.params,
                   "columns": self.columns, "summary": self.summary}
        return json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n"

    def write(self, outdir: str | Path, stem: str | None = None) -> tuple[Path, Path]:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        stem = stem or self.name
        csv_path, json_path = outdir / f"{stem}.csv", outdir / f"{stem}.json"
        csv_path.write_text(self.csv_text())
        json_path.write_text(self.json_text())
        return csv_path, json_path
