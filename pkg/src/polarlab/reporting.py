"""Study reports: deterministic CSV tables plus JSON run manifests.

Rows are written with repr-faithful float formatting and a fixed column
order, so a rerun with identical configuration and seed produces
byte-identical files.  Files are written atomically (temp file + rename).
"""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile
from typing import Any

__all__ = ["StudyReport", "write_text_atomic"]


def _fmt(x: Any) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_text_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclasses.dataclass
class StudyReport:
    """Tabular study output: swept parameters, per-row measurements, metadata."""

    name: str
    params: dict
    rows: list[dict]
    meta: dict = dataclasses.field(default_factory=dict)

    @property
    def columns(self) -> list[str]:
        cols: list[str] = []
        for row in self.rows:
            for k in row:
                if k not in cols:
                    cols.append(k)
        return cols

    def to_csv(self) -> str:
        cols = self.columns
        lines = [",".join(cols)]
        for row in self.rows:
            lines.append(",".join(_fmt(row.get(c, "")) for c in cols))
        return "\n".join(lines) + "\n"

    def write(self, out_dir: str, *, stem: str | None = None) -> dict:
        """Write ``<stem>.csv`` plus ``<stem>.manifest.json``; returns paths."""
        stem = stem or self.name
        csv_path = os.path.join(out_dir, f"{stem}.csv")
        man_path = os.path.join(out_dir, f"{stem}.manifest.json")
        write_text_atomic(csv_path, self.to_csv())
        manifest = {
            "study": self.name,
            "parameters": self.params,
            "meta": self.meta,
            "results_path": os.path.basename(csv_path),
            "columns": self.columns,
            "n_rows": len(self.rows),
        }
        write_text_atomic(man_path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return {"csv": csv_path, "manifest": man_path}

    def write_dat(self, out_dir: str, x: str, y: str, *, stem: str | None = None) -> str:
        """Two-column whitespace table (plot-tool friendly) for one pair of columns."""
        stem = stem or f"{self.name}_{x}_{y}"
        path = os.path.join(out_dir, f"{stem}.dat")
        lines = [f"# {x} {y}"] + [f"{_fmt(r[x])} {_fmt(r[y])}" for r in self.rows if x in r and y in r]
        write_text_atomic(path, "\n".join(lines) + "\n")
        return path
