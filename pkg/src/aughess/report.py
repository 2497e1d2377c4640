"""Line-oriented text reports with embedded machine-readable CSV blocks."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Dict, List, Sequence


@dataclass
class Report:
    """Builder for report.txt: header metadata, prose lines, CSV blocks.

    Every pass/fail line carries the tolerance that produced it. Content is
    deterministic given config and sampler seed; the single timestamp line is
    marked so consumers can strip it when comparing runs.
    """

    title: str
    metadata: Dict[str, str] = field(default_factory=dict)
    _lines: List[str] = field(default_factory=list)

    def line(self, text: str = "") -> None:
        self._lines.append(text)

    def verdict_line(self, label: str, passed: bool, worst: float,
                     tolerance: float, extra: str = "") -> None:
        status = "PASS" if passed else "FAIL"
        tail = f"  {extra}" if extra else ""
        self._lines.append(
            f"{label}: {status}  worst={worst:.6e}  tolerance={tolerance:.6e}{tail}")

    def csv_block(self, name: str, header: Sequence[str],
                  rows: Sequence[Sequence[object]]) -> None:
        self._lines.append(f"-- csv: {name} --")
        self._lines.append(",".join(header))
        for row in rows:
            self._lines.append(",".join(_cell(v) for v in row))
        self._lines.append("-- end csv --")

    def render(self) -> str:
        out = io.StringIO()
        out.write(f"# {self.title}\n")
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        out.write(f"generated: {stamp}\n")
        for key in sorted(self.metadata):
            out.write(f"{key}: {self.metadata[key]}\n")
        out.write("\n")
        for line in self._lines:
            out.write(line + "\n")
        return out.getvalue()

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.render())


def _cell(v) -> str:
    if isinstance(v, bool):
        return "pass" if v else "fail"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def strip_volatile(text: str) -> str:
    """Drop the timestamp line; the remainder is deterministic per (config, seed)."""
    return "\n".join(l for l in text.splitlines() if not l.startswith("generated:"))


def write_fields_csv(path, grid, u, margins_by_node) -> None:
    """fields.csv: one row per node with x, y, u, |Du|, cone margin."""
    import numpy as np

    grad = grid.gradient(u)
    speed = np.linalg.norm(grad, axis=1)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,y,u,|Du|,margin\n")
        for i in range(grid.node_count):
            fh.write(f"{grid.nodes[i,0]:.12g},{grid.nodes[i,1]:.12g},"
                     f"{u[i]:.12g},{speed[i]:.12g},{margins_by_node[i]:.12g}\n")
