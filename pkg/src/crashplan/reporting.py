"""Serialization of solver results: front CSV files and metadata sidecars.

Front CSV layout (documented column order):
  comment header lines:  # instance_hash=..., # algorithm=..., # seed=...
  header row:            solution,npv_cost,makespan,productivity,valid_number
  one row per solution;  floats carry 12 significant digits; the solution
  column is "activity|mode|duration" triples joined by ":" in order-string
  sequence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError
from .evaluate import ObjectiveVector, format_solution, parse_solution
from .pareto import Front, FrontMember

TOOL_VERSION = "0.1.0"


def fmt_float(x: float) -> str:
    return format(x, ".12g")


@dataclass(frozen=True)
class FrontReport:
    """A Pareto front plus the run metadata needed to reproduce it."""

    front: Front
    algorithm: str
    seed: int
    instance_hash: str
    params: dict = field(default_factory=dict)
    evaluations: int = 0
    wall_ms: float = field(default=0.0, compare=False)


def front_to_csv(report: FrontReport, path: str | Path) -> None:
    lines = [
        f"# instance_hash={report.instance_hash}",
        f"# algorithm={report.algorithm}",
        f"# seed={report.seed}",
        "solution,npv_cost,makespan,productivity,valid_number",
    ]
    for m in report.front.members:
        sol = format_solution(m.chromosome) if m.chromosome else ""
        o = m.objectives
        lines.append(f"{sol},{fmt_float(o.npv_cost)},{o.makespan},"
                     f"{fmt_float(o.productivity)},3")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def front_from_csv(path: str | Path) -> tuple[Front, dict]:
    """Read a front CSV back; returns the front and its header metadata."""
    meta: dict[str, str] = {}
    members: list[FrontMember] = []
    header_seen = False
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line.lstrip("# ").partition("=")
            meta[key.strip()] = value.strip()
            continue
        if not header_seen:
            if line != "solution,npv_cost,makespan,productivity,valid_number":
                raise ParseError(f"line {lineno}: unexpected header {line!r}")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise ParseError(f"line {lineno}: expected 5 columns, got {len(parts)}")
        sol, npv, makespan, prod, _valid = parts
        try:
            obj = ObjectiveVector(float(npv), int(makespan), float(prod))
        except ValueError as exc:
            raise ParseError(f"line {lineno}: bad number ({exc})") from exc
        chroms = (parse_solution(sol),) if sol else ()
        members.append(FrontMember(obj, chroms))
    if not header_seen:
        raise ParseError("missing column header row")
    return Front(tuple(members)), meta


def write_sidecar(out_path: str | Path, payload: dict) -> Path:
    """Write `<out>.meta.json` next to a primary output file."""
    side = Path(str(out_path) + ".meta.json")
    payload = {"tool_version": TOOL_VERSION, **payload}
    side.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return side
