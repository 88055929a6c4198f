"""JSON and CSV emission for run reports, fronts, sweeps and summaries."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

from .errors import ParseError
from .labor import PHASES, AutomationVector, LaborBreakdown, TippingReport
from .nsga import ConstraintStatus, Genome, Individual, ObjectiveVector, RunReport
from .sweep import CSV_COLUMNS as SWEEP_COLUMNS
from .sweep import SweepCell

FRONT_COLUMNS = tuple(f"f_{p.short}" for p in PHASES) + ("team_size", "cost", "quality", "feasible")


def dumps(payload: Any) -> str:
    """Stable JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


# --- run reports -----------------------------------------------------------


def tipping_to_dict(report: TippingReport) -> dict:
    return {
        "fte_absorbed": report.fte_absorbed,
        "tipping_reached": report.tipping_reached,
        "max_safe_reduction": report.max_safe_reduction,
        "stable_reduction": report.stable_reduction,
        "per_person_load_after": report.per_person_load_after,
    }


def tipping_from_dict(data: dict) -> TippingReport:
    return TippingReport(**data)


def individual_to_dict(ind: Individual) -> dict:
    c = ind.constraints
    return {
        "automation": ind.genome.automation.as_dict(),
        "team_size": ind.genome.team_size,
        "cost": ind.objectives.cost,
        "quality": ind.objectives.quality,
        "feasible": ind.feasible,
        "constraints": {
            "capacity_violation": c.capacity_violation,
            "quality_violation": c.quality_violation,
            "tipping_violation": c.tipping_violation,
            "total_violation": c.total_violation,
        },
        "rank": ind.rank,
        # JSON has no infinity; boundary crowding is written as null
        "crowding": None if math.isinf(ind.crowding) else ind.crowding,
    }


def individual_from_dict(data: dict) -> Individual:
    genome = Genome(AutomationVector.from_mapping(data["automation"]), data["team_size"])
    crowding = data["crowding"]
    return Individual(
        genome=genome,
        objectives=ObjectiveVector(data["cost"], data["quality"]),
        constraints=ConstraintStatus(**data["constraints"]),
        rank=data["rank"],
        crowding=math.inf if crowding is None else crowding,
    )


def run_report_to_dict(report: RunReport) -> dict:
    return {
        "digest": report.digest,
        "seed": report.seed,
        "front": [individual_to_dict(ind) for ind in report.front],
        "best": individual_to_dict(report.best) if report.best is not None else None,
        "tipping": tipping_to_dict(report.tipping) if report.tipping is not None else None,
        "hv": report.hv,
        "generations_trace": list(report.generations_trace),
        "wall_time": report.wall_time,
    }


def run_report_from_dict(data: dict) -> RunReport:
    return RunReport(
        seed=data["seed"],
        front=[individual_from_dict(d) for d in data["front"]],
        best=individual_from_dict(data["best"]) if data["best"] is not None else None,
        tipping=tipping_from_dict(data["tipping"]) if data["tipping"] is not None else None,
        hv=data["hv"],
        generations_trace=list(data["generations_trace"]),
        digest=data["digest"],
        wall_time=data["wall_time"],
    )


def serialize_run_report(report: RunReport) -> str:
    return dumps(run_report_to_dict(report))


def parse_run_report(text: str) -> RunReport:
    return run_report_from_dict(json.loads(text))


def breakdown_to_dict(breakdown: LaborBreakdown) -> dict:
    return {
        "human_hours": {p.value: breakdown.human_hours[p] for p in PHASES},
        "oversight_hours": {p.value: breakdown.oversight_hours[p] for p in PHASES},
        "coord_hours_residual": breakdown.coord_hours_residual,
        "total_hours": breakdown.total_hours,
        "cost": breakdown.cost,
        "labor_saved": breakdown.labor_saved,
        "automation_fraction": breakdown.automation_fraction,
    }


# --- CSV -------------------------------------------------------------------


def _csv_text(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def front_csv(front: Sequence[Individual]) -> str:
    rows = []
    for ind in front:
        rows.append(
            [_fmt(x) for x in ind.genome.automation.fractions]
            + [_fmt(ind.genome.team_size), _fmt(ind.objectives.cost), _fmt(ind.objectives.quality), _fmt(ind.feasible)]
        )
    return _csv_text(FRONT_COLUMNS, rows)


def sweep_csv(cells: Sequence[SweepCell]) -> str:
    rows = [[_fmt(getattr(cell, col)) for col in SWEEP_COLUMNS] for cell in cells]
    return _csv_text(SWEEP_COLUMNS, rows)


def read_front_points(path: str | Path) -> list[tuple[float, float]]:
    """(cost, quality) pairs from a front CSV; rows flagged infeasible are skipped."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    reader = csv.DictReader(io.StringIO(text))
    fields = reader.fieldnames or []
    for required in ("cost", "quality"):
        if required not in fields:
            raise ParseError(f"missing column {required!r}", str(path), 1, 1)
    points = []
    for row in reader:
        line = reader.line_num
        if None in row or any(v is None for v in row.values()):
            raise ParseError("row has the wrong number of fields", str(path), line, 1)
        feasible = row.get("feasible", "true").strip().lower()
        if feasible not in ("true", "false", "1", "0"):
            raise ParseError(f"bad feasible flag {row['feasible']!r}", str(path), line, 1)
        try:
            cost, quality = float(row["cost"]), float(row["quality"])
        except ValueError:
            raise ParseError("cost and quality must be numbers", str(path), line, 1) from None
        if not (math.isfinite(cost) and math.isfinite(quality)):
            raise ParseError("cost and quality must be finite", str(path), line, 1)
        if feasible in ("true", "1"):
            points.append((cost, quality))
    return points
