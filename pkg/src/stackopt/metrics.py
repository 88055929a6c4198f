"""Front quality indicators and multi-run statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EmptyInput, NonpositiveBase


@dataclass(frozen=True)
class NormalizedPoint:
    """A front point where both coordinates are minimized.

    ``u`` is cost over baseline cost, ``v`` is one minus the (clamped) quality ratio.
    """

    u: float
    v: float


DEFAULT_REF = NormalizedPoint(1.1, 1.0)


def normalize_front(front: Iterable[tuple[float, float]], c_base: float) -> list[NormalizedPoint]:
    if not c_base > 0:
        raise NonpositiveBase(f"baseline cost must be > 0, got {c_base}")
    points = []
    for cost, quality in front:
        q = min(max(quality, 0.0), 1.0)
        points.append(NormalizedPoint(cost / c_base, 1.0 - q))
    return points


def _nondominated(points: Sequence[NormalizedPoint]) -> list[NormalizedPoint]:
    """Staircase of mutually non-dominated points, sorted by ``u`` ascending."""
    ordered = sorted(set((p.u, p.v) for p in points))
    stair: list[NormalizedPoint] = []
    best_v = math.inf
    for u, v in ordered:
        if v < best_v:
            stair.append(NormalizedPoint(u, v))
            best_v = v
    return stair


def hypervolume_2d(points: Sequence[NormalizedPoint], ref: NormalizedPoint = DEFAULT_REF, normalize: bool = True) -> float:
    """Area dominated by ``points`` inside the box ``[0, ref.u] x [0, ref.v]``.

    With ``normalize`` the area is divided by the box area so the result lies in [0, 1].
    """
    inside = [p for p in points if p.u < ref.u and p.v < ref.v]
    stair = _nondominated(inside)
    area = 0.0
    for i, p in enumerate(stair):
        u_next = stair[i + 1].u if i + 1 < len(stair) else ref.u
        area += (u_next - p.u) * (ref.v - p.v)
    if normalize:
        area /= ref.u * ref.v
    return area


@dataclass(frozen=True)
class MultiRunSummary:
    values: tuple[float, ...]
    mean: float
    std: float
    min: float
    max: float

    def as_dict(self) -> dict:
        return {
            "values": list(self.values),
            "mean": self.mean,
            "std": self.std,
            "min": self.min,
            "max": self.max,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MultiRunSummary":
        return cls(tuple(data["values"]), data["mean"], data["std"], data["min"], data["max"])


def summarize(values: Iterable[float]) -> MultiRunSummary:
    vals = tuple(float(v) for v in values)
    if not vals:
        raise EmptyInput("cannot summarize an empty list")
    mean = math.fsum(vals) / len(vals)
    var = math.fsum((v - mean) ** 2 for v in vals) / len(vals)
    # clamp keeps min <= mean <= max under rounding when all values are equal
    mean = min(max(mean, min(vals)), max(vals))
    return MultiRunSummary(vals, mean, math.sqrt(var), min(vals), max(vals))


def relative_gap(reference_cost: float, candidate_cost: float) -> float:
    """Fractional saving of ``candidate_cost`` relative to ``reference_cost``."""
    if reference_cost == 0:
        raise NonpositiveBase("reference cost is zero")
    return (reference_cost - candidate_cost) / reference_cost
