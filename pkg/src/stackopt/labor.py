"""SDLC labor model: baseline and AI-collapsed hours, cost, quality and tipping points.

Everything here is a pure function of its inputs. Hours are person-hours,
costs are plain currency units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Mapping

from .errors import DegenerateDenominator, InvalidParameter


class Phase(str, Enum):
    REQUIREMENTS = "requirements"
    DESIGN = "design"
    DEVELOPMENT = "development"
    TESTING = "testing"
    DEPLOYMENT = "deployment"
    MAINTENANCE = "maintenance"

    @property
    def short(self) -> str:
        return _SHORT_NAMES[self]

    @classmethod
    def parse(cls, name: str) -> "Phase":
        """Accept either the full phase name or its short CSV form (``dev``, ``test``...)."""
        try:
            return cls(name)
        except ValueError:
            pass
        for phase, short in _SHORT_NAMES.items():
            if short == name:
                return phase
        raise ValueError(f"unknown phase {name!r}")


PHASES: tuple[Phase, ...] = tuple(Phase)

_SHORT_NAMES = {
    Phase.REQUIREMENTS: "req",
    Phase.DESIGN: "design",
    Phase.DEVELOPMENT: "dev",
    Phase.TESTING: "test",
    Phase.DEPLOYMENT: "deploy",
    Phase.MAINTENANCE: "maint",
}


def _phase_map(values: Mapping[Phase | str, float] | None, default: float | None, what: str) -> dict[Phase, float]:
    values = dict(values or {})
    out: dict[Phase, float] = {}
    for key, value in values.items():
        try:
            phase = key if isinstance(key, Phase) else Phase.parse(key)
        except ValueError as exc:
            raise InvalidParameter(f"{what}: {exc}") from None
        out[phase] = float(value)
    missing = [p for p in PHASES if p not in out]
    if missing:
        if default is None:
            raise InvalidParameter(f"{what}: missing phases {[p.value for p in missing]}")
        for p in missing:
            out[p] = default
    return {p: out[p] for p in PHASES}


@dataclass(frozen=True)
class ScenarioParams:
    """Project scenario plus the oversight/coordination model coefficients.

    ``phase_hours`` and ``ai_time_factor`` accept any mapping keyed by
    :class:`Phase` (or phase names); missing phases in ``phase_hours`` count as
    zero hours and missing AI time factors default to 1.0.
    """

    phase_hours: Mapping[Phase, float]
    coord_hours: float
    team_size: int
    capacity_hours: float
    cost_rate: float
    oversight_factor: float = 0.20
    coord_retention: float = 0.40
    ai_time_factor: Mapping[Phase, float] = field(default_factory=dict)
    stated_base_hours: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "phase_hours", _phase_map(self.phase_hours, 0.0, "phase_hours"))
        object.__setattr__(self, "ai_time_factor", _phase_map(self.ai_time_factor, 1.0, "ai_time_factor"))
        for phase, hours in self.phase_hours.items():
            if not (hours >= 0 and math.isfinite(hours)):
                raise InvalidParameter(f"phase_hours[{phase.value}] must be a finite value >= 0, got {hours}")
        if not (self.coord_hours >= 0 and math.isfinite(self.coord_hours)):
            raise InvalidParameter(f"coord_hours must be a finite value >= 0, got {self.coord_hours}")
        if isinstance(self.team_size, bool) or int(self.team_size) != self.team_size or self.team_size < 1:
            raise InvalidParameter(f"team_size must be an integer >= 1, got {self.team_size}")
        object.__setattr__(self, "team_size", int(self.team_size))
        if not (self.capacity_hours > 0 and math.isfinite(self.capacity_hours)):
            raise InvalidParameter(f"capacity_hours must be > 0, got {self.capacity_hours}")
        if not (self.cost_rate >= 0 and math.isfinite(self.cost_rate)):
            raise InvalidParameter(f"cost_rate must be >= 0, got {self.cost_rate}")
        for name in ("oversight_factor", "coord_retention"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidParameter(f"{name} must lie in [0, 1], got {value}")
        for phase, mult in self.ai_time_factor.items():
            if not (mult > 0 and math.isfinite(mult)):
                raise InvalidParameter(f"ai_time_factor[{phase.value}] must be > 0, got {mult}")
        if self.stated_base_hours is not None and not self.stated_base_hours > 0:
            raise InvalidParameter(f"stated_base_hours must be > 0 when set, got {self.stated_base_hours}")

    def with_model(self, oversight_factor: float | None = None, coord_retention: float | None = None) -> "ScenarioParams":
        changes = {}
        if oversight_factor is not None:
            changes["oversight_factor"] = oversight_factor
        if coord_retention is not None:
            changes["coord_retention"] = coord_retention
        return replace(self, **changes)

    def ai_hours(self, phase: Phase) -> float:
        """AI execution time for ``phase`` in equivalent human hours."""
        return self.ai_time_factor[phase] * self.phase_hours[phase]


@dataclass(frozen=True)
class AutomationVector:
    """Per-phase automation fractions, stored in :data:`PHASES` order."""

    fractions: tuple[float, ...]

    def __post_init__(self) -> None:
        fractions = tuple(float(x) for x in self.fractions)
        if len(fractions) != len(PHASES):
            raise InvalidParameter(f"expected {len(PHASES)} fractions, got {len(fractions)}")
        for phase, value in zip(PHASES, fractions):
            if not 0.0 <= value <= 1.0:
                raise InvalidParameter(f"automation fraction for {phase.value} must lie in [0, 1], got {value}")
        object.__setattr__(self, "fractions", fractions)

    @classmethod
    def from_mapping(cls, values: Mapping[Phase | str, float], default: float = 0.0) -> "AutomationVector":
        resolved = _phase_map(values, default, "automation")
        return cls(tuple(resolved[p] for p in PHASES))

    @classmethod
    def uniform(cls, value: float) -> "AutomationVector":
        return cls((value,) * len(PHASES))

    def __getitem__(self, phase: Phase) -> float:
        return self.fractions[PHASES.index(phase)]

    def __iter__(self) -> Iterator[float]:
        return iter(self.fractions)

    def as_dict(self) -> dict[str, float]:
        return {p.value: f for p, f in zip(PHASES, self.fractions)}


@dataclass(frozen=True)
class LaborBreakdown:
    human_hours: Mapping[Phase, float]
    oversight_hours: Mapping[Phase, float]
    coord_hours_residual: float
    total_hours: float
    cost: float
    labor_saved: float
    automation_fraction: float

    def phase_hours_after(self, phase: Phase) -> float:
        """Human plus oversight hours still spent on ``phase``."""
        return self.human_hours[phase] + self.oversight_hours[phase]


@dataclass(frozen=True)
class TippingReport:
    fte_absorbed: float
    tipping_reached: bool
    max_safe_reduction: int
    stable_reduction: int
    per_person_load_after: float


def baseline_labor(params: ScenarioParams) -> float:
    """Raw baseline: every phase counted once, plus coordination overhead."""
    return math.fsum(params.phase_hours.values()) + params.coord_hours


def effective_base(params: ScenarioParams) -> float:
    if params.stated_base_hours is not None:
        return float(params.stated_base_hours)
    return baseline_labor(params)


def baseline_cost(params: ScenarioParams) -> float:
    return params.cost_rate * effective_base(params)


def baseline_load_per_person(params: ScenarioParams) -> float:
    return effective_base(params) / params.team_size


def collapsed_labor(params: ScenarioParams, f: AutomationVector) -> LaborBreakdown:
    beta = params.oversight_factor
    human = {}
    oversight = {}
    for phase, frac in zip(PHASES, f.fractions):
        human[phase] = (1.0 - frac) * params.phase_hours[phase]
        oversight[phase] = beta * frac * params.ai_hours(phase)
    # retention applies even with no automation at all; see README "Model notes"
    coord = params.coord_retention * params.coord_hours
    total = math.fsum(human.values()) + math.fsum(oversight.values()) + coord
    base = effective_base(params)
    saved = base - total
    return LaborBreakdown(
        human_hours=human,
        oversight_hours=oversight,
        coord_hours_residual=coord,
        total_hours=total,
        cost=params.cost_rate * total,
        labor_saved=saved,
        automation_fraction=saved / base if base > 0 else 0.0,
    )


def quality_ratio(params: ScenarioParams, f: AutomationVector, breakdown: LaborBreakdown | None = None) -> float:
    """Testing-to-development ratio of hours still carried by humans after automation."""
    if breakdown is None:
        breakdown = collapsed_labor(params, f)
    dev = breakdown.phase_hours_after(Phase.DEVELOPMENT)
    if dev <= 0.0:
        raise DegenerateDenominator("development hours after automation are zero")
    return breakdown.phase_hours_after(Phase.TESTING) / dev


def tipping_report(fraction: float, team_size: int, total_hours: float, base_hours: float) -> TippingReport:
    """Headcount reduction analysis for an overall automation fraction.

    ``total_hours`` is the post-automation workload and ``base_hours`` the
    baseline it is compared against; the stable reduction is the largest cut
    (up to the floor of ``fraction * team_size``) that keeps per-person load at
    or below the baseline per-person load.
    """
    n = int(team_size)
    if n < 1:
        raise InvalidParameter(f"team_size must be >= 1, got {team_size}")
    fte = fraction * n
    max_safe = max(0, min(math.floor(fte), n - 1))
    baseline_load = base_hours / n
    stable = 0
    for cut in range(max_safe, 0, -1):
        if total_hours / (n - cut) <= baseline_load:
            stable = cut
            break
    return TippingReport(
        fte_absorbed=fte,
        tipping_reached=fte >= 1.0,
        max_safe_reduction=max_safe,
        stable_reduction=stable,
        per_person_load_after=total_hours / (n - stable),
    )


def tipping(params: ScenarioParams, breakdown: LaborBreakdown) -> TippingReport:
    return tipping_report(
        breakdown.automation_fraction,
        params.team_size,
        breakdown.total_hours,
        effective_base(params),
    )


def tipping_from_fraction(fraction: float, team_size: int, base_hours: float = 1.0) -> TippingReport:
    """Apply the tipping equations to a scalar fraction, bypassing the phase model."""
    return tipping_report(fraction, team_size, (1.0 - fraction) * base_hours, base_hours)


def feasible_capacity(params: ScenarioParams, breakdown: LaborBreakdown, n: int) -> bool:
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    return breakdown.total_hours <= n * params.capacity_hours


def naive_heuristic_cost(params: ScenarioParams, f_uniform: float) -> float:
    """Uniform-automation heuristic: baseline cost scaled linearly by ``1 - f``."""
    if not 0.0 <= f_uniform <= 1.0:
        raise InvalidParameter(f"f_uniform must lie in [0, 1], got {f_uniform}")
    return (1.0 - f_uniform) * baseline_cost(params)


def uniform_model_cost(params: ScenarioParams, f_uniform: float) -> float:
    """Cost of automating every phase at ``f_uniform`` through the full labor model."""
    return collapsed_labor(params, AutomationVector.uniform(f_uniform)).cost
