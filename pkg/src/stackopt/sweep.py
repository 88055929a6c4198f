"""Oversight/coordination sensitivity grids."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

from .errors import ConfigInvalid
from .labor import AutomationVector, ScenarioParams, collapsed_labor, tipping
from .nsga import OptimizerConfig, best_key, run

DEFAULT_BETA_GRID = (0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35)
DEFAULT_ALPHA_GRID = (0.2, 0.3, 0.4, 0.5, 0.6)
# mean vector of the aggressive configuration, maintenance at 10%
AGGRESSIVE_VECTOR = AutomationVector((0.6, 0.5, 0.5, 0.7, 0.8, 0.1))


class SweepMode(str, Enum):
    FIXED_VECTOR = "fixed_vector"
    REOPTIMIZE = "reoptimize"


@dataclass(frozen=True)
class SweepSpec:
    beta_grid: tuple[float, ...] = DEFAULT_BETA_GRID
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    mode: SweepMode = SweepMode.FIXED_VECTOR
    vector: AutomationVector | None = AGGRESSIVE_VECTOR
    optimizer: OptimizerConfig | None = None
    seeds: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta_grid", tuple(float(b) for b in self.beta_grid))
        object.__setattr__(self, "alpha_grid", tuple(float(a) for a in self.alpha_grid))
        object.__setattr__(self, "mode", SweepMode(self.mode))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        for name in ("beta_grid", "alpha_grid"):
            grid = getattr(self, name)
            if not grid:
                raise ConfigInvalid(f"{name} must not be empty")
            if any(not 0.0 <= x <= 1.0 for x in grid):
                raise ConfigInvalid(f"{name} values must lie in [0, 1]")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigInvalid(f"{name} must be strictly increasing")
        if self.mode is SweepMode.FIXED_VECTOR and self.vector is None:
            raise ConfigInvalid("fixed_vector mode needs an automation vector")
        if self.mode is SweepMode.REOPTIMIZE:
            if self.optimizer is None:
                raise ConfigInvalid("reoptimize mode needs an optimizer config")
            if not self.seeds:
                raise ConfigInvalid("reoptimize mode needs at least one seed")


@dataclass(frozen=True)
class SweepCell:
    beta: float
    alpha: float
    automation_fraction: float
    max_safe_reduction: int
    stable_reduction: int
    per_person_load: float
    cost: float


CSV_COLUMNS = (
    "beta",
    "alpha",
    "automation_fraction",
    "max_safe_reduction",
    "stable_reduction",
    "per_person_load",
    "cost",
)


def evaluate_cell(params: ScenarioParams, vector: AutomationVector) -> SweepCell:
    breakdown = collapsed_labor(params, vector)
    report = tipping(params, breakdown)
    return SweepCell(
        beta=params.oversight_factor,
        alpha=params.coord_retention,
        automation_fraction=breakdown.automation_fraction,
        max_safe_reduction=report.max_safe_reduction,
        stable_reduction=report.stable_reduction,
        per_person_load=report.per_person_load_after,
        cost=breakdown.cost,
    )


def _reoptimized_vector(params: ScenarioParams, config: OptimizerConfig, seeds: Sequence[int]) -> AutomationVector:
    bests = []
    for seed in seeds:
        best = run(params, replace(config, seed=seed)).best
        if best is not None:
            bests.append(best)
    if not bests:
        raise RuntimeError(
            f"no feasible solution at beta={params.oversight_factor}, alpha={params.coord_retention}"
        )
    return min(bests, key=best_key).genome.automation


def run_sweep(params: ScenarioParams, spec: SweepSpec) -> list[list[SweepCell]]:
    """Evaluate every (beta, alpha) pair; rows follow ``beta_grid``, columns ``alpha_grid``."""
    grid = []
    for beta in spec.beta_grid:
        row = []
        for alpha in spec.alpha_grid:
            cell_params = params.with_model(oversight_factor=beta, coord_retention=alpha)
            if spec.mode is SweepMode.FIXED_VECTOR:
                vector = spec.vector
            else:
                vector = _reoptimized_vector(cell_params, spec.optimizer, spec.seeds)
            row.append(evaluate_cell(cell_params, vector))
        grid.append(row)
    return grid


def flatten(grid: list[list[SweepCell]]) -> list[SweepCell]:
    return [cell for row in grid for cell in row]
