"""Joint optimization of per-phase AI automation and software team headcount."""

from .errors import (
    ConfigInvalid,
    DegenerateDenominator,
    EmptyInput,
    InvalidParameter,
    IoError,
    NonpositiveBase,
    ParseError,
    ValidationError,
)
from .labor import (
    PHASES,
    AutomationVector,
    LaborBreakdown,
    Phase,
    ScenarioParams,
    TippingReport,
    baseline_cost,
    baseline_labor,
    baseline_load_per_person,
    collapsed_labor,
    effective_base,
    feasible_capacity,
    naive_heuristic_cost,
    quality_ratio,
    tipping,
    tipping_from_fraction,
)
from .metrics import MultiRunSummary, NormalizedPoint, hypervolume_2d, normalize_front, summarize
from .nsga import Genome, Individual, OptimizerConfig, RunReport, run
from .sweep import SweepCell, SweepMode, SweepSpec, run_sweep

__version__ = "0.1.0"
