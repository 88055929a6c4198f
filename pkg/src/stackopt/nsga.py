"""Mixed real/integer NSGA-II over automation fractions and team size.

The genome holds one automation fraction per phase plus an integer headcount.
Objectives are labor cost (minimized) and the testing/development quality
ratio (maximized); capacity, quality-floor and tipping-coherence constraints
are handled with feasibility-first constrained domination.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigInvalid, DegenerateDenominator
from .labor import (
    PHASES,
    AutomationVector,
    Phase,
    ScenarioParams,
    TippingReport,
    baseline_cost,
    collapsed_labor,
    quality_ratio,
    tipping,
)
from .metrics import hypervolume_2d, normalize_front

N_GENES = len(PHASES) + 1


@dataclass(frozen=True)
class ViolationScales:
    capacity: float = 100.0
    quality: float = 0.1
    tipping: float = 1.0


@dataclass(frozen=True)
class OptimizerConfig:
    population_size: int = 50
    generations: int = 100
    crossover_prob: float = 0.5
    mutation_sigma: float = 0.05
    real_mutation_prob: float = 1.0 / 6.0
    int_perturb_prob: float = 0.2
    team_min: int = 1
    team_max: int = 30
    fixed_phases: Mapping[Phase, float] = field(default_factory=dict)
    seed: int | None = None
    quality_floor: float | None = 0.6
    violation_scales: ViolationScales = field(default_factory=ViolationScales)

    def __post_init__(self) -> None:
        fixed = {}
        for key, value in dict(self.fixed_phases).items():
            try:
                phase = key if isinstance(key, Phase) else Phase.parse(key)
            except ValueError as exc:
                raise ConfigInvalid(f"fixed_phases: {exc}") from None
            if value is None:
                continue
            if not 0.0 <= value <= 1.0:
                raise ConfigInvalid(f"fixed_phases[{phase.value}] must lie in [0, 1], got {value}")
            fixed[phase] = float(value)
        object.__setattr__(self, "fixed_phases", {p: fixed[p] for p in PHASES if p in fixed})

        if self.population_size < 4 or self.population_size % 2:
            raise ConfigInvalid(f"population_size must be even and >= 4, got {self.population_size}")
        if self.generations < 1:
            raise ConfigInvalid(f"generations must be >= 1, got {self.generations}")
        for name in ("crossover_prob", "real_mutation_prob", "int_perturb_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigInvalid(f"{name} must lie in [0, 1], got {value}")
        if not self.mutation_sigma > 0:
            raise ConfigInvalid(f"mutation_sigma must be > 0, got {self.mutation_sigma}")
        if not 1 <= self.team_min <= self.team_max:
            raise ConfigInvalid(f"need 1 <= team_min <= team_max, got {self.team_min}, {self.team_max}")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise ConfigInvalid(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.quality_floor is not None and not self.quality_floor >= 0:
            raise ConfigInvalid(f"quality_floor must be >= 0, got {self.quality_floor}")
        scales = self.violation_scales
        for name in ("capacity", "quality", "tipping"):
            if not getattr(scales, name) > 0:
                raise ConfigInvalid(f"violation_scales.{name} must be > 0")

    @property
    def free_positions(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(PHASES) if p not in self.fixed_phases)


@dataclass(frozen=True)
class Genome:
    automation: AutomationVector
    team_size: int


@dataclass(frozen=True)
class ObjectiveVector:
    cost: float
    quality: float

    def minimized(self) -> tuple[float, float]:
        return (self.cost, -self.quality)


@dataclass(frozen=True)
class ConstraintStatus:
    capacity_violation: float
    quality_violation: float
    tipping_violation: float
    total_violation: float

    @property
    def feasible(self) -> bool:
        return self.total_violation == 0.0


@dataclass
class Individual:
    genome: Genome
    objectives: ObjectiveVector
    constraints: ConstraintStatus
    rank: int = 0
    crowding: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.constraints.feasible


@dataclass(frozen=True)
class RunReport:
    seed: int
    front: list[Individual]
    best: Individual | None
    tipping: TippingReport | None
    hv: float
    generations_trace: list[float | None]
    digest: str = ""
    wall_time: float = 0.0


def evaluate(genome: Genome, params: ScenarioParams, config: OptimizerConfig) -> tuple[ObjectiveVector, ConstraintStatus]:
    breakdown = collapsed_labor(params, genome.automation)
    floor = config.quality_floor
    try:
        quality = quality_ratio(params, genome.automation, breakdown)
        q_violation = max(0.0, floor - quality) if floor is not None else 0.0
    except DegenerateDenominator:
        quality = 0.0
        q_violation = floor if floor is not None else 0.0

    cap_violation = max(0.0, breakdown.total_hours - genome.team_size * params.capacity_hours)
    cut = params.team_size - genome.team_size
    t_violation = float(max(0, cut - tipping(params, breakdown).max_safe_reduction))

    scales = config.violation_scales
    total = cap_violation / scales.capacity + q_violation / scales.quality + t_violation / scales.tipping
    return (
        ObjectiveVector(breakdown.cost, quality),
        ConstraintStatus(cap_violation, q_violation, t_violation, total),
    )


def make_individual(genome: Genome, params: ScenarioParams, config: OptimizerConfig) -> Individual:
    objectives, constraints = evaluate(genome, params, config)
    return Individual(genome, objectives, constraints)


def constrained_dominates(a: Individual, b: Individual) -> bool:
    a_ok, b_ok = a.feasible, b.feasible
    if a_ok != b_ok:
        return a_ok
    if not a_ok:
        return a.constraints.total_violation < b.constraints.total_violation
    a1, a2 = a.objectives.minimized()
    b1, b2 = b.objectives.minimized()
    return a1 <= b1 and a2 <= b2 and (a1 < b1 or a2 < b2)


def fast_nondominated_sort(pop: Sequence[Individual]) -> list[list[int]]:
    n = len(pop)
    dominated_by: list[list[int]] = [[] for _ in range(n)]
    counts = [0] * n
    for p in range(n):
        for q in range(p + 1, n):
            if constrained_dominates(pop[p], pop[q]):
                dominated_by[p].append(q)
                counts[q] += 1
            elif constrained_dominates(pop[q], pop[p]):
                dominated_by[q].append(p)
                counts[p] += 1

    fronts: list[list[int]] = []
    current = [i for i in range(n) if counts[i] == 0]
    while current:
        fronts.append(current)
        nxt = []
        for p in current:
            pop[p].rank = len(fronts) - 1
            for q in dominated_by[p]:
                counts[q] -= 1
                if counts[q] == 0:
                    nxt.append(q)
        current = sorted(nxt)
    return fronts


def crowding_distance(front: Sequence[Individual]) -> list[float]:
    n = len(front)
    if n <= 2:
        return [math.inf] * n
    distance = [0.0] * n
    points = [ind.objectives.minimized() for ind in front]
    for m in range(2):
        order = sorted(range(n), key=lambda i: points[i][m])
        lo, hi = points[order[0]][m], points[order[-1]][m]
        distance[order[0]] = distance[order[-1]] = math.inf
        span = hi - lo
        if span == 0:
            continue
        for k in range(1, n - 1):
            distance[order[k]] += (points[order[k + 1]][m] - points[order[k - 1]][m]) / span
    return distance


def tournament_select(pop: Sequence[Individual], rng: np.random.Generator) -> Individual:
    a = pop[int(rng.integers(len(pop)))]
    b = pop[int(rng.integers(len(pop)))]
    if b.rank < a.rank or (b.rank == a.rank and b.crowding > a.crowding):
        return b
    return a


def uniform_crossover(a: Genome, b: Genome, rng: np.random.Generator, config: OptimizerConfig) -> tuple[Genome, Genome]:
    if not rng.random() < config.crossover_prob:
        return a, b
    mask = rng.random(N_GENES) < 0.5
    fa, fb = list(a.automation.fractions), list(b.automation.fractions)
    for i in config.free_positions:
        if mask[i]:
            fa[i], fb[i] = fb[i], fa[i]
    na, nb = a.team_size, b.team_size
    if mask[-1]:
        na, nb = nb, na
    return (
        Genome(AutomationVector(tuple(fa)), na),
        Genome(AutomationVector(tuple(fb)), nb),
    )


def mutate(g: Genome, rng: np.random.Generator, config: OptimizerConfig) -> Genome:
    fractions = list(g.automation.fractions)
    for i in config.free_positions:
        if rng.random() < config.real_mutation_prob:
            value = fractions[i] + rng.normal(0.0, config.mutation_sigma)
            fractions[i] = min(1.0, max(0.0, value))
    team = g.team_size
    if rng.random() < config.int_perturb_prob:
        step = 1 if rng.random() < 0.5 else -1
        team = min(config.team_max, max(config.team_min, team + step))
    return Genome(AutomationVector(tuple(fractions)), team)


def random_genome(rng: np.random.Generator, config: OptimizerConfig) -> Genome:
    fractions = []
    for phase in PHASES:
        if phase in config.fixed_phases:
            fractions.append(config.fixed_phases[phase])
        else:
            fractions.append(float(rng.random()))
    team = int(rng.integers(config.team_min, config.team_max + 1))
    return Genome(AutomationVector(tuple(fractions)), team)


def _rank_and_crowd(pop: list[Individual]) -> list[list[int]]:
    fronts = fast_nondominated_sort(pop)
    for front in fronts:
        members = [pop[i] for i in front]
        for ind, d in zip(members, crowding_distance(members)):
            ind.crowding = d
    return fronts


def environmental_select(merged: list[Individual], size: int) -> list[Individual]:
    """Keep ``size`` individuals by front rank, truncating the last front by crowding."""
    fronts = _rank_and_crowd(merged)
    chosen: list[Individual] = []
    for front in fronts:
        if len(chosen) + len(front) <= size:
            chosen.extend(merged[i] for i in front)
            if len(chosen) == size:
                break
            continue
        # stable sort: equal crowding keeps index order
        ordered = sorted(front, key=lambda i: -merged[i].crowding)
        chosen.extend(merged[i] for i in ordered[: size - len(chosen)])
        break
    return chosen


def best_key(ind: Individual) -> tuple:
    return (ind.objectives.cost, -ind.objectives.quality, ind.genome.team_size, ind.genome.automation.fractions)


def best_feasible(pop: Sequence[Individual]) -> Individual | None:
    feasible = [ind for ind in pop if ind.feasible]
    if not feasible:
        return None
    return min(feasible, key=best_key)


def _check_genome(g: Genome, config: OptimizerConfig) -> None:
    if not config.team_min <= g.team_size <= config.team_max:
        raise ConfigInvalid(f"initial genome team_size {g.team_size} outside [{config.team_min}, {config.team_max}]")
    for phase, value in config.fixed_phases.items():
        if g.automation[phase] != value:
            raise ConfigInvalid(f"initial genome breaks fixed fraction for {phase.value}")


def run(
    params: ScenarioParams,
    config: OptimizerConfig,
    initial: Sequence[Genome] | None = None,
) -> RunReport:
    """Run one seeded NSGA-II optimization.

    ``initial`` optionally supplies the starting genomes (padded with random
    ones up to ``population_size``). The returned front is generation-final
    front 0 ordered by cost; the trace records the best feasible cost after
    every generation (``None`` while nothing is feasible).
    """
    if config.seed is None:
        raise ConfigInvalid("seed is required to run the optimizer")
    started = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    size = config.population_size

    genomes = list(initial or [])[:size]
    for g in genomes:
        _check_genome(g, config)
    while len(genomes) < size:
        genomes.append(random_genome(rng, config))
    pop = [make_individual(g, params, config) for g in genomes]
    _rank_and_crowd(pop)

    trace: list[float | None] = []
    for _ in range(config.generations):
        offspring: list[Individual] = []
        while len(offspring) < size:
            p1 = tournament_select(pop, rng)
            p2 = tournament_select(pop, rng)
            c1, c2 = uniform_crossover(p1.genome, p2.genome, rng, config)
            for child in (mutate(c1, rng, config), mutate(c2, rng, config)):
                offspring.append(make_individual(child, params, config))
        pop = environmental_select(pop + offspring, size)
        best = best_feasible(pop)
        trace.append(best.objectives.cost if best is not None else None)

    final_fronts = fast_nondominated_sort(pop)
    front = sorted((pop[i] for i in final_fronts[0]), key=best_key)
    best = best_feasible(pop)
    report = tipping(params, collapsed_labor(params, best.genome.automation)) if best is not None else None
    return RunReport(
        seed=config.seed,
        front=front,
        best=best,
        tipping=report,
        hv=front_hypervolume(front, params),
        generations_trace=trace,
        wall_time=time.perf_counter() - started,
    )


def front_hypervolume(front: Sequence[Individual], params: ScenarioParams) -> float:
    """Normalized hypervolume of the feasible members of ``front`` (0.0 when baseline cost is zero)."""
    c_base = baseline_cost(params)
    if c_base <= 0:
        return 0.0
    pts = normalize_front(
        [(ind.objectives.cost, ind.objectives.quality) for ind in front if ind.feasible], c_base
    )
    return hypervolume_2d(pts)
