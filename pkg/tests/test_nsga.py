from __future__ import annotations

import itertools
import math
import random
from collections import deque
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stackopt.errors import ConfigInvalid
from stackopt.labor import PHASES, AutomationVector, Phase, ScenarioParams
from stackopt.nsga import (
    ConstraintStatus,
    Genome,
    Individual,
    ObjectiveVector,
    OptimizerConfig,
    best_feasible,
    constrained_dominates,
    crowding_distance,
    evaluate,
    fast_nondominated_sort,
    mutate,
    run,
    tournament_select,
    uniform_crossover,
)

from .conftest import make_reference_params
from .oracles import brute_force_ranks


class ScriptedRng:
    """Stand-in for ``numpy.random.Generator`` that replays fixed draws."""

    def __init__(self, random=(), normal=(), integers=(), masks=()):
        self._random = deque(random)
        self._normal = deque(normal)
        self._integers = deque(integers)
        self._masks = deque(masks)

    def random(self, size=None):
        if size is None:
            return self._random.popleft()
        # a truthy mask entry means "swap", i.e. a draw below 0.5
        return np.array([0.0 if m else 0.9 for m in self._masks.popleft()])

    def normal(self, loc, scale):
        return self._normal.popleft()

    def integers(self, low, high=None):
        return self._integers.popleft()


def ind(cost, quality, violation=0.0, team=5, fractions=(0.0,) * 6) -> Individual:
    return Individual(
        Genome(AutomationVector(fractions), team),
        ObjectiveVector(cost, quality),
        ConstraintStatus(violation, 0.0, 0.0, violation),
    )


def genome(fractions, team=5) -> Genome:
    return Genome(AutomationVector(tuple(fractions)), team)


class TestEvaluate:
    def test_aggressive_vector_cost(self, reference_params):
        obj, con = evaluate(genome((0.6, 0.5, 0.5, 0.7, 0.8, 0.1), 10), reference_params, OptimizerConfig())
        assert obj.cost == pytest.approx(115_500.0)
        assert obj.quality == pytest.approx(264.0 / 480.0)
        assert con.quality_violation == pytest.approx(0.6 - 0.55)
        # 1540 hr against 10 * 135 capacity; cutting 10 heads exceeds floor(20 * 1160/2700) = 8
        assert con.capacity_violation == pytest.approx(190.0)
        assert con.tipping_violation == 2.0
        assert not con.feasible

    def test_no_automation_at_baseline_team(self, reference_params):
        obj, con = evaluate(genome((0.0,) * 6, 20), reference_params, OptimizerConfig())
        assert obj.cost == pytest.approx(187_500.0)
        assert obj.quality == pytest.approx(0.75)
        assert con.feasible

    def test_capacity_violation(self, reference_params):
        _, con = evaluate(genome((0.0,) * 6, 1), reference_params, OptimizerConfig())
        assert con.capacity_violation == pytest.approx(2500.0 - 135.0)
        assert con.total_violation > 0

    def test_degenerate_quality_is_max_violation(self):
        p = make_reference_params(oversight_factor=0.0)
        obj, con = evaluate(genome((0, 0, 1, 0, 0, 0), 20), p, OptimizerConfig())
        assert obj.quality == 0.0
        assert con.quality_violation == 0.6

    def test_no_floor(self, reference_params):
        cfg = OptimizerConfig(quality_floor=None)
        _, con = evaluate(genome((0, 0, 0, 1, 0, 0), 20), reference_params, cfg)
        assert con.quality_violation == 0.0

    def test_deterministic(self, reference_params):
        g = genome((0.3, 0.1, 0.9, 0.2, 0.5, 0.4), 13)
        assert evaluate(g, reference_params, OptimizerConfig()) == evaluate(g, reference_params, OptimizerConfig())


class TestDomination:
    def test_dominates_in_both(self):
        assert constrained_dominates(ind(100, 0.7), ind(120, 0.65))

    def test_feasibility_first(self):
        assert constrained_dominates(ind(100, 0.7), ind(90, 0.8, violation=1.0))
        assert not constrained_dominates(ind(90, 0.8, violation=1.0), ind(100, 0.7))

    def test_trade_off_pair(self):
        a, b = ind(100, 0.8), ind(90, 0.7)
        assert not constrained_dominates(a, b)
        assert not constrained_dominates(b, a)

    def test_cheaper_and_better_dominates(self):
        assert constrained_dominates(ind(90, 0.8), ind(100, 0.7))

    def test_infeasible_by_violation(self):
        assert constrained_dominates(ind(500, 0.1, violation=0.5), ind(1, 1.0, violation=2.0))

    def test_equal_points_do_not_dominate(self):
        assert not constrained_dominates(ind(1, 0.5), ind(1, 0.5))


class TestSort:
    def test_chain(self):
        # quality = -second objective so (1,1),(2,2),(3,3) are minimization points
        pop = [ind(1, -1), ind(2, -2), ind(3, -3)]
        assert fast_nondominated_sort(pop) == [[0], [1], [2]]
        assert [p.rank for p in pop] == [0, 1, 2]

    def test_trade_off_set(self):
        pop = [ind(1, 0.1), ind(2, 0.5), ind(3, 0.9)]
        assert fast_nondominated_sort(pop) == [[0, 1, 2]]

    def test_feasible_alone_in_front_zero(self):
        pop = [ind(9, 0.1, violation=1.0), ind(100, 0.0), ind(1, 1.0, violation=0.2), ind(2, 2.0, violation=3.0)]
        fronts = fast_nondominated_sort(pop)
        assert fronts[0] == [1]

    def test_matches_brute_force(self):
        rng = random.Random(11)
        for _ in range(50):
            pop = random_population(rng, rng.randint(1, 40))
            fronts = fast_nondominated_sort(pop)
            assert sorted(i for f in fronts for i in f) == list(range(len(pop)))
            assert [p.rank for p in pop] == brute_force_ranks(pop, constrained_dominates)


def random_population(rng: random.Random, n: int) -> list[Individual]:
    pop = []
    for _ in range(n):
        # coarse values force plenty of ties
        violation = rng.choice([0.0, 0.0, 0.0, 0.5, 1.0, rng.random()])
        pop.append(ind(rng.randint(0, 8), rng.randint(0, 5) / 5, violation=violation))
    return pop


class TestCrowding:
    def test_single(self):
        assert crowding_distance([ind(1, 1)]) == [math.inf]

    def test_pair(self):
        assert crowding_distance([ind(1, 1), ind(2, 2)]) == [math.inf, math.inf]

    def test_equally_spaced(self):
        d = crowding_distance([ind(0, 0.0), ind(1, -1.0), ind(2, -2.0)])
        assert d[0] == d[2] == math.inf
        assert d[1] == pytest.approx(2.0)

    def test_zero_range_contributes_nothing(self):
        d = crowding_distance([ind(0, 0.5), ind(1, 0.5), ind(2, 0.5), ind(4, 0.5)])
        assert d[1] == pytest.approx(0.5)
        assert d[2] == pytest.approx(0.75)

    def test_ties_broken_by_index(self):
        d = crowding_distance([ind(1, 0.5), ind(1, 0.5), ind(1, 0.5)])
        assert d == [math.inf, 0.0, math.inf]


class TestTournament:
    def test_lower_rank_wins(self):
        a, b = ind(1, 1), ind(2, 2)
        a.rank, b.rank = 2, 0
        assert tournament_select([a, b], ScriptedRng(integers=[0, 1])) is b

    def test_crowding_breaks_rank_tie(self):
        a, b = ind(1, 1), ind(2, 2)
        a.crowding, b.crowding = 1.3, math.inf
        assert tournament_select([a, b], ScriptedRng(integers=[0, 1])) is b

    def test_full_tie_first_drawn(self):
        a, b = ind(1, 1), ind(2, 2)
        assert tournament_select([a, b], ScriptedRng(integers=[1, 0])) is b


class TestCrossover:
    def test_identical_parents(self):
        g = genome((0.1, 0.2, 0.3, 0.4, 0.5, 0.6), 7)
        rng = ScriptedRng(random=[0.0], masks=[[1, 0, 1, 0, 1, 0, 1]])
        assert uniform_crossover(g, g, rng, OptimizerConfig()) == (g, g)

    def test_all_swap(self):
        a, b = genome((0.1,) * 6, 3), genome((0.9,) * 6, 12)
        rng = ScriptedRng(random=[0.0], masks=[[1] * 7])
        assert uniform_crossover(a, b, rng, OptimizerConfig()) == (b, a)

    def test_partial_mask(self):
        a, b = genome((0.1,) * 6, 3), genome((0.9,) * 6, 12)
        rng = ScriptedRng(random=[0.0], masks=[[1, 0, 0, 0, 0, 1, 0]])
        c1, c2 = uniform_crossover(a, b, rng, OptimizerConfig())
        assert c1 == genome((0.9, 0.1, 0.1, 0.1, 0.1, 0.9), 3)
        assert c2 == genome((0.1, 0.9, 0.9, 0.9, 0.9, 0.1), 12)

    def test_zero_probability(self):
        a, b = genome((0.1,) * 6, 3), genome((0.9,) * 6, 12)
        cfg = OptimizerConfig(crossover_prob=0.0)
        rng = np.random.default_rng(0)
        for _ in range(100):
            assert uniform_crossover(a, b, rng, cfg) == (a, b)

    def test_fixed_phases_never_swapped(self):
        cfg = OptimizerConfig(fixed_phases={Phase.MAINTENANCE: 0.1})
        a = genome((0.1, 0.1, 0.1, 0.1, 0.1, 0.1), 3)
        b = genome((0.9, 0.9, 0.9, 0.9, 0.9, 0.1), 4)
        rng = ScriptedRng(random=[0.0], masks=[[1] * 7])
        c1, _ = uniform_crossover(a, b, rng, cfg)
        assert c1.automation[Phase.MAINTENANCE] == 0.1


class TestMutate:
    def test_clamps_fraction_high(self):
        cfg = OptimizerConfig(real_mutation_prob=1.0, int_perturb_prob=0.0)
        g = genome((1.0,) * 6, 5)
        rng = ScriptedRng(random=[0.0] * 7, normal=[0.3] * 6)
        assert mutate(g, rng, cfg).automation.fractions == (1.0,) * 6

    def test_clamps_team(self):
        cfg = OptimizerConfig(real_mutation_prob=0.0, int_perturb_prob=1.0)
        g = genome((0.5,) * 6, 30)
        # six skipped fraction draws, then perturb yes, direction +1
        rng = ScriptedRng(random=[0.9] * 6 + [0.0, 0.0])
        assert mutate(g, rng, cfg).team_size == 30

    def test_down_step(self):
        cfg = OptimizerConfig(real_mutation_prob=0.0, int_perturb_prob=1.0)
        rng = ScriptedRng(random=[0.9] * 6 + [0.0, 0.7])
        assert mutate(genome((0.5,) * 6, 10), rng, cfg).team_size == 9

    def test_all_probs_zero(self):
        cfg = OptimizerConfig(real_mutation_prob=0.0, int_perturb_prob=0.0)
        rng = np.random.default_rng(1)
        g = genome((0.2, 0.4, 0.6, 0.8, 1.0, 0.0), 17)
        for _ in range(100):
            assert mutate(g, rng, cfg) == g

    def test_fixed_phase_untouched(self):
        cfg = OptimizerConfig(real_mutation_prob=1.0, fixed_phases={Phase.MAINTENANCE: 0.1})
        rng = np.random.default_rng(2)
        g = genome((0.5, 0.5, 0.5, 0.5, 0.5, 0.1), 10)
        for _ in range(200):
            g = mutate(g, rng, cfg)
            assert g.automation[Phase.MAINTENANCE] == 0.1


@settings(max_examples=100, deadline=None)
@given(
    st.integers(0, 2**32),
    st.floats(0.01, 50.0),
    st.integers(1, 30),
    st.integers(0, 29),
)
def test_genome_closure_under_adversarial_noise(seed, sigma, team_min, span):
    team_max = min(30, team_min + span)
    cfg = OptimizerConfig(
        mutation_sigma=sigma, real_mutation_prob=1.0, int_perturb_prob=1.0,
        team_min=team_min, team_max=team_max, fixed_phases={Phase.DESIGN: 0.25},
    )
    rng = np.random.default_rng(seed)
    g = genome((0.5, 0.25, 0.5, 0.5, 0.5, 0.5), team_min)
    for _ in range(30):
        other = genome(tuple(float(x) for x in rng.random(6)[:1]) + (0.25,) + tuple(float(x) for x in rng.random(4)), team_max)
        g, _ = uniform_crossover(g, other, rng, cfg)
        g = mutate(g, rng, cfg)
        assert team_min <= g.team_size <= team_max
        assert all(0.0 <= x <= 1.0 for x in g.automation.fractions)
        assert g.automation[Phase.DESIGN] == 0.25


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"population_size": 5},
            {"population_size": 2},
            {"generations": 0},
            {"crossover_prob": 1.5},
            {"mutation_sigma": 0.0},
            {"int_perturb_prob": -0.1},
            {"team_min": 10, "team_max": 5},
            {"fixed_phases": {"testing": 2.0}},
            {"seed": -1},
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ConfigInvalid):
            OptimizerConfig(**kwargs)

    def test_defaults_follow_published_setup(self):
        cfg = OptimizerConfig()
        assert (cfg.population_size, cfg.generations) == (50, 100)
        assert (cfg.crossover_prob, cfg.mutation_sigma, cfg.int_perturb_prob) == (0.5, 0.05, 0.2)
        assert (cfg.team_min, cfg.team_max, cfg.quality_floor) == (1, 30, 0.6)

    def test_run_needs_seed(self, reference_params):
        with pytest.raises(ConfigInvalid):
            run(reference_params, OptimizerConfig(generations=1))


def test_best_feasible_tie_breaks():
    pop = [
        ind(10, 0.7, team=9, fractions=(0.5,) * 6),
        ind(10, 0.8, team=12),
        ind(10, 0.8, team=11, fractions=(0.2,) * 6),
        ind(10, 0.8, team=11, fractions=(0.1,) * 6),
        ind(5, 0.9, violation=1.0),
    ]
    best = best_feasible(pop)
    assert best.genome.team_size == 11
    assert best.genome.automation.fractions == (0.1,) * 6
    assert best_feasible([ind(1, 1, violation=1.0)]) is None


SMALL = OptimizerConfig(population_size=20, generations=30, seed=3)


class TestRun:
    def test_deterministic(self, reference_params):
        a = run(reference_params, SMALL)
        b = run(reference_params, SMALL)
        assert replace(a, wall_time=0.0) == replace(b, wall_time=0.0)

    def test_seed_changes_trajectory(self, reference_params):
        a = run(reference_params, SMALL)
        b = run(reference_params, replace(SMALL, seed=4))
        assert [i.genome for i in a.front] != [i.genome for i in b.front]

    def test_elitism(self, reference_params):
        for seed in range(5):
            trace = run(reference_params, replace(SMALL, seed=seed)).generations_trace
            values = [c for c in trace if c is not None]
            assert all(b <= a for a, b in zip(values, values[1:]))
            # once feasible, always feasible
            first = next(i for i, c in enumerate(trace) if c is not None)
            assert all(c is not None for c in trace[first:])

    def test_front_feasible_when_initial_feasible(self, reference_params):
        report = run(reference_params, SMALL, initial=[genome((0.0,) * 6, 20)])
        assert report.front and all(i.feasible for i in report.front)
        assert all(i.objectives.quality >= 0.6 - 1e-9 for i in report.front)

    def test_trivial_scenario_reaches_full_automation(self):
        params = ScenarioParams({p: 100.0 for p in PHASES}, 100.0, 10, 100.0, 75.0)
        report = run(params, OptimizerConfig(seed=5))
        expected = 75.0 * (0.2 * 600.0 + 0.4 * 100.0)
        assert report.best.objectives.cost == pytest.approx(expected, rel=1e-6)
        assert report.tipping.max_safe_reduction == 7

    def test_dominant_genome_fixates(self, reference_params):
        cfg = OptimizerConfig(
            population_size=20, generations=50, seed=9,
            crossover_prob=0.0, real_mutation_prob=0.0, int_perturb_prob=0.0,
        )
        champion = genome((1.0,) * 6, 10)
        others = [genome((0.5,) * 6, 20 - k) for k in range(19)]
        report = run(reference_params, cfg, initial=[champion] + others)
        assert all(i.genome == champion for i in report.front)
        assert report.best.genome == champion

    def test_initial_population_checked(self, reference_params):
        with pytest.raises(ConfigInvalid):
            run(reference_params, replace(SMALL, team_max=10), initial=[genome((0.0,) * 6, 20)])

    def test_report_shape(self, reference_params):
        report = run(reference_params, SMALL)
        assert len(report.generations_trace) == SMALL.generations
        assert report.seed == 3
        assert 0.0 <= report.hv <= 1.0
        costs = [i.objectives.cost for i in report.front]
        assert costs == sorted(costs)


def grid_oracle(params: ScenarioParams, config: OptimizerConfig) -> float:
    """Cheapest feasible genome over the coarse grid for the two free phases."""
    levels = (0.0, 0.25, 0.5, 0.75, 1.0)
    best = math.inf
    for f_dev, f_test, team in itertools.product(levels, levels, range(1, 31)):
        fractions = [0.0] * 6
        fractions[PHASES.index(Phase.DEVELOPMENT)] = f_dev
        fractions[PHASES.index(Phase.TESTING)] = f_test
        obj, con = evaluate(genome(fractions, team), params, config)
        if con.feasible:
            best = min(best, obj.cost)
    return best


REDUCED = {p: 0.0 for p in PHASES if p not in (Phase.DEVELOPMENT, Phase.TESTING)}


def test_reduced_problem_matches_grid_oracle(reference_params):
    cfg = OptimizerConfig(fixed_phases=REDUCED, seed=1)
    oracle = grid_oracle(reference_params, cfg)
    assert oracle == pytest.approx(75.0 * 1380.0)
    best = run(reference_params, cfg).best.objectives.cost
    assert abs(best - oracle) / oracle <= 0.01
