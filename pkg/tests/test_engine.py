import json
from collections import Counter

import numpy as np
import pytest

from boa_nurse.engine import (
    SELECTION_TRANSFORM, InvariantViolation, Mode, RunConfig, _check_generation, initialize, run,
    select, step,
)
from boa_nurse.fitness import fitness
from boa_nurse.instance import InstanceError
from boa_nurse.oracle import oracle_fitness
from boa_nurse.rules import RuleId
from helpers import binomial_ok, day_positions, make_instance

FAST = dict(generations=15, population=30, elites=10)


def one_day_instance(demand_units=0):
    demand = np.zeros((14, 1), dtype=np.int64)
    demand[0, 0] = demand_units
    return make_instance([[1, 2, 3, 4, 5]], [(1, 5, None, None)], demand=demand, grades=1,
                         costs={0: {0: 12}})


def test_fitness_with_demand_met_is_preference_only():
    roster = fitness(one_day_instance(), [0])
    assert roster.fitness == roster.total_preference == 12 and roster.feasible


def test_fitness_one_uncovered_unit_costs_w_demand():
    roster = fitness(one_day_instance(1), [0])
    assert roster.undercover_units == 1 and not roster.feasible
    assert roster.fitness == 12 + 200
    assert fitness(one_day_instance(1), [0], w_demand=7).fitness == 19


def test_fitness_matches_reference_on_every_assignment(tiny_instance):
    import itertools
    for a in itertools.product(*tiny_instance.feasible_sets):
        roster = fitness(tiny_instance, a)
        assert roster.fitness == oracle_fitness(tiny_instance, a)
        assert roster.feasible == (roster.undercover_units == 0)


def test_fitness_rejects_bad_assignments(small_instance):
    with pytest.raises(InstanceError):
        fitness(small_instance, [0])
    bad = [fs[0] for fs in small_instance.feasible_sets]
    bad[0] = next(j for j in range(small_instance.n_patterns) if j not in small_instance.feasible_sets[0])
    with pytest.raises(InstanceError):
        fitness(small_instance, bad)


def test_select_uniform_when_fitness_equal():
    idx = select([5.0] * 4, 40_000, np.random.default_rng(0))
    counts = Counter(idx.tolist())
    assert all(binomial_ok(counts[i], 40_000, 0.25) for i in range(4))


def test_select_strongly_prefers_fit_individual():
    idx = select([0.0, 1e9], 10_000, np.random.default_rng(1))
    assert (idx == 0).mean() > 0.999


def test_select_ratio_follows_transform():
    assert SELECTION_TRANSFORM == "1/(1+fitness)"
    draws = 100_000
    idx = select([10.0, 30.0], draws, np.random.default_rng(2))
    p = (1 / 11) / (1 / 11 + 1 / 31)
    hits = int((idx == 0).sum())
    assert binomial_ok(hits, draws, p)
    assert hits / (draws - hits) == pytest.approx(31 / 11, rel=0.03)


def test_op_identical_population_is_a_fixed_point(small_instance):
    config = RunConfig(check_invariants=True, **FAST)
    state = initialize(small_instance, config)
    state.population.strings[:] = RuleId.CONTRIBUTION
    from boa_nurse.engine import evaluate
    state.population = evaluate(small_instance, state.population.strings, config, state.streams["rules"])
    before = state.population.assignments.copy()
    for _ in range(3):
        step(state)
        assert (state.population.strings == RuleId.CONTRIBUTION).all()
        assert (state.population.assignments == before[0]).all()
    assert (before == before[0]).all()


def test_rd_offspring_use_only_random_rule(small_instance):
    state = initialize(small_instance, RunConfig(mode="rd", **FAST))
    for _ in range(3):
        step(state)
        assert (state.population.strings == RuleId.RANDOM).all()


def test_cp_offspring_rules_are_uniform(small_instance):
    config = RunConfig(mode="cp", generations=1, population=1001, elites=1)
    state = step(initialize(small_instance, config))
    offspring = state.population.strings[1:].ravel()
    counts = Counter(offspring.tolist())
    assert all(binomial_ok(counts[r], offspring.size, 0.25) for r in range(4))


def test_zero_generations_reports_initial_best(small_instance):
    config = RunConfig(generations=0, population=20, elites=5)
    report = run(small_instance, config)
    state = initialize(small_instance, config)
    assert report.best_fitness_per_generation == [float(state.population.fitness.min())]
    assert report.generations_to_best == 0


@pytest.mark.parametrize("mode", ["rd", "cp", "op"])
def test_runs_are_reproducible_and_monotone(small_instance, mode):
    config = RunConfig(mode=mode, seed=4, check_invariants=True, **FAST)
    a, b = run(small_instance, config), run(small_instance, config)
    assert a.to_json() == b.to_json()
    trace = a.best_fitness_per_generation
    assert len(trace) == FAST["generations"] + 1
    assert all(x >= y for x, y in zip(trace, trace[1:]))
    assert a.best_roster == fitness(small_instance, a.best_roster.assignment)
    assert trace[a.generations_to_best] == trace[-1]


def test_op_with_random_only_equals_rd(small_instance):
    rd = run(small_instance, RunConfig(mode="rd", seed=9, **FAST))
    op = run(small_instance, RunConfig(mode="op", seed=9, rule_set=(RuleId.RANDOM,), **FAST))
    assert rd.best_fitness_per_generation == op.best_fitness_per_generation
    assert rd.best_roster == op.best_roster


def test_parallel_evaluation_matches_serial(small_instance):
    serial = run(small_instance, RunConfig(seed=3, **FAST))
    parallel = run(small_instance, RunConfig(seed=3, parallel=True, **FAST))
    a, b = serial.to_dict(), parallel.to_dict()
    a["config"].pop("parallel"), b["config"].pop("parallel")
    assert a == b


def test_seeds_change_the_run(small_instance):
    a = run(small_instance, RunConfig(seed=1, **FAST))
    b = run(small_instance, RunConfig(seed=2, **FAST))
    assert a.to_json() != b.to_json()


@pytest.mark.parametrize("kwargs", [
    dict(elites=140), dict(population=1), dict(elites=0), dict(k_cheapest=0), dict(generations=-1),
    dict(selection_size=0), dict(rule_set=()), dict(alpha=-0.1), dict(mode="ga"),
])
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        RunConfig(**kwargs)


def test_config_defaults():
    config = RunConfig()
    assert (config.generations, config.population, config.elites) == (2000, 140, 40)
    assert (config.w_demand, config.k_cheapest, config.n_selected, config.n_offspring) == (200, 5, 70, 100)


def test_report_format(small_instance):
    report = run(small_instance, RunConfig(seed=0, **FAST))
    data = json.loads(report.to_json())
    assert data["mode"] == "op" and data["selection_transform"] == "1/(1+fitness)"
    assert data["config"]["population"] == 30 and data["config"]["weights"] == [1.0, 8.0, 2.0, 1.0]
    assert "wall_time" not in data
    assert "wall_time" in json.loads(report.to_json(include_timing=True))
    best = data["best"]
    assert best["feasible"] == (best["undercover_units"] == 0)
    assert min(best["assignment"]) >= 1
    lines = report.trace_csv().splitlines()
    assert lines[0] == "generation,best_fitness,feasible"
    assert len(lines) == FAST["generations"] + 2


def test_target_fitness_stops_early(small_instance):
    report = run(small_instance, RunConfig(seed=0, target_fitness=1e9, **FAST))
    assert len(report.best_fitness_per_generation) == 1


def test_invariant_check_catches_regression(small_instance):
    state = initialize(small_instance, RunConfig(check_invariants=True, **FAST))
    with pytest.raises(InvariantViolation):
        _check_generation(state, previous_best=float(state.population.fitness.min()) - 1)
    state.population.assignments[0, 0] = -1
    with pytest.raises(InvariantViolation):
        _check_generation(state, None)


def test_mode_enum_values():
    assert [m.value for m in Mode] == ["rd", "cp", "op"]
