import itertools

import numpy as np
import pytest

from boa_nurse.engine import RunConfig, run
from boa_nurse.fitness import fitness
from boa_nurse.oracle import (
    SearchSpaceTooLarge, brute_force_optimum, counting_oracle, counting_tables, oracle_fitness,
    search_space,
)
from fractions import Fraction
from helpers import day_positions, make_instance, night_positions


def test_single_nurse_takes_cheapest_pattern():
    inst = make_instance(day_positions(5)[:4], [(1, 5, None, None)], costs={0: {0: 9, 1: 4, 2: 4, 3: 7}})
    opt = brute_force_optimum(inst)
    assert opt.assignment == (1,)
    assert opt.fitness == 4.0 and opt.undercover_units == 0


def test_two_nurses_must_split_the_week():
    mon_thu, fri_sun, mon_tue_wed = [0, 1, 2, 3], [4, 5, 6], [0, 1, 2]
    patterns = [mon_thu, fri_sun, [0, 1, 2, 6], [3, 4, 5], mon_tue_wed]
    demand = np.zeros((14, 1), dtype=np.int64)
    demand[:7] = 1
    inst = make_instance(patterns, [(1, 4, None, None), (1, 3, None, None)], demand=demand, grades=1,
                         costs={0: {0: 10, 2: 0}, 1: {1: 10, 3: 0, 4: 0}})
    opt = brute_force_optimum(inst)
    assert opt.undercover_units == 0
    assert opt.assignment == (2, 3)
    assert opt.fitness == 0.0


def test_lexicographic_tie_break_and_matches_reference_fitness(tiny_instance):
    opt = brute_force_optimum(tiny_instance)
    fsets = tiny_instance.feasible_sets
    values = {a: oracle_fitness(tiny_instance, a) for a in itertools.product(*fsets)}
    best = min(values.values())
    assert opt.fitness == best
    assert opt.assignment == min(a for a, v in values.items() if v == best)
    assert fitness(tiny_instance, opt.assignment).fitness == best


def test_reference_fitness_agrees_with_solver_fitness(small_instance):
    rng = np.random.default_rng(0)
    for _ in range(200):
        a = [int(rng.choice(fs)) for fs in small_instance.feasible_sets]
        assert oracle_fitness(small_instance, a) == fitness(small_instance, a).fitness


def test_guard_refuses_large_spaces(small_instance):
    assert search_space(small_instance) > 10
    with pytest.raises(SearchSpaceTooLarge):
        brute_force_optimum(small_instance, limit=10)


def test_counting_tables_are_exact():
    initial, transitions = counting_tables([[0, 0, 1], [0, 1, 1], [1, 1, 0]], 2)
    assert initial == [Fraction(2, 3), Fraction(1, 3)]
    assert transitions[0] == [[Fraction(1, 2), Fraction(1, 2)], [0, 1]]
    initial, transitions = counting_tables([[0, 1]], 3)
    assert transitions[0][2] == [Fraction(1, 3)] * 3


def test_counting_oracle_rows_are_distributions():
    rng = np.random.default_rng(2)
    for _ in range(10):
        model = counting_oracle(rng.integers(4, size=(7, 5)).tolist(), 4)
        model.check(1e-12)


def test_engine_never_beats_the_optimum(tiny_instance):
    opt = brute_force_optimum(tiny_instance)
    for seed in range(3):
        report = run(tiny_instance, RunConfig(generations=20, seed=seed))
        assert report.best_roster.fitness >= opt.fitness
