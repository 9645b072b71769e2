import itertools

import numpy as np

from boa_nurse.instance import Instance, Nurse, PatternKind, ShiftPattern

WEEK = range(7)
NIGHTS = range(7, 14)


def day_positions(n):
    return [list(c) for c in itertools.combinations(WEEK, n)]


def night_positions(n):
    return [list(c) for c in itertools.combinations(NIGHTS, n)]


def make_instance(patterns, nurses, demand=None, grades=3, costs=None):
    """Build an instance from position lists and ``(grade, D, N, B)`` tuples.

    ``costs[i]`` maps pattern index -> cost for nurse ``i``; feasible patterns
    without an explicit cost get ``(7 * j + 3 * i) % 31``.
    """
    catalog = tuple(ShiftPattern.from_positions(j, pos) if not isinstance(pos, ShiftPattern) else pos
                    for j, pos in enumerate(patterns))
    built = []
    for i, (grade, d, n, b) in enumerate(nurses):
        probe = Nurse(i, grade, d, n, b)
        feasible = [p.id for p in catalog if _fits(p, probe)]
        given = (costs or {}).get(i, {})
        built.append(Nurse(i, grade, d, n, b, {j: given.get(j, (7 * j + 3 * i) % 31) for j in feasible}))
    if demand is None:
        demand = np.zeros((14, grades), dtype=np.int64)
    return Instance(tuple(built), catalog, np.asarray(demand), grades)


def _fits(p, nurse):
    if p.kind is PatternKind.DAY:
        return nurse.days == p.n_days
    if p.kind is PatternKind.NIGHT:
        return nurse.nights == p.n_nights
    return nurse.both == p.n_shifts


def binomial_ok(count, trials, prob, sigmas=5.0):
    sd = np.sqrt(trials * prob * (1 - prob))
    return abs(count - trials * prob) <= sigmas * sd
