"""Independent reference implementations used to check the solver.

Nothing here reuses the solver's coverage, feasibility, decoding or counting
code; only the plain data classes are shared.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .bayesnet import ChainModel
from .instance import Instance

SEARCH_LIMIT = 10**7
_CHUNK = 1 << 16


class SearchSpaceTooLarge(RuntimeError):
    pass


class Optimum(NamedTuple):
    assignment: tuple[int, ...]
    fitness: float
    total_preference: float
    undercover_units: int


def _feasible(instance: Instance, nurse) -> list[int]:
    out = []
    for p in instance.patterns:
        d, nt = sum(p.covers[:7]), sum(p.covers[7:])
        kind = p.kind.value
        if kind == "day" and nurse.days == d:
            out.append(p.id)
        elif kind == "night" and nurse.nights == nt:
            out.append(p.id)
        elif kind == "combined" and nurse.both == d + nt:
            out.append(p.id)
    return sorted(out)


def oracle_fitness(instance: Instance, assignment: Sequence[int], w_demand: float = 200.0) -> float:
    """Penalised cost of a full assignment, evaluated term by term."""
    total = 0.0
    for i, j in enumerate(assignment):
        total += instance.nurses[i].preference_cost[j]
    short = 0
    for k in range(14):
        for s in range(1, instance.grades + 1):
            covered = sum(1 for i, j in enumerate(assignment)
                          if instance.nurses[i].grade <= s and instance.patterns[j].covers[k])
            short += max(int(instance.demand[k][s - 1]) - covered, 0)
    return total + w_demand * short


def search_space(instance: Instance) -> int:
    size = 1
    for nurse in instance.nurses:
        size *= len(_feasible(instance, nurse))
    return size


def brute_force_optimum(instance: Instance, w_demand: float = 200.0,
                        limit: int = SEARCH_LIMIT) -> Optimum:
    """Minimum penalised cost over every one-pattern-per-nurse assignment.

    Assignments are enumerated in lexicographic order of pattern id, so the
    first minimiser found is the lexicographically smallest.
    """
    fsets = [_feasible(instance, nurse) for nurse in instance.nurses]
    sizes = [len(fs) for fs in fsets]
    total = 1
    for size in sizes:
        total *= size
    if total == 0:
        raise ValueError("some nurse has no feasible pattern")
    if total > limit:
        raise SearchSpaceTooLarge(f"{total} assignments exceed the limit of {limit}")

    p = instance.grades
    demand = np.asarray(instance.demand, dtype=np.int64).reshape(-1)
    costs, contribs = [], []
    for nurse, fs in zip(instance.nurses, fsets):
        costs.append(np.array([nurse.preference_cost[j] for j in fs], dtype=np.float64))
        grade_mask = np.array([1 if nurse.grade <= s else 0 for s in range(1, p + 1)])
        contribs.append(np.array([np.outer(np.array(instance.patterns[j].covers, dtype=np.int64),
                                           grade_mask).reshape(-1) for j in fs]))

    best_fit, best_flat = np.inf, -1
    for start in range(0, total, _CHUNK):
        digits = np.unravel_index(np.arange(start, min(start + _CHUNK, total)), sizes)
        cost = np.zeros(len(digits[0]))
        cover = np.zeros((len(digits[0]), demand.size), dtype=np.int64)
        for i, d in enumerate(digits):
            cost = cost + costs[i][d]
            cover += contribs[i][d]
        short = np.maximum(demand - cover, 0).sum(axis=1)
        fit = cost + w_demand * short
        a = int(np.argmin(fit))
        if fit[a] < best_fit:
            best_fit, best_flat = float(fit[a]), start + a

    digits = np.unravel_index(best_flat, sizes)
    assignment = tuple(fsets[i][int(d)] for i, d in enumerate(digits))
    pref = float(sum(instance.nurses[i].preference_cost[j] for i, j in enumerate(assignment)))
    return Optimum(assignment, best_fit, pref, int(round((best_fit - pref) / w_demand)) if w_demand else 0)


def counting_tables(selected: Sequence[Sequence[int]], n_rules: int):
    """Exact first-position and transition frequencies as Fractions."""
    selected = [list(s) for s in selected]
    if not selected:
        raise ValueError("cannot learn from an empty selection")
    n = len(selected[0])
    if any(len(s) != n for s in selected):
        raise ValueError("rule strings differ in length")

    first_counts = {}
    for s in selected:
        first_counts[s[0]] = first_counts.get(s[0], 0) + 1
    initial = [Fraction(first_counts.get(j, 0), len(selected)) for j in range(n_rules)]

    transitions = []
    for i in range(n - 1):
        rows = []
        for j in range(n_rules):
            parent = 0
            joint = [0] * n_rules
            for s in selected:
                if s[i] == j:
                    parent += 1
                    joint[s[i + 1]] += 1
            if parent == 0:
                rows.append([Fraction(1, n_rules)] * n_rules)
            else:
                rows.append([Fraction(c, parent) for c in joint])
        transitions.append(rows)
    return initial, transitions


def counting_oracle(selected: Sequence[Sequence[int]], n_rules: int) -> ChainModel:
    initial, transitions = counting_tables(selected, n_rules)
    n = len(selected[0])
    trans = np.array([[[float(x) for x in row] for row in rows] for rows in transitions],
                     dtype=np.float64).reshape(n - 1, n_rules, n_rules)
    return ChainModel(np.array([float(x) for x in initial]), trans, 0.0)
