"""Construction rules that pick a shift pattern for the next nurse.

Residual demand is stored as ``demand - covered`` so a positive entry means
undercover. Displays that show undercover as negative numbers go through
:func:`residual_from_display`.
"""

from __future__ import annotations

import enum
import weakref
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels as K
from .fitness import W_DEMAND, Roster
from .instance import Instance, InstanceError, Nurse, ShiftPattern, coverage_of


class RuleId(enum.IntEnum):
    RANDOM = K.RANDOM
    K_CHEAPEST = K.K_CHEAPEST
    COVER = K.COVER
    CONTRIBUTION = K.CONTRIBUTION


ALL_RULES = tuple(RuleId)


@dataclass(frozen=True)
class ContributionWeights:
    preference: float = 1.0
    grades: tuple[float, ...] = (8.0, 2.0, 1.0)

    @classmethod
    def parse(cls, text: str) -> "ContributionWeights":
        """Parse ``"wp,w1,w2,..."``."""
        values = [float(v) for v in text.split(",")]
        if len(values) < 2:
            raise ValueError("need a preference weight and at least one grade weight")
        return cls(values[0], tuple(values[1:]))

    def grade_array(self, grades: int) -> np.ndarray:
        if len(self.grades) < grades:
            raise ValueError(f"{len(self.grades)} grade weights given for {grades} grades")
        return np.asarray(self.grades[:grades], dtype=np.float64)

    def scaled(self, factor: float) -> "ContributionWeights":
        return ContributionWeights(self.preference * factor, tuple(w * factor for w in self.grades))


@dataclass(frozen=True)
class DecodeParams:
    k_cheapest: int = 5
    weights: ContributionWeights = field(default_factory=ContributionWeights)
    w_demand: float = W_DEMAND


_tables: "weakref.WeakKeyDictionary[Instance, K.DecodeTables]" = weakref.WeakKeyDictionary()


def tables_for(instance: Instance) -> K.DecodeTables:
    tables = _tables.get(instance)
    if tables is None:
        tables = _tables[instance] = K.build_tables(instance)
    return tables


def residual_from_display(values) -> np.ndarray:
    """Convert requirements shown as negative = undercover into stored residuals."""
    return -np.asarray(values, dtype=np.int64)


class BuildState:
    """A partial roster under construction, nurse by nurse."""

    def __init__(self, instance: Instance, residual: np.ndarray | None = None):
        self.instance = instance
        self.assigned: dict[int, int] = {}
        if residual is None:
            residual = instance.demand
        self.residual = np.array(residual, dtype=np.int64)
        if self.residual.shape != instance.demand.shape:
            raise InstanceError(f"residual must have shape {instance.demand.shape}")

    @property
    def position(self) -> int:
        return len(self.assigned)

    def assign(self, nurse: Nurse | int, pattern: ShiftPattern | int) -> None:
        i, j = _nurse_index(nurse), _pattern_index(pattern)
        if i in self.assigned:
            raise InstanceError(f"nurse {i + 1} is already assigned")
        if j not in self.instance.feasible_sets[i]:
            raise InstanceError(f"pattern {j + 1} is not feasible for nurse {i + 1}")
        self.assigned[i] = j
        t = tables_for(self.instance)
        K.assign(self.residual, j, t.grade0[i], t.pat_pos, t.pat_npos)

    def recomputed_residual(self) -> np.ndarray:
        return self.instance.demand - coverage_of(self.instance, self.assigned)


def _nurse_index(nurse) -> int:
    return nurse.id if isinstance(nurse, Nurse) else int(nurse)


def _pattern_index(pattern) -> int:
    return pattern.id if isinstance(pattern, ShiftPattern) else int(pattern)


def _slot(state: BuildState, nurse, rule: RuleId, params: DecodeParams, u: float) -> int:
    i = _nurse_index(nurse)
    t = tables_for(state.instance)
    w_grade = params.weights.grade_array(state.instance.grades)
    slot = K.pick_slot(int(rule), i, state.residual, t.feas, t.n_feas, t.feas_cost, t.cheap,
                       t.pat_pos, t.pat_npos, t.grade0, params.k_cheapest,
                       params.weights.preference, w_grade, u)
    return int(t.feas[i, slot])


def apply_rule(state: BuildState, nurse, rule: RuleId, params: DecodeParams, u: float) -> int:
    """Pattern chosen by ``rule`` for ``nurse`` given one uniform draw ``u``."""
    return _slot(state, nurse, RuleId(rule), params, u)


def apply_random(state: BuildState, nurse, rng: np.random.Generator) -> int:
    return _slot(state, nurse, RuleId.RANDOM, DecodeParams(), rng.random())


def apply_k_cheapest(state: BuildState, nurse, k: int, rng: np.random.Generator) -> int:
    """Uniform pick among the ``k`` cheapest feasible patterns.

    Equal costs at the cut-off are admitted by smallest pattern id.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    return _slot(state, nurse, RuleId.K_CHEAPEST, DecodeParams(k_cheapest=k), rng.random())


def cover_grade(state: BuildState, nurse) -> int | None:
    """Grade (1-based) whose undercover the Cover rule targets for this nurse.

    That is the highest grade the nurse may stand in for that still has an
    uncovered shift anywhere in the week; ``None`` when nothing is undercovered.
    """
    g = state.instance.nurses[_nurse_index(nurse)].grade
    for s in range(g, state.instance.grades + 1):
        if (state.residual[:, s - 1] > 0).any():
            return s
    return None


def cover_value(state: BuildState, nurse, pattern) -> int:
    s = cover_grade(state, nurse)
    if s is None:
        return 0
    covers = state.instance.patterns[_pattern_index(pattern)].covers
    values = [int(state.residual[k, s - 1]) for k, c in enumerate(covers) if c]
    return max([0, *values])


def apply_cover(state: BuildState, nurse, rng: np.random.Generator) -> int:
    """Pattern with the largest cover value; ties are broken uniformly at random."""
    return _slot(state, nurse, RuleId.COVER, DecodeParams(), rng.random())


def contribution_score(state: BuildState, nurse, pattern, weights: ContributionWeights) -> float:
    inst = state.instance
    i, j = _nurse_index(nurse), _pattern_index(pattern)
    score = weights.preference * (100 - inst.nurses[i].preference_cost[j])
    for s in range(inst.grades):
        if not inst.nurses[i].qualifies(s + 1):
            continue
        needed = sum(1 for k in range(14) if inst.patterns[j].covers[k] and state.residual[k, s] > 0)
        score += weights.grades[s] * needed
    return score


def apply_contribution(state: BuildState, nurse, weights: ContributionWeights,
                       rng: np.random.Generator | None = None) -> int:
    """Best-scoring pattern; ties go to the smallest pattern id. ``rng`` is unused."""
    return _slot(state, nurse, RuleId.CONTRIBUTION, DecodeParams(weights=weights), 0.0)


def decode(instance: Instance, rule_string: Sequence[int], params: DecodeParams | None = None,
           rng: np.random.Generator | None = None, *, uniforms=None) -> Roster:
    """Build a roster by applying ``rule_string[i]`` to nurse ``i`` in order.

    One uniform per nurse is drawn from ``rng`` up front (or taken from
    ``uniforms``), whether or not the rule needs it.
    """
    params = params or DecodeParams()
    rules = np.asarray(rule_string, dtype=np.int64)
    if rules.shape != (instance.n_nurses,):
        raise ValueError(f"rule string must have length {instance.n_nurses}")
    if ((rules < 0) | (rules >= len(RuleId))).any():
        raise ValueError("rule string contains an unknown rule id")
    if uniforms is None:
        if rng is None:
            raise ValueError("decode needs an rng or explicit uniforms")
        uniforms = rng.random(instance.n_nurses)
    t = tables_for(instance)
    out = np.empty(instance.n_nurses, dtype=np.int64)
    total, under = K.decode_one(rules, np.asarray(uniforms, dtype=np.float64), t.feas, t.n_feas,
                                t.feas_cost, t.cheap, t.pat_pos, t.pat_npos, t.grade0, t.demand,
                                params.k_cheapest, params.weights.preference,
                                params.weights.grade_array(instance.grades), out)
    return Roster(tuple(int(j) for j in out), float(total), int(under),
                  float(total) + params.w_demand * int(under))
