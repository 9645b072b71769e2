from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .instance import Instance, InstanceError, coverage_of

W_DEMAND = 200.0


@dataclass(frozen=True)
class Roster:
    """A complete roster: one pattern per nurse and its penalised cost."""

    assignment: tuple[int, ...]
    total_preference: float
    undercover_units: int
    fitness: float

    @property
    def feasible(self) -> bool:
        return self.undercover_units == 0

    def to_dict(self) -> dict:
        return {
            "assignment": [j + 1 for j in self.assignment],
            "total_preference": self.total_preference,
            "undercover_units": self.undercover_units,
            "fitness": self.fitness,
            "feasible": self.feasible,
        }


def fitness(instance: Instance, assignment: Mapping[int, int] | Sequence[int],
            w_demand: float = W_DEMAND) -> Roster:
    """Preference cost plus ``w_demand`` per unit of uncovered demand."""
    if not isinstance(assignment, Mapping):
        assignment = dict(enumerate(assignment))
    if sorted(assignment) != list(range(instance.n_nurses)):
        raise InstanceError("assignment must give exactly one pattern to every nurse")
    total = 0.0
    for i, j in assignment.items():
        if j not in instance.feasible_sets[i]:
            raise InstanceError(f"pattern {j + 1} is not feasible for nurse {i + 1}")
        total += instance.nurses[i].preference_cost[j]
    shortfall = np.maximum(instance.demand - coverage_of(instance, assignment), 0)
    under = int(shortfall.sum())
    return Roster(tuple(assignment[i] for i in range(instance.n_nurses)), total, under,
                  total + w_demand * under)
