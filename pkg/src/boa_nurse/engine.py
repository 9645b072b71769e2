"""The generational loop: select, learn, sample, decode, replace.

Three run modes share the loop:

* ``rd``: every offspring is decoded with the Random rule only.
* ``cp``: offspring rule strings are uniform over the rule set, nothing is learned.
* ``op``: offspring are sampled from a chain model learned on roulette-selected strings.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .bayesnet import ChainModel, learn, sample_many
from .fitness import W_DEMAND, Roster, fitness
from .instance import Instance
from .rules import ALL_RULES, ContributionWeights, DecodeParams, RuleId, tables_for

__all__ = ["Mode", "RunConfig", "RunReport", "Population", "fitness", "select", "selection_weights",
           "run", "initialize", "step", "InvariantViolation"]

SELECTION_TRANSFORM = "1/(1+fitness)"


class Mode(str, enum.Enum):
    RD = "rd"
    CP = "cp"
    OP = "op"


class InvariantViolation(AssertionError):
    pass


@dataclass(frozen=True)
class RunConfig:
    mode: Mode = Mode.OP
    generations: int = 2000
    population: int = 140
    elites: int = 40
    w_demand: float = W_DEMAND
    k_cheapest: int = 5
    weights: ContributionWeights = field(default_factory=ContributionWeights)
    alpha: float = 0.0
    seed: int = 0
    selection_size: int | None = None   # defaults to population // 2
    rule_set: tuple[RuleId, ...] = ALL_RULES
    target_fitness: float | None = None  # early stop, off by default
    parallel: bool = False
    check_invariants: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "rule_set", tuple(RuleId(r) for r in self.rule_set))
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if self.population < 2 or self.elites < 1 or self.k_cheapest < 1:
            raise ValueError("population >= 2, elites >= 1 and k >= 1 are required")
        if self.elites >= self.population:
            raise ValueError("elites must be smaller than the population")
        if self.selection_size is not None and self.selection_size < 1:
            raise ValueError("selection_size must be >= 1")
        if not self.rule_set:
            raise ValueError("rule_set is empty")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")

    @property
    def n_selected(self) -> int:
        return self.selection_size or max(1, self.population // 2)

    @property
    def n_offspring(self) -> int:
        return self.population - self.elites

    @property
    def decode_params(self) -> DecodeParams:
        return DecodeParams(self.k_cheapest, self.weights, self.w_demand)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["mode"] = self.mode.value
        d["rule_set"] = [r.name.lower() for r in self.rule_set]
        d["weights"] = [self.weights.preference, *self.weights.grades]
        d["selection_size"] = self.n_selected
        return d


@dataclass
class Population:
    strings: np.ndarray      # (P, n) rule ids
    assignments: np.ndarray  # (P, n) pattern ids
    preference: np.ndarray   # (P,)
    undercover: np.ndarray   # (P,)
    fitness: np.ndarray      # (P,)

    def roster(self, idx: int) -> Roster:
        return Roster(tuple(int(j) for j in self.assignments[idx]), float(self.preference[idx]),
                      int(self.undercover[idx]), float(self.fitness[idx]))

    @property
    def best_index(self) -> int:
        return int(np.argmin(self.fitness))


@dataclass
class RunState:
    instance: Instance
    config: RunConfig
    population: Population
    streams: dict[str, np.random.Generator]
    generation: int = 0
    model: ChainModel | None = None


@dataclass
class RunReport:
    mode: Mode
    config: RunConfig
    best_fitness_per_generation: list[float]
    best_feasible_per_generation: list[bool]
    best_roster: Roster
    best_rule_string: list[int]
    generations_to_best: int
    wall_time: float = 0.0

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "mode": self.mode.value,
            "config": self.config.to_dict(),
            "selection_transform": SELECTION_TRANSFORM,
            "generations_run": len(self.best_fitness_per_generation) - 1,
            "generations_to_best": self.generations_to_best,
            "best": {**self.best_roster.to_dict(), "rule_string": self.best_rule_string},
            "best_fitness_per_generation": self.best_fitness_per_generation,
        }
        if include_timing:
            d["wall_time"] = self.wall_time
        return d

    def to_json(self, include_timing: bool = False) -> str:
        items = self.to_dict(include_timing).items()
        return "{\n" + ",\n".join(f" {json.dumps(k)}: {json.dumps(v)}" for k, v in items) + "\n}"

    def trace_csv(self) -> str:
        lines = ["generation,best_fitness,feasible"]
        for g, (f, ok) in enumerate(zip(self.best_fitness_per_generation,
                                        self.best_feasible_per_generation)):
            lines.append(f"{g},{f!r},{int(ok)}")
        return "\n".join(lines) + "\n"


def selection_weights(fitness_values) -> np.ndarray:
    return 1.0 / (1.0 + np.asarray(fitness_values, dtype=np.float64))


def select(fitness_values, count: int, rng: np.random.Generator) -> np.ndarray:
    """Roulette-wheel draw of ``count`` indices, with replacement.

    Weights are ``1 / (1 + fitness)`` since fitness is minimised.
    """
    cum = np.cumsum(selection_weights(fitness_values))
    u = rng.random(count) * cum[-1]
    return np.minimum(np.searchsorted(cum, u, side="right"), len(cum) - 1)


def _streams(seed: int) -> dict[str, np.random.Generator]:
    names = ("init", "selection", "sampling", "rules")
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {name: np.random.default_rng(child) for name, child in zip(names, children)}


def evaluate(instance: Instance, strings: np.ndarray, config: RunConfig,
             rng: np.random.Generator) -> Population:
    """Decode and score a batch of rule strings (``strings`` holds rule ids)."""
    strings = np.ascontiguousarray(strings, dtype=np.int64)
    count, n = strings.shape
    uniforms = rng.random((count, n))
    t = tables_for(instance)
    assignments = np.empty((count, n), dtype=np.int64)
    pref = np.empty(count, dtype=np.float64)
    under = np.empty(count, dtype=np.int64)
    kernel = K.decode_batch_parallel if config.parallel else K.decode_batch_serial
    kernel(strings, uniforms, t.feas, t.n_feas, t.feas_cost, t.cheap, t.pat_pos, t.pat_npos,
           t.grade0, t.demand, config.k_cheapest, config.weights.preference,
           config.weights.grade_array(instance.grades), assignments, pref, under)
    return Population(strings, assignments, pref, under, pref + config.w_demand * under)


def _offspring_strings(state: RunState, count: int) -> np.ndarray:
    config = state.config
    n = state.instance.n_nurses
    rule_ids = np.array([int(r) for r in config.rule_set], dtype=np.int64)
    if config.mode is Mode.RD:
        return np.full((count, n), int(RuleId.RANDOM), dtype=np.int64)
    if config.mode is Mode.CP:
        return rule_ids[state.streams["sampling"].integers(len(rule_ids), size=(count, n))]
    pop = state.population
    chosen = select(pop.fitness, config.n_selected, state.streams["selection"])
    # the model works on positions in the rule set, not raw rule ids
    lookup = np.full(len(RuleId), -1, dtype=np.int64)
    lookup[rule_ids] = np.arange(len(rule_ids))
    state.model = learn(lookup[pop.strings[chosen]], len(rule_ids), config.alpha)
    return rule_ids[sample_many(state.model, count, state.streams["sampling"])]


def initialize(instance: Instance, config: RunConfig) -> RunState:
    streams = _streams(config.seed)
    n = instance.n_nurses
    if config.mode is Mode.RD:
        strings = np.full((config.population, n), int(RuleId.RANDOM), dtype=np.int64)
    else:
        rule_ids = np.array([int(r) for r in config.rule_set], dtype=np.int64)
        strings = rule_ids[streams["init"].integers(len(rule_ids), size=(config.population, n))]
    population = evaluate(instance, strings, config, streams["rules"])
    state = RunState(instance, config, population, streams)
    if config.check_invariants:
        _check_generation(state, None)
    return state


def step(state: RunState) -> RunState:
    """Advance one generation in place: the best ``elites`` survive, the rest are new offspring."""
    config = state.config
    previous_best = float(state.population.fitness.min())
    offspring = evaluate(state.instance, _offspring_strings(state, config.n_offspring),
                         config, state.streams["rules"])
    pop = state.population
    keep = np.argsort(pop.fitness, kind="stable")[:config.elites]
    state.population = Population(
        np.concatenate([pop.strings[keep], offspring.strings]),
        np.concatenate([pop.assignments[keep], offspring.assignments]),
        np.concatenate([pop.preference[keep], offspring.preference]),
        np.concatenate([pop.undercover[keep], offspring.undercover]),
        np.concatenate([pop.fitness[keep], offspring.fitness]),
    )
    state.generation += 1
    if config.check_invariants:
        _check_generation(state, previous_best)
    return state


def _check_generation(state: RunState, previous_best: float | None) -> None:
    pop = state.population
    if len(pop.fitness) != state.config.population:
        raise InvariantViolation(f"generation {state.generation}: population size {len(pop.fitness)}")
    for i, fs in enumerate(state.instance.feasible_sets):
        if not np.isin(pop.assignments[:, i], fs).all():
            raise InvariantViolation(f"generation {state.generation}: nurse {i + 1} got an infeasible pattern")
    best = float(pop.fitness.min())
    if previous_best is not None and best > previous_best:
        raise InvariantViolation(f"generation {state.generation}: best fitness rose {previous_best} -> {best}")


def run(instance: Instance, config: RunConfig | None = None) -> RunReport:
    config = config or RunConfig()
    started = time.perf_counter()
    state = initialize(instance, config)
    trace = [float(state.population.fitness.min())]
    feasible = [bool(state.population.undercover[state.population.best_index] == 0)]
    for _ in range(config.generations):
        if config.target_fitness is not None and trace[-1] <= config.target_fitness:
            break
        step(state)
        b = state.population.best_index
        trace.append(float(state.population.fitness[b]))
        feasible.append(bool(state.population.undercover[b] == 0))
    b = state.population.best_index
    return RunReport(
        mode=config.mode,
        config=config,
        best_fitness_per_generation=trace,
        best_feasible_per_generation=feasible,
        best_roster=state.population.roster(b),
        best_rule_string=[int(r) for r in state.population.strings[b]],
        generations_to_best=trace.index(trace[-1]),
        wall_time=time.perf_counter() - started,
    )
