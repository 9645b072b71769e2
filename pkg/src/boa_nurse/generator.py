"""Seeded synthetic instances with a day/night split and a grade hierarchy.

Demand is calibrated against a hidden witness roster: every nurse is given a
random feasible pattern (a day pattern with probability ``day_fraction``) and
the witness coverage of each grade column is scaled by ``demand_tightness``
(times ``senior_share`` for every column but the all-grades one) and
apportioned back over the fourteen shifts. Tightness up to 1 therefore always
leaves at least one feasible roster; above 1 there is a shortage.
"""

from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass

import numpy as np

from .instance import N_DAYS, Instance, Nurse, PatternKind, ShiftPattern, validate

COST_PROFILES = ("mixture", "uniform", "zero")


@dataclass(frozen=True)
class GeneratorSpec:
    n_nurses: int = 30
    grades: int = 3
    day_fraction: float = 0.6
    D_range: tuple[int, int] = (4, 5)
    N_range: tuple[int, int] = (3, 4)
    demand_tightness: float = 0.8
    cost_profile: str = "mixture"
    seed: int = 0
    senior_share: float = 0.5
    grade_mix: tuple[float, ...] | None = None
    combined_nurses: int = 0
    B_range: tuple[int, int] = (4, 5)

    def __post_init__(self):
        for name in ("D_range", "N_range", "B_range"):
            lo, hi = getattr(self, name)
            object.__setattr__(self, name, (int(lo), int(hi)))
        if self.n_nurses < 1 or self.grades < 1:
            raise ValueError("need at least one nurse and one grade")
        if not 0.0 <= self.day_fraction <= 1.0:
            raise ValueError("day_fraction must lie in [0, 1]")
        for name, top in (("D_range", N_DAYS), ("N_range", N_DAYS), ("B_range", 2 * N_DAYS)):
            lo, hi = getattr(self, name)
            if not 1 <= lo <= hi <= top:
                raise ValueError(f"{name} must satisfy 1 <= lo <= hi <= {top}")
        if self.demand_tightness < 0:
            raise ValueError("demand_tightness must be >= 0")
        if self.cost_profile not in COST_PROFILES:
            raise ValueError(f"cost_profile must be one of {COST_PROFILES}")
        if not 0 <= self.combined_nurses <= self.n_nurses:
            raise ValueError("combined_nurses must lie in 0..n_nurses")
        if self.grade_mix is not None and len(self.grade_mix) != self.grades:
            raise ValueError("grade_mix needs one weight per grade")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for key in ("D_range", "N_range", "B_range"):
            d[key] = list(d[key])
        if d["grade_mix"] is not None:
            d["grade_mix"] = list(d["grade_mix"])
        return d


def _patterns(day_counts, night_counts, both_counts) -> list[ShiftPattern]:
    out: list[ShiftPattern] = []
    for d in sorted(day_counts):
        for combo in itertools.combinations(range(N_DAYS), d):
            out.append(ShiftPattern.from_positions(len(out), combo, PatternKind.DAY))
    for n in sorted(night_counts):
        for combo in itertools.combinations(range(N_DAYS, 2 * N_DAYS), n):
            out.append(ShiftPattern.from_positions(len(out), combo, PatternKind.NIGHT))
    for b in sorted(both_counts):
        # combined patterns: a day block followed by a night block, no day after a night
        for split in range(1, b):
            days, nights = split, b - split
            if days > N_DAYS or nights > N_DAYS:
                continue
            for start in range(N_DAYS - days - nights + 1):
                pos = list(range(start, start + days))
                pos += [N_DAYS + d for d in range(start + days, start + days + nights)]
                out.append(ShiftPattern.from_positions(len(out), pos, PatternKind.COMBINED))
    return out


def _costs(rng: np.random.Generator, profile: str, size: int, prefers_days: bool,
           is_day: np.ndarray) -> np.ndarray:
    if profile == "zero":
        return np.zeros(size, dtype=np.int64)
    if profile == "uniform":
        return rng.integers(0, 101, size=size)
    # mostly cheap, some moderate, a few very unpopular patterns
    bucket = rng.choice(3, size=size, p=[0.6, 0.3, 0.1])
    cost = np.where(bucket == 0, rng.integers(0, 4, size=size),
                    np.where(bucket == 1, rng.integers(4, 21, size=size), rng.integers(21, 101, size=size)))
    # shifts on the nurse's unpreferred side of the day/night split cost extra
    dislike = is_day != prefers_days
    cost = cost + dislike * rng.integers(0, 11, size=size)
    return np.minimum(cost, 100)


def _apportion(total: float, weights: np.ndarray) -> np.ndarray:
    """Integer split of ``round(total)`` proportional to ``weights`` (largest remainder)."""
    target = int(round(total))
    share = weights / weights.sum() * target
    base = np.floor(share).astype(np.int64)
    remainder = target - int(base.sum())
    order = np.argsort(-(share - base), kind="stable")
    base[order[:remainder]] += 1
    return base


def generate(spec: GeneratorSpec) -> Instance:
    rng = np.random.default_rng(spec.seed)
    p = spec.grades
    mix = np.asarray(spec.grade_mix if spec.grade_mix is not None else np.arange(1, p + 1), dtype=float)
    grades = rng.choice(np.arange(1, p + 1), size=spec.n_nurses, p=mix / mix.sum())
    D = rng.integers(spec.D_range[0], spec.D_range[1] + 1, size=spec.n_nurses)
    N = rng.integers(spec.N_range[0], spec.N_range[1] + 1, size=spec.n_nurses)
    B = rng.integers(spec.B_range[0], spec.B_range[1] + 1, size=spec.n_nurses)
    special = np.zeros(spec.n_nurses, dtype=bool)
    if spec.combined_nurses:
        special[rng.choice(spec.n_nurses, size=spec.combined_nurses, replace=False)] = True
    prefers_days = rng.random(spec.n_nurses) < spec.day_fraction

    catalog = _patterns(set(D.tolist()), set(N.tolist()), set(B[special].tolist()))
    kinds = np.array([pt.kind.value for pt in catalog])
    n_days = np.array([pt.n_days for pt in catalog])
    n_nights = np.array([pt.n_nights for pt in catalog])
    n_shifts = n_days + n_nights

    nurses = []
    for i in range(spec.n_nurses):
        feasible = ((kinds == PatternKind.DAY.value) & (n_days == D[i])) | \
                   ((kinds == PatternKind.NIGHT.value) & (n_nights == N[i]))
        if special[i]:
            feasible |= (kinds == PatternKind.COMBINED.value) & (n_shifts == B[i])
        ids = np.flatnonzero(feasible)
        is_day = kinds[ids] == PatternKind.DAY.value
        costs = _costs(rng, spec.cost_profile, len(ids), bool(prefers_days[i]), is_day)
        nurses.append(Nurse(i, int(grades[i]), int(D[i]), int(N[i]),
                            int(B[i]) if special[i] else None,
                            {int(j): int(c) for j, c in zip(ids, costs)}))

    witness = np.zeros((2 * N_DAYS, p), dtype=np.int64)
    for i, nurse in enumerate(nurses):
        ids = sorted(nurse.preference_cost)
        day_ids = [j for j in ids if kinds[j] == PatternKind.DAY.value]
        other = [j for j in ids if kinds[j] != PatternKind.DAY.value]
        pool = day_ids if (rng.random() < spec.day_fraction and day_ids) or not other else other
        j = pool[rng.integers(len(pool))]
        witness[np.array(catalog[j].covers), grades[i] - 1:] += 1

    demand = np.zeros((2 * N_DAYS, p), dtype=np.int64)
    for s in range(p):
        if witness[:, s].sum() == 0:
            continue
        share = 1.0 if s == p - 1 else spec.senior_share
        demand[:, s] = _apportion(spec.demand_tightness * share * witness[:, s].sum(),
                                  witness[:, s].astype(float))
    demand = np.maximum.accumulate(demand, axis=1)

    instance = Instance(tuple(nurses), tuple(catalog), demand, p)
    problems = validate(instance)
    if problems:
        raise ValueError(f"generated instance is invalid: {problems}")
    return instance


TIERS = {"easy": 0.6, "medium": 0.8, "tight": 1.0}


def standard_suite() -> dict[str, GeneratorSpec]:
    """The 12-instance benchmark: four sizes at each of three tightness tiers."""
    suite = {}
    seed = 1001
    for tier, tightness in TIERS.items():
        for n in (16, 20, 25, 30):
            suite[f"{tier}_{n:02d}"] = GeneratorSpec(n_nurses=n, demand_tightness=tightness, seed=seed)
            seed += 1
    return suite


def tiny_suite() -> dict[str, GeneratorSpec]:
    """Twelve instances small enough for exhaustive search (at most ~2e6 rosters)."""
    suite = {}
    for n in (3, 4, 5):
        ranges = (5, 6) if n < 5 else (6, 6)
        for seed in range(4):
            suite[f"tiny{n}_{seed}"] = GeneratorSpec(
                n_nurses=n, day_fraction=0.5, D_range=ranges, N_range=ranges,
                demand_tightness=0.8, seed=seed)
    return suite


SUITES = {"standard": standard_suite, "tiny": tiny_suite}


def write_suite(name: str, directory) -> list[str]:
    """Generate a named suite into ``directory``; returns the file names written."""
    from pathlib import Path

    from .instance import dumps_instance

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for label, spec in SUITES[name]().items():
        instance = dataclasses.replace(generate(spec), name=label)
        (directory / f"{label}.json").write_text(dumps_instance(instance, {"generator": spec.to_dict()}))
        written.append(f"{label}.json")
    return written
