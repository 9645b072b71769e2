"""Problem data for the weekly nurse scheduling problem.

Positions ``k`` are 0..13 internally (0..6 days Mon..Sun, 7..13 nights Mon..Sun);
the JSON file format uses 1-based ids for patterns and nurses.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

N_POSITIONS = 14
N_DAYS = 7


class InstanceError(ValueError):
    """Raised when an instance is malformed or an operation cannot be applied."""


class InstanceFormatError(InstanceError):
    """The instance file does not follow the JSON schema."""


class EmptyFeasibleSetError(InstanceError):
    pass


class PatternKind(str, enum.Enum):
    DAY = "day"
    NIGHT = "night"
    COMBINED = "combined"


@dataclass(frozen=True)
class ShiftPattern:
    id: int
    covers: tuple[bool, ...]
    kind: PatternKind

    @classmethod
    def from_positions(cls, id: int, positions: Sequence[int], kind: PatternKind | None = None):
        covers = [False] * N_POSITIONS
        for k in positions:
            covers[k] = True
        return cls(id, tuple(covers), kind or infer_kind(covers))

    @property
    def n_days(self) -> int:
        return sum(self.covers[:N_DAYS])

    @property
    def n_nights(self) -> int:
        return sum(self.covers[N_DAYS:])

    @property
    def n_shifts(self) -> int:
        return sum(self.covers)


def infer_kind(covers: Sequence[bool]) -> PatternKind:
    days, nights = any(covers[:N_DAYS]), any(covers[N_DAYS:])
    if days and nights:
        return PatternKind.COMBINED
    return PatternKind.NIGHT if nights else PatternKind.DAY


@dataclass(frozen=True)
class Nurse:
    id: int
    grade: int
    days: int | None = None
    nights: int | None = None
    both: int | None = None
    preference_cost: Mapping[int, float] = field(default_factory=dict)

    def qualifies(self, s: int) -> bool:
        """q_is: the nurse counts towards grade-``s`` demand (1 = highest grade)."""
        return self.grade <= s


@dataclass(frozen=True, eq=False)
class Instance:
    nurses: tuple[Nurse, ...]
    patterns: tuple[ShiftPattern, ...]
    demand: np.ndarray  # (14, grades), cumulative by grade
    grades: int = 3
    name: str = ""

    def __post_init__(self):
        demand = np.asarray(self.demand, dtype=np.int64)
        demand.setflags(write=False)
        object.__setattr__(self, "demand", demand)
        object.__setattr__(self, "nurses", tuple(self.nurses))
        object.__setattr__(self, "patterns", tuple(self.patterns))

    @property
    def n_nurses(self) -> int:
        return len(self.nurses)

    @property
    def n_patterns(self) -> int:
        return len(self.patterns)

    @cached_property
    def feasible_sets(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(feasible_set(self, nurse)) for nurse in self.nurses)

    @cached_property
    def qualification(self) -> np.ndarray:
        """(n, grades) 0/1 matrix q_is."""
        q = np.zeros((self.n_nurses, self.grades), dtype=np.int64)
        for i, nurse in enumerate(self.nurses):
            q[i, nurse.grade - 1:] = 1
        q.setflags(write=False)
        return q

    @cached_property
    def cover_matrix(self) -> np.ndarray:
        """(m, 14) 0/1 matrix a_jk."""
        a = np.array([p.covers for p in self.patterns], dtype=np.int64).reshape(-1, N_POSITIONS)
        a.setflags(write=False)
        return a

    def search_space_size(self) -> int:
        size = 1
        for fs in self.feasible_sets:
            size *= len(fs)
        return size


def feasible_set(instance: Instance, nurse: Nurse) -> list[int]:
    """Pattern ids whose shift counts match the nurse's contract.

    Day patterns must cover exactly ``days`` days, night patterns exactly
    ``nights`` nights and combined patterns exactly ``both`` shifts. A
    contract value of ``None`` excludes that kind of pattern.
    """
    out = []
    for pattern in instance.patterns:
        if pattern.kind is PatternKind.DAY:
            ok = nurse.days is not None and pattern.n_days == nurse.days
        elif pattern.kind is PatternKind.NIGHT:
            ok = nurse.nights is not None and pattern.n_nights == nurse.nights
        else:
            ok = nurse.both is not None and pattern.n_shifts == nurse.both
        if ok:
            out.append(pattern.id)
    if not out:
        raise EmptyFeasibleSetError(f"nurse {nurse.id + 1} has no feasible shift pattern")
    return sorted(out)


def coverage_of(instance: Instance, assignment: Mapping[int, int]) -> np.ndarray:
    """Number of assigned nurses of grade ``s`` or higher covering each position.

    Returns a (14, grades) integer matrix.
    """
    covered = np.zeros((N_POSITIONS, instance.grades), dtype=np.int64)
    for i, j in assignment.items():
        if not 0 <= i < instance.n_nurses:
            raise InstanceError(f"unknown nurse index {i}")
        if not 0 <= j < instance.n_patterns:
            raise InstanceError(f"unknown pattern index {j}")
        covered += np.outer(instance.cover_matrix[j], instance.qualification[i])
    return covered


def validate(instance: Instance) -> list[str]:
    problems: list[str] = []
    p = instance.grades
    if p < 1:
        problems.append(f"grades must be >= 1, got {p}")
    if instance.demand.shape != (N_POSITIONS, max(p, 0)):
        problems.append(f"demand must be a {N_POSITIONS} x {p} matrix, got shape {instance.demand.shape}")
    elif (instance.demand < 0).any():
        problems.append("demand has negative entries")

    for idx, pattern in enumerate(instance.patterns):
        if pattern.id != idx:
            problems.append(f"pattern at position {idx} has id {pattern.id + 1}, expected {idx + 1}")
        if len(pattern.covers) != N_POSITIONS:
            problems.append(f"pattern {pattern.id + 1} covers {len(pattern.covers)} positions, expected 14")
            continue
        if not any(pattern.covers):
            problems.append(f"pattern {pattern.id + 1} covers no shift")
        if pattern.kind is PatternKind.DAY and pattern.n_nights:
            problems.append(f"day pattern {pattern.id + 1} covers nights")
        if pattern.kind is PatternKind.NIGHT and pattern.n_days:
            problems.append(f"night pattern {pattern.id + 1} covers days")

    for idx, nurse in enumerate(instance.nurses):
        label = f"nurse {nurse.id + 1}"
        if nurse.id != idx:
            problems.append(f"nurse at position {idx} has id {nurse.id + 1}, expected {idx + 1}")
        if not 1 <= nurse.grade <= p:
            problems.append(f"{label}: grade {nurse.grade} outside 1..{p}")
        for j, cost in nurse.preference_cost.items():
            if not 0 <= j < instance.n_patterns:
                problems.append(f"{label}: cost given for unknown pattern {j + 1}")
            elif not 0 <= cost <= 100:
                problems.append(f"{label}: cost {cost} for pattern {j + 1} outside 0..100")
        try:
            fs = feasible_set(instance, nurse)
        except EmptyFeasibleSetError:
            problems.append(f"{label}: empty feasible set")
            continue
        fs_set = set(fs)
        missing = [j + 1 for j in fs if j not in nurse.preference_cost]
        if missing:
            problems.append(f"{label}: no cost for feasible patterns {missing}")
        extra = sorted(j + 1 for j in nurse.preference_cost
                       if 0 <= j < instance.n_patterns and j not in fs_set)
        if extra:
            problems.append(f"{label}: cost given for infeasible patterns {extra}")
    return problems


# -- JSON ---------------------------------------------------------------------

_TOP_KEYS = {"grades", "patterns", "nurses", "demand", "name", "meta"}
_PATTERN_KEYS = {"id", "covers", "kind"}
_NURSE_KEYS = {"id", "grade", "D", "N", "B", "costs"}
_COST_KEYS = {"pattern", "cost"}


def _check_keys(obj, allowed, required, where):
    if not isinstance(obj, dict):
        raise InstanceFormatError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise InstanceFormatError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise InstanceFormatError(f"{where}: missing keys {sorted(missing)}")


def _int(value, where):
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceFormatError(f"{where}: expected an integer, got {value!r}")
    return value


def instance_from_dict(data: dict) -> Instance:
    _check_keys(data, _TOP_KEYS, {"grades", "patterns", "nurses", "demand"}, "instance")
    grades = _int(data["grades"], "grades")

    patterns = []
    for n, raw in enumerate(data["patterns"]):
        where = f"patterns[{n}]"
        _check_keys(raw, _PATTERN_KEYS, {"id", "covers"}, where)
        covers = raw["covers"]
        if not isinstance(covers, list) or any(c not in (0, 1) for c in covers):
            raise InstanceFormatError(f"{where}: covers must be a list of 0/1")
        try:
            kind = PatternKind(raw["kind"]) if "kind" in raw else infer_kind(covers)
        except ValueError:
            raise InstanceFormatError(f"{where}: unknown kind {raw['kind']!r}") from None
        patterns.append(ShiftPattern(_int(raw["id"], where) - 1, tuple(bool(c) for c in covers), kind))
    patterns.sort(key=lambda p: p.id)

    nurses = []
    for n, raw in enumerate(data["nurses"]):
        where = f"nurses[{n}]"
        _check_keys(raw, _NURSE_KEYS, {"id", "grade", "costs"}, where)
        costs = {}
        for c in raw["costs"]:
            _check_keys(c, _COST_KEYS, _COST_KEYS, f"{where}.costs")
            cost = c["cost"]
            if isinstance(cost, bool) or not isinstance(cost, (int, float)):
                raise InstanceFormatError(f"{where}.costs: cost must be a number")
            costs[_int(c["pattern"], f"{where}.costs") - 1] = cost
        contract = {key: None if raw.get(key) is None else _int(raw[key], f"{where}.{key}")
                    for key in ("D", "N", "B")}
        nurses.append(Nurse(_int(raw["id"], where) - 1, _int(raw["grade"], where),
                            contract["D"], contract["N"], contract["B"], costs))
    nurses.sort(key=lambda nu: nu.id)

    demand = data["demand"]
    if (not isinstance(demand, list) or len(demand) != N_POSITIONS
            or any(not isinstance(row, list) or len(row) != grades for row in demand)):
        raise InstanceFormatError(f"demand must be a {N_POSITIONS} x {grades} array")
    demand = np.array([[_int(v, "demand") for v in row] for row in demand], dtype=np.int64)
    return Instance(tuple(nurses), tuple(patterns), demand, grades, data.get("name", ""))


def instance_to_dict(instance: Instance, meta: dict | None = None) -> dict:
    data: dict = {}
    if instance.name:
        data["name"] = instance.name
    if meta is not None:
        data["meta"] = meta
    data["grades"] = instance.grades
    data["patterns"] = [
        {"id": p.id + 1, "covers": [int(c) for c in p.covers], "kind": p.kind.value}
        for p in instance.patterns
    ]
    nurses = []
    for nurse in instance.nurses:
        entry = {"id": nurse.id + 1, "grade": nurse.grade}
        for key, value in (("D", nurse.days), ("N", nurse.nights), ("B", nurse.both)):
            if value is not None:
                entry[key] = value
        entry["costs"] = [{"pattern": j + 1, "cost": c} for j, c in sorted(nurse.preference_cost.items())]
        nurses.append(entry)
    data["nurses"] = nurses
    data["demand"] = instance.demand.tolist()
    return data


def dumps_instance(instance: Instance, meta: dict | None = None) -> str:
    """JSON text with one pattern, nurse or demand row per line."""
    data = instance_to_dict(instance, meta)
    parts = []
    for key, value in data.items():
        if isinstance(value, list):
            rows = ",\n  ".join(json.dumps(v) for v in value)
            parts.append(f' {json.dumps(key)}: [\n  {rows}\n ]')
        else:
            parts.append(f" {json.dumps(key)}: {json.dumps(value)}")
    return "{\n" + ",\n".join(parts) + "\n}\n"


def load_instance(path: str | Path) -> Instance:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: not valid JSON ({exc})") from None
    return instance_from_dict(data)


def save_instance(instance: Instance, path: str | Path, meta: dict | None = None) -> None:
    Path(path).write_text(dumps_instance(instance, meta))
