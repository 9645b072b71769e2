"""Chain-structured Bayesian network over rule choices.

Position ``i + 1``'s rule depends only on position ``i``'s rule. Learning is
counting over a set of selected rule strings, sampling is a roulette wheel
per position.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class ChainModel:
    initial: np.ndarray      # (n_rules,)
    transitions: np.ndarray  # (n - 1, n_rules, n_rules); [i, j, j'] = P(x_{i+1}=j' | x_i=j)
    alpha: float = 0.0

    @property
    def length(self) -> int:
        return self.transitions.shape[0] + 1

    @property
    def n_rules(self) -> int:
        return self.initial.shape[0]

    @classmethod
    def uniform(cls, length: int, n_rules: int) -> "ChainModel":
        return cls(np.full(n_rules, 1.0 / n_rules),
                   np.full((length - 1, n_rules, n_rules), 1.0 / n_rules))

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "initial": self.initial.tolist(),
                "transitions": self.transitions.tolist()}

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "ChainModel":
        n_rules = len(data["initial"])
        transitions = np.asarray(data["transitions"], dtype=np.float64).reshape(-1, n_rules, n_rules)
        return cls(np.asarray(data["initial"], dtype=np.float64), transitions, data.get("alpha", 0.0))

    def check(self, tol: float = 1e-9) -> None:
        if abs(self.initial.sum() - 1.0) > tol or (self.initial < 0).any():
            raise ValueError("initial distribution is not a probability vector")
        if self.transitions.size and (np.abs(self.transitions.sum(axis=2) - 1.0) > tol).any():
            raise ValueError("a transition row does not sum to 1")


def _as_matrix(selected) -> np.ndarray:
    if isinstance(selected, np.ndarray):
        strings = selected
    else:
        selected = [list(s) for s in selected]
        if not selected:
            raise ValueError("cannot learn from an empty selection")
        if len({len(s) for s in selected}) != 1:
            raise ValueError("rule strings differ in length")
        strings = np.array(selected)
    if strings.ndim != 2 or strings.shape[0] == 0 or strings.shape[1] == 0:
        raise ValueError("cannot learn from an empty selection")
    return strings.astype(np.int64, copy=False)


def learn(selected: Sequence[Sequence[int]] | np.ndarray, n_rules: int, alpha: float = 0.0) -> ChainModel:
    """Estimate the chain's probabilities by counting, with additive smoothing ``alpha``.

    A parent value that never occurs (and ``alpha == 0``) gets a uniform row.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    strings = _as_matrix(selected)
    if strings.min() < 0 or strings.max() >= n_rules:
        raise ValueError(f"rule ids must lie in 0..{n_rules - 1}")
    T, n = strings.shape

    first = np.bincount(strings[:, 0], minlength=n_rules).astype(np.float64)
    initial = (first + alpha) / (T + alpha * n_rules)

    pairs = np.zeros((n - 1, n_rules, n_rules), dtype=np.float64)
    if n > 1:
        pos = np.broadcast_to(np.arange(n - 1), (T, n - 1))
        np.add.at(pairs, (pos, strings[:, :-1], strings[:, 1:]), 1.0)
    parent = pairs.sum(axis=2, keepdims=True)
    denom = parent + alpha * n_rules
    with np.errstate(invalid="ignore", divide="ignore"):
        transitions = np.where(denom > 0, (pairs + alpha) / denom, 1.0 / n_rules)
    return ChainModel(initial, transitions, alpha)


def _roulette(cumulative: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Index of the slot hit by each ``u``; zero-width slots are never hit."""
    total = cumulative[..., -1:]
    return np.minimum((cumulative <= u[..., None] * total).sum(axis=-1), cumulative.shape[-1] - 1)


def sample_many(model: ChainModel, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` rule strings, returned as a (count, n) int array."""
    n = model.length
    u = rng.random((count, n))
    out = np.empty((count, n), dtype=np.int64)
    out[:, 0] = _roulette(np.cumsum(model.initial), u[:, 0])
    cum = np.cumsum(model.transitions, axis=2)
    for i in range(1, n):
        out[:, i] = _roulette(cum[i - 1, out[:, i - 1]], u[:, i])
    return out


def sample(model: ChainModel, rng: np.random.Generator) -> list[int]:
    return sample_many(model, 1, rng)[0].tolist()


def string_probability(model: ChainModel, s: Sequence[int]) -> float:
    if len(s) != model.length:
        raise ValueError(f"rule string must have length {model.length}")
    prob = float(model.initial[s[0]])
    for i in range(1, len(s)):
        prob *= float(model.transitions[i - 1, s[i - 1], s[i]])
    return prob


def all_strings(length: int, n_rules: int) -> Iterable[tuple[int, ...]]:
    return itertools.product(range(n_rules), repeat=length)
