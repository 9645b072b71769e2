"""Compiled inner loops for rule application and batch decoding.

Every picker returns a *slot* into the nurse's feasible row (not a pattern id).
Each rule application consumes exactly one uniform ``u`` in [0, 1) so that a
rule string and a (n,) uniform vector fully determine the roster.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

RANDOM, K_CHEAPEST, COVER, CONTRIBUTION = 0, 1, 2, 3


@dataclass(frozen=True)
class DecodeTables:
    feas: np.ndarray        # (n, max_f) pattern ids, padded with -1
    n_feas: np.ndarray      # (n,)
    feas_cost: np.ndarray   # (n, max_f) p_ij aligned with feas
    cheap: np.ndarray       # (n, max_f) slots sorted by (cost, pattern id)
    pat_pos: np.ndarray     # (m, 14) covered positions, padded with -1
    pat_npos: np.ndarray    # (m,)
    grade0: np.ndarray      # (n,) zero-based grade
    demand: np.ndarray      # (14, p)


def build_tables(instance) -> DecodeTables:
    fsets = instance.feasible_sets
    n, max_f = instance.n_nurses, max(len(fs) for fs in fsets)
    feas = np.full((n, max_f), -1, dtype=np.int64)
    feas_cost = np.zeros((n, max_f), dtype=np.float64)
    cheap = np.zeros((n, max_f), dtype=np.int64)
    for i, fs in enumerate(fsets):
        costs = [instance.nurses[i].preference_cost[j] for j in fs]
        feas[i, :len(fs)] = fs
        feas_cost[i, :len(fs)] = costs
        # fs is sorted by id, so a stable sort on cost breaks ties by smallest id
        cheap[i, :len(fs)] = np.argsort(np.asarray(costs, dtype=np.float64), kind="stable")
    a = instance.cover_matrix
    pat_pos = np.full(a.shape, -1, dtype=np.int64)
    pat_npos = a.sum(axis=1).astype(np.int64)
    for j in range(a.shape[0]):
        pos = np.flatnonzero(a[j])
        pat_pos[j, :len(pos)] = pos
    grade0 = np.array([nu.grade - 1 for nu in instance.nurses], dtype=np.int64)
    return DecodeTables(feas, np.array([len(fs) for fs in fsets], dtype=np.int64), feas_cost,
                        cheap, pat_pos, pat_npos, grade0, np.array(instance.demand, dtype=np.int64))


@njit(cache=True)
def pick_random(cnt, u):
    return min(int(u * cnt), cnt - 1)


@njit(cache=True)
def pick_k_cheapest(cheap_row, cnt, k, u):
    kk = min(k, cnt)
    return cheap_row[min(int(u * kk), kk - 1)]


@njit(cache=True)
def cover_level(residual, g0):
    for s in range(g0, residual.shape[1]):
        for k in range(residual.shape[0]):
            if residual[k, s] > 0:
                return s
    return -1


@njit(cache=True)
def pick_cover(residual, feas_row, cnt, g0, pat_pos, pat_npos, u):
    level = cover_level(residual, g0)
    if level < 0:
        return pick_random(cnt, u)
    best = 0
    n_best = 0
    for t in range(cnt):
        j = feas_row[t]
        v = 0
        for q in range(pat_npos[j]):
            r = residual[pat_pos[j, q], level]
            if r > v:
                v = r
        if v > best:
            best = v
            n_best = 1
        elif v == best:
            n_best += 1
    target = min(int(u * n_best), n_best - 1)
    for t in range(cnt):
        j = feas_row[t]
        v = 0
        for q in range(pat_npos[j]):
            r = residual[pat_pos[j, q], level]
            if r > v:
                v = r
        if v == best:
            if target == 0:
                return t
            target -= 1
    return cnt - 1  # unreachable


@njit(cache=True)
def pick_contribution(residual, feas_row, cost_row, cnt, g0, pat_pos, pat_npos, w_pref, w_grade):
    cell = np.zeros(residual.shape[0])
    for k in range(residual.shape[0]):
        for s in range(g0, residual.shape[1]):
            if residual[k, s] > 0:
                cell[k] += w_grade[s]
    best = -np.inf
    arg = 0
    for t in range(cnt):
        j = feas_row[t]
        score = w_pref * (100.0 - cost_row[t])
        for q in range(pat_npos[j]):
            score += cell[pat_pos[j, q]]
        if score > best:
            best = score
            arg = t
    return arg


@njit(cache=True)
def pick_slot(rule, i, residual, feas, n_feas, feas_cost, cheap, pat_pos, pat_npos, grade0,
              k, w_pref, w_grade, u):
    cnt = n_feas[i]
    if rule == RANDOM:
        return pick_random(cnt, u)
    if rule == K_CHEAPEST:
        return pick_k_cheapest(cheap[i], cnt, k, u)
    if rule == COVER:
        return pick_cover(residual, feas[i], cnt, grade0[i], pat_pos, pat_npos, u)
    if rule == CONTRIBUTION:
        return pick_contribution(residual, feas[i], feas_cost[i], cnt, grade0[i],
                                 pat_pos, pat_npos, w_pref, w_grade)
    return -1


@njit(cache=True)
def assign(residual, j, g0, pat_pos, pat_npos):
    for q in range(pat_npos[j]):
        k = pat_pos[j, q]
        for s in range(g0, residual.shape[1]):
            residual[k, s] -= 1


@njit(cache=True)
def decode_one(rules, uniforms, feas, n_feas, feas_cost, cheap, pat_pos, pat_npos, grade0,
               demand, k, w_pref, w_grade, out_assign):
    """Build one roster; returns (total preference cost, undercover units)."""
    residual = demand.copy()
    total = 0.0
    for i in range(rules.shape[0]):
        t = pick_slot(rules[i], i, residual, feas, n_feas, feas_cost, cheap, pat_pos,
                      pat_npos, grade0, k, w_pref, w_grade, uniforms[i])
        j = feas[i, t]
        out_assign[i] = j
        total += feas_cost[i, t]
        assign(residual, j, grade0[i], pat_pos, pat_npos)
    under = 0
    for kk in range(residual.shape[0]):
        for s in range(residual.shape[1]):
            if residual[kk, s] > 0:
                under += residual[kk, s]
    return total, under


def _decode_batch(rules, uniforms, feas, n_feas, feas_cost, cheap, pat_pos, pat_npos, grade0,
                  demand, k, w_pref, w_grade, out_assign, out_pref, out_under):
    for b in prange(rules.shape[0]):
        total, under = decode_one(rules[b], uniforms[b], feas, n_feas, feas_cost, cheap, pat_pos,
                                  pat_npos, grade0, demand, k, w_pref, w_grade, out_assign[b])
        out_pref[b] = total
        out_under[b] = under


decode_batch_serial = njit(cache=True)(_decode_batch)
decode_batch_parallel = njit(cache=True, parallel=True)(_decode_batch)
