"""Bipartite pair selection with two-timescale elimination.

Rows are eliminated against the full horizon; columns are eliminated inside
doubly-exponentially growing windows (length 2^(2^w)) and reinstated at every
window boundary. The single-window degenerate of the same engine (no resets,
column confidence tied to the horizon) serves as the Rank1Elim baseline.

A compiled kernel covers the regret-mode hot loop when the extension built;
the pure path is numpy-vectorized per sweep. Both consume the identical RNG
stream and produce bit-identical trajectories.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .confbound import MAX_LEVEL, BetaPolicy
from .core import RefusalError, Rank1Instance, ShapeError, compute_gaps
from .env import PairEnv, SeededRng
from .records import RunRecord

_WINDOW_CAP = 2**62
_EXPLORE_SAMPLE_CAP = 2**38


def window_length(w: int) -> int:
    """2^(2^w), saturating well before integer overflow."""
    if 2**w >= 62:
        return _WINDOW_CAP
    return 2 ** (2**w)


def domination_map(q_plus: np.ndarray, q_minus: np.ndarray) -> np.ndarray:
    """h(i): the largest-label item dominating i on some shared coordinate.

    Bounds arrays have shape (n, k); coordinate 0 is the aggregate tracker.
    An item with no dominator maps to itself.
    """
    dom = (q_plus[:, None, :] < q_minus[None, :, :]).any(axis=2)
    h = np.arange(q_plus.shape[0])
    for i in np.nonzero(dom.any(axis=1))[0]:
        h[i] = np.nonzero(dom[i])[0].max()
    return h


class _Bank:
    """Per-entry + aggregate trackers for one side (rows or columns).

    Sums/counts live in (n, m) matrices owned by the engine; this class keeps
    levels and bounds, shape (n, m+1) with coordinate 0 the aggregate.
    """

    def __init__(self, n: int, m: int, policy: BetaPolicy):
        self.n, self.m = n, m
        self.set_policy(policy)
        self.lvl = np.full((n, m + 1), -1, dtype=np.int64)
        self.q_minus = np.full((n, m + 1), -np.inf)
        self.q_plus = np.full((n, m + 1), np.inf)

    def set_policy(self, policy: BetaPolicy) -> None:
        self.policy = policy
        self.ks = policy.thresholds(MAX_LEVEL)
        self.radii = np.array(
            [math.sqrt(policy.log_beta(l) / self.ks[l]) for l in range(MAX_LEVEL + 1)]
        )

    def reset(self) -> None:
        self.lvl.fill(-1)
        self.q_minus.fill(-np.inf)
        self.q_plus.fill(np.inf)

    def refresh_entries(self, idx: np.ndarray, coord: int,
                        sums: np.ndarray, cnts: np.ndarray) -> bool:
        """Refresh per-entry trackers (idx, coord) from their sums/counts."""
        new_lvl = np.searchsorted(self.ks, cnts, side="right") - 1
        cur = self.lvl[idx, coord]
        moved = new_lvl > cur
        if not np.any(moved):
            return False
        rows = idx[moved]
        lv = new_lvl[moved]
        means = sums[moved] / cnts[moved]
        self.lvl[rows, coord] = lv
        self.q_minus[rows, coord] = means - self.radii[lv]
        self.q_plus[rows, coord] = means + self.radii[lv]
        return True

    def refresh_aggregates(self, idx: np.ndarray, sums: np.ndarray,
                           cnts: np.ndarray) -> bool:
        return self.refresh_entries(idx, 0, sums, cnts)


@dataclass
class PairElimResult:
    record: RunRecord
    total_plays: np.ndarray  # (N, M) play counts in algorithm-label space
    windows_completed: int


def _run_bipartite(
    instance: Rank1Instance,
    seed: int,
    *,
    horizon: Optional[int] = None,
    delta: Optional[float] = None,
    windowed: bool = True,
    algo: str = "pair_elim",
    use_kernel: bool = True,
    permute: bool = True,
) -> PairElimResult:
    if instance.kind != "bipartite":
        raise ShapeError(f"{algo} requires a bipartite instance")
    explore = delta is not None
    if explore:
        gaps = compute_gaps(instance)
        if np.sort(gaps.delta_row)[1] == 0.0 or np.sort(gaps.delta_col)[1] == 0.0:
            raise RefusalError("pure exploration requires a unique best pair")

    rng = SeededRng(seed)
    env = PairEnv(instance, rng, horizon=horizon, permute=permute)
    n, m = env.w.shape

    if explore:
        row_policy = BetaPolicy.pair_explore(n, m, 1.0 / delta)
    else:
        row_policy = BetaPolicy.horizon(max(float(horizon), 2.0))

    if not explore and use_kernel:
        from ._kernels import pair_elim_kernel

        if pair_elim_kernel is not None:
            return _run_kernel(env, instance, seed, horizon, windowed, algo,
                               row_policy, pair_elim_kernel)

    return _run_pure(env, instance, seed, horizon, delta, windowed, algo, row_policy)


def _col_policy(windowed: bool, w: int, horizon: Optional[int]) -> BetaPolicy:
    if windowed:
        return BetaPolicy.horizon(max(float(window_length(w)), 2.0))
    return BetaPolicy.horizon(max(float(horizon), 2.0))


def _run_pure(env, instance, seed, horizon, delta, windowed, algo, row_policy):
    explore = delta is not None
    n, m = env.w.shape
    gen = env.gen

    x = np.zeros((n, m))
    c = np.zeros((n, m), dtype=np.int64)
    xw = np.zeros((n, m))
    cw = np.zeros((n, m), dtype=np.int64)
    total_plays = np.zeros((n, m), dtype=np.int64)
    # running aggregates keep float accumulation order identical to the kernel
    rowagg_sum = np.zeros(n)
    rowagg_cnt = np.zeros(n, dtype=np.int64)
    colagg_sum = np.zeros(m)
    colagg_cnt = np.zeros(m, dtype=np.int64)

    rows = _Bank(n, m, row_policy)
    w_idx = 0
    cols = _Bank(m, n, _col_policy(windowed, w_idx, horizon))
    s = 0
    windows_completed = 0
    resets_active = windowed
    col_phase = False

    h_u = np.arange(n)
    h_v = np.arange(m)
    i_set = np.arange(n)
    j_set = np.arange(m)
    rows_dirty = cols_dirty = False

    recommendation = None
    all_rows = np.arange(n)
    all_cols = np.arange(m)

    while True:
        if horizon is not None and env.t >= horizon:
            break
        if explore and env.t > _EXPLORE_SAMPLE_CAP:
            raise RuntimeError("exploration sample cap exceeded")

        if cols_dirty:
            h_v = domination_map(cols.q_plus, cols.q_minus)
            j_set = np.unique(h_v)
            cols_dirty = False
        if rows_dirty:
            h_u = domination_map(rows.q_plus, rows.q_minus)
            i_set = np.unique(h_u)
            rows_dirty = False

        if explore and not col_phase and len(i_set) == 1:
            # best row found: restart column exploration at high confidence
            col_phase = True
            resets_active = False
            xw.fill(0.0)
            cw.fill(0)
            colagg_sum.fill(0.0)
            colagg_cnt.fill(0)
            s = 0
            cols.set_policy(BetaPolicy.pair_explore(n, m, 1.0 / delta))
            cols.reset()
            h_v = all_cols.copy()
            j_set = all_cols.copy()
        if explore and col_phase and len(j_set) == 1:
            recommendation = (int(i_set[0]), int(j_set[0]))
            break

        # row exploration: all representative rows against one random column
        j_pick = h_v[min(int(gen.random() * m), m - 1)]
        play_rows = i_set
        if horizon is not None:
            room = horizon - env.t
            play_rows = play_rows[:room]
        xs = env.play_batch(play_rows, np.full(len(play_rows), j_pick))
        x[play_rows, j_pick] += xs
        c[play_rows, j_pick] += 1
        rowagg_sum[play_rows] += xs
        rowagg_cnt[play_rows] += 1
        total_plays[play_rows, j_pick] += 1
        s += len(play_rows)
        if rows.refresh_entries(play_rows, j_pick + 1,
                                x[play_rows, j_pick], c[play_rows, j_pick]):
            rows_dirty = True
        if rows.refresh_aggregates(play_rows, rowagg_sum[play_rows],
                                   rowagg_cnt[play_rows]):
            rows_dirty = True
        if horizon is not None and env.t >= horizon:
            break

        # column exploration: all representative columns against one random row
        i_pick = h_u[min(int(gen.random() * n), n - 1)]
        play_cols = j_set
        if horizon is not None:
            room = horizon - env.t
            play_cols = play_cols[:room]
        xs = env.play_batch(np.full(len(play_cols), i_pick), play_cols)
        xw[i_pick, play_cols] += xs
        cw[i_pick, play_cols] += 1
        colagg_sum[play_cols] += xs
        colagg_cnt[play_cols] += 1
        total_plays[i_pick, play_cols] += 1
        s += len(play_cols)
        if cols.refresh_entries(play_cols, i_pick + 1,
                                xw[i_pick, play_cols], cw[i_pick, play_cols]):
            cols_dirty = True
        if cols.refresh_aggregates(play_cols, colagg_sum[play_cols],
                                   colagg_cnt[play_cols]):
            cols_dirty = True

        if resets_active and s > window_length(w_idx):
            s = 0
            xw.fill(0.0)
            cw.fill(0)
            colagg_sum.fill(0.0)
            colagg_cnt.fill(0)
            w_idx += 1
            windows_completed += 1
            cols.set_policy(_col_policy(True, w_idx, horizon))
            cols.reset()
            h_v = all_cols.copy()
            j_set = all_cols.copy()
            cols_dirty = False

    if explore:
        inst_pair = env.to_instance_pair(recommendation)
        correct = math.isclose(
            instance.mean(*inst_pair), env.opt_value, rel_tol=1e-12, abs_tol=1e-15
        )
        record = RunRecord(
            algo=algo, instance_digest=instance.digest(), mode="explore",
            seed=seed, tau=env.t, correct=correct, recommendation=inst_pair,
        )
    else:
        record = RunRecord(
            algo=algo, instance_digest=instance.digest(), mode="regret",
            seed=seed, checkpoints=tuple(env.ledger.checkpoints),
        )
    return PairElimResult(record, total_plays, windows_completed)


def _run_kernel(env, instance, seed, horizon, windowed, algo, row_policy, kernel):
    n, m = env.w.shape
    # per-window column policies; cumulative window lengths exceed any horizon
    n_windows = 1
    if windowed:
        total = 0
        while total <= horizon:
            total += window_length(n_windows - 1)
            n_windows += 1
        n_windows += 1
    ks_col = np.empty((n_windows, MAX_LEVEL + 1), dtype=np.int64)
    rad_col = np.empty((n_windows, MAX_LEVEL + 1))
    win_len = np.empty(n_windows, dtype=np.int64)
    for w in range(n_windows):
        pol = _col_policy(windowed, w, horizon)
        ks_col[w] = pol.thresholds(MAX_LEVEL)
        rad_col[w] = [
            math.sqrt(pol.log_beta(l) / ks_col[w, l]) for l in range(MAX_LEVEL + 1)
        ]
        win_len[w] = window_length(w) if windowed else _WINDOW_CAP

    ks_row = row_policy.thresholds(MAX_LEVEL)
    rad_row = np.array(
        [math.sqrt(row_policy.log_beta(l) / ks_row[l]) for l in range(MAX_LEVEL + 1)]
    )
    grid = env.ledger._grid

    cps, total_plays, windows_completed = kernel(
        env.w,
        float(env.opt_value),
        int(horizon),
        grid,
        ks_row,
        rad_row,
        ks_col,
        rad_col,
        win_len,
        1 if windowed else 0,
        1 if env.is_gaussian else 0,
        float(env.sigma),
        env.gen.bit_generator,
    )
    record = RunRecord(
        algo=algo, instance_digest=instance.digest(), mode="regret",
        seed=seed, checkpoints=tuple((int(t), float(v)) for t, v in cps),
    )
    return PairElimResult(record, total_plays, windows_completed)


def run_regret(instance: Rank1Instance, horizon: int, seed: int,
               use_kernel: bool = True) -> RunRecord:
    """Pair-Elim in regret-minimization mode (delta = 1/T)."""
    return _run_bipartite(
        instance, seed, horizon=horizon, windowed=True, algo="pair_elim",
        use_kernel=use_kernel,
    ).record


def run_explore(instance: Rank1Instance, delta: float, seed: int) -> RunRecord:
    """Pair-Elim in pure-exploration mode: recommend the best pair."""
    return _run_bipartite(
        instance, seed, delta=delta, windowed=True, algo="pair_elim",
    ).record


def run_regret_diag(instance: Rank1Instance, horizon: int, seed: int,
                    use_kernel: bool = True, windowed: bool = True,
                    algo: str = "pair_elim") -> PairElimResult:
    """Regret run returning per-pair play counts (test instrumentation)."""
    return _run_bipartite(
        instance, seed, horizon=horizon, windowed=windowed, algo=algo,
        use_kernel=use_kernel,
    )
