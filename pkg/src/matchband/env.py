"""Stochastic semi-bandit reward simulation and regret accounting.

Regret is accounted in expectation (true means), so trajectories are exact
regardless of how observations are batched. Batched draws are
distribution-exact: a sum of c Bernoulli(p) draws is sampled as
Binomial(c, p), a sum of c N(mu, sigma^2) draws as N(c mu, c sigma^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    Gaussian,
    Matching,
    Rank1Instance,
    ShapeError,
    expected_reward,
    optimal_matching,
)


@dataclass(frozen=True)
class SeededRng:
    """(seed, stream_id) fully determines the draw sequence."""

    seed: int
    stream_id: int = 0

    def bit_generator(self) -> np.random.PCG64:
        return np.random.PCG64(np.random.SeedSequence((self.seed, self.stream_id)))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(self.bit_generator())

    def child(self, tag: int) -> "SeededRng":
        """Independent stream for auxiliary draws (e.g. label permutation)."""
        return SeededRng(self.seed, (self.stream_id << 8) + 0x9E + tag)


@dataclass(frozen=True)
class Feedback:
    observations: tuple[tuple[tuple[int, int], float], ...]


def sample_feedback(
    instance: Rank1Instance, matching: Matching, rng: np.random.Generator
) -> Feedback:
    """One noisy observation per pair of the played matching."""
    means = np.array([instance.mean(i, j) for i, j in matching.pairs])
    xs = _draw(means, instance, rng)
    return Feedback(tuple(zip(matching.pairs, map(float, xs))))


def _draw(means: np.ndarray, instance: Rank1Instance, rng: np.random.Generator) -> np.ndarray:
    if isinstance(instance.dist, Gaussian):
        sigma = instance.dist.sigma
        if sigma == 0.0:
            return means.copy()
        return means + sigma * rng.standard_normal(len(means))
    return (rng.random(len(means)) < means).astype(float)


def _draw_sums(
    means: np.ndarray, counts: np.ndarray, instance: Rank1Instance, rng: np.random.Generator
) -> np.ndarray:
    """Sums of `counts[k]` i.i.d. draws at `means[k]`, sampled in one shot."""
    if isinstance(instance.dist, Gaussian):
        sigma = instance.dist.sigma
        if sigma == 0.0:
            return means * counts
        return means * counts + sigma * np.sqrt(counts) * rng.standard_normal(len(means))
    return rng.binomial(counts.astype(np.int64), means).astype(float)


def checkpoint_grid(horizon: int) -> np.ndarray:
    """t in {1..100}, then multiplicatively spaced x1.05 (rounded up), plus T."""
    if horizon <= 0:
        return np.array([], dtype=np.int64)
    pts = list(range(1, min(horizon, 100) + 1))
    t = 100
    while t < horizon:
        t = math.ceil(t * 1.05)
        if t < horizon:
            pts.append(t)
    if pts[-1] != horizon:
        pts.append(horizon)
    return np.array(pts, dtype=np.int64)


class RegretLedger:
    """Running expected-regret accumulator with checkpointing at a fixed grid."""

    def __init__(self, grid: Optional[Sequence[int]] = None):
        self.t = 0
        self.cum_regret = 0.0
        self.checkpoints: list[tuple[int, float]] = []
        self._grid = np.asarray(grid if grid is not None else [], dtype=np.int64)
        self._gi = 0

    def record(self, gap: float) -> None:
        self.record_constant(gap, 1)

    def record_constant(self, gap: float, steps: int) -> None:
        """`steps` consecutive plays with identical per-step gap."""
        t0, c0 = self.t, self.cum_regret
        self.t = t0 + steps
        self.cum_regret = c0 + gap * steps
        while self._gi < len(self._grid) and self._grid[self._gi] <= self.t:
            g = int(self._grid[self._gi])
            self.checkpoints.append((g, c0 + gap * (g - t0)))
            self._gi += 1

    def record_batch(self, gaps: np.ndarray) -> None:
        """Consecutive plays with per-play gaps (exact intra-batch checkpoints).

        Accumulation is strictly sequential (cumsum seeded with the running
        total) so batched and play-by-play accounting agree bit-for-bit.
        """
        k = len(gaps)
        if k == 0:
            return
        t0 = self.t
        self.t = t0 + k
        seq = np.cumsum(np.concatenate(((self.cum_regret,), gaps)))
        self.cum_regret = float(seq[-1])
        while self._gi < len(self._grid) and self._grid[self._gi] <= self.t:
            g = int(self._grid[self._gi])
            self.checkpoints.append((g, float(seq[g - t0])))
            self._gi += 1


def record_step(ledger: RegretLedger, instance: Rank1Instance, matching: Matching,
                mode: str = "maximal") -> None:
    """Account one play of `matching` against the mode's oracle."""
    opt = expected_reward(instance, optimal_matching(instance, mode))
    ledger.record(opt - expected_reward(instance, matching))


class PairEnv:
    """Pair-selection protocol: one pair per time step, semi-bandit feedback.

    Algorithms address items through seeded permuted labels so that label
    order never leaks rank information.
    """

    def __init__(self, instance: Rank1Instance, rng: SeededRng,
                 horizon: Optional[int] = None, permute: bool = True):
        self.instance = instance
        self.gen = rng.generator()
        perm_gen = rng.child(1).generator()
        if instance.kind == "bipartite":
            n, m = instance.n_rows, instance.n_cols
            self.row_perm = perm_gen.permutation(n) if permute else np.arange(n)
            self.col_perm = perm_gen.permutation(m) if permute else np.arange(m)
            w = np.outer(instance.u, instance.v)
        else:
            n = m = instance.n_items
            self.row_perm = perm_gen.permutation(n) if permute else np.arange(n)
            self.col_perm = self.row_perm
            w = np.outer(instance.u, instance.u)
        # W in algorithm-label space
        self.w = w[np.ix_(self.row_perm, self.col_perm)]
        self.opt_value = float(
            expected_reward(instance, optimal_matching(instance, "minimal"))
        )
        self.sigma = instance.sigma()
        self.is_gaussian = isinstance(instance.dist, Gaussian)
        self.ledger = RegretLedger(checkpoint_grid(horizon) if horizon else None)

    @property
    def t(self) -> int:
        return self.ledger.t

    def play_batch(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Play pairs (rows[k], cols[k]) in order; one time step each."""
        means = self.w[rows, cols]
        if self.is_gaussian:
            xs = means.copy() if self.sigma == 0.0 else means + self.sigma * self.gen.standard_normal(len(means))
        else:
            xs = (self.gen.random(len(means)) < means).astype(float)
        self.ledger.record_batch(self.opt_value - means)
        return xs

    def to_instance_pair(self, pair: tuple[int, int]) -> tuple[int, int]:
        return int(self.row_perm[pair[0]]), int(self.col_perm[pair[1]])


class MatchingEnv:
    """Matching-selection protocol: one maximal matching per time step."""

    def __init__(self, instance: Rank1Instance, rng: SeededRng,
                 horizon: Optional[int] = None, permute: bool = True):
        if instance.kind != "monopartite":
            raise ShapeError("matching selection runs on monopartite instances")
        self.instance = instance
        self.gen = rng.generator()
        perm_gen = rng.child(1).generator()
        n = instance.n_items
        self.perm = perm_gen.permutation(n) if permute else np.arange(n)
        u = np.asarray(instance.u, dtype=float)[self.perm]
        self.values = u  # algorithm-label space
        self.w = np.outer(u, u)
        self.opt_value = float(
            expected_reward(instance, optimal_matching(instance, "maximal"))
        )
        self.sigma = instance.sigma()
        self.is_gaussian = isinstance(instance.dist, Gaussian)
        self.ledger = RegretLedger(checkpoint_grid(horizon) if horizon else None)

    @property
    def n_items(self) -> int:
        return len(self.values)

    @property
    def t(self) -> int:
        return self.ledger.t

    def matching_value(self, pairs: np.ndarray) -> float:
        return float(self.w[pairs[:, 0], pairs[:, 1]].sum())

    def play_matching(self, pairs: np.ndarray) -> np.ndarray:
        """Play one full matching (array of shape (N, 2)); returns per-pair xs."""
        means = self.w[pairs[:, 0], pairs[:, 1]]
        if self.is_gaussian:
            xs = means.copy() if self.sigma == 0.0 else means + self.sigma * self.gen.standard_normal(len(means))
        else:
            xs = (self.gen.random(len(means)) < means).astype(float)
        self.ledger.record(self.opt_value - float(means.sum()))
        return xs

    def play_many(self, matchings: Sequence[np.ndarray]) -> list[np.ndarray]:
        """Play a fixed sequence of matchings; draws are batched in order."""
        if not matchings:
            return []
        sizes = [len(m) for m in matchings]
        allpairs = np.concatenate(matchings, axis=0)
        means = self.w[allpairs[:, 0], allpairs[:, 1]]
        if self.is_gaussian:
            xs = means.copy() if self.sigma == 0.0 else means + self.sigma * self.gen.standard_normal(len(means))
        else:
            xs = (self.gen.random(len(means)) < means).astype(float)
        gaps = np.empty(len(matchings))
        off = 0
        for k, sz in enumerate(sizes):
            gaps[k] = self.opt_value - float(means[off : off + sz].sum())
            off += sz
        self.ledger.record_batch(gaps)
        return list(np.split(xs, np.cumsum(sizes)[:-1]))

    def play_repeated(self, pairs: np.ndarray, reps: int) -> np.ndarray:
        """Play the same matching `reps` consecutive steps; returns per-pair sums."""
        means = self.w[pairs[:, 0], pairs[:, 1]]
        counts = np.full(len(means), reps)
        if self.is_gaussian:
            if self.sigma == 0.0:
                sums = means * reps
            else:
                sums = means * reps + self.sigma * np.sqrt(float(reps)) * self.gen.standard_normal(len(means))
        else:
            sums = self.gen.binomial(counts, means).astype(float)
        self.ledger.record_constant(self.opt_value - float(means.sum()), reps)
        return sums

    def to_instance_matching(self, pairs: np.ndarray) -> Matching:
        return Matching.mono([(self.perm[a], self.perm[b]) for a, b in pairs])
