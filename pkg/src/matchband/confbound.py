"""Elimination-style confidence machinery shared by all algorithms.

Statistics refresh only when a count crosses the geometric schedule
k_l = ceil(4^(l+1) * ln(beta_l)); at a refresh the interval is
mean +/- sqrt(ln(beta_l) / k_l), so the half-width at level l is at most
2^-(l+1). Natural log throughout. Before the first refresh a tracker
reports infinite sentinel bounds so nothing can be eliminated on no data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import ParameterError

MAX_LEVEL = 40
_SATURATE = 2**62

A_ABOVE_B = "a_above_b"
B_ABOVE_A = "b_above_a"
UNDECIDED = "undecided"


class InvalidPolicyError(ParameterError):
    pass


@dataclass(frozen=True)
class BetaPolicy:
    """beta_l schedule; every mode is clamped so beta_l >= e (ln beta >= 1)."""

    mode: str
    coef: float  # multiplies l for exploration modes; equals beta itself for horizon

    @classmethod
    def horizon(cls, h: float) -> "BetaPolicy":
        if h <= 1.0:
            raise InvalidPolicyError(f"horizon must exceed 1, got {h}")
        return cls("horizon", float(h))

    @classmethod
    def pair_explore(cls, nrows: int, ncols: int, inv_delta: float) -> "BetaPolicy":
        if inv_delta <= 1.0:
            raise InvalidPolicyError("inv_delta must exceed 1")
        coef = math.pi * math.sqrt((nrows + 1) * (ncols + 1) * inv_delta / 3.0)
        return cls("pair_explore", coef)

    @classmethod
    def mono_explore(cls, n_items: int, inv_delta: float) -> "BetaPolicy":
        if inv_delta <= 1.0:
            raise InvalidPolicyError("inv_delta must exceed 1")
        # the duplicated problem tracks 4N(2N-1) = 2n(n-1) statistics, n = 2N
        coef = math.pi * math.sqrt(2.0 * n_items * (n_items - 1) * inv_delta / 3.0)
        return cls("mono_explore", coef)

    @classmethod
    def matching_id(cls, n_items: int, delta: float) -> "BetaPolicy":
        if not 0.0 < delta < 1.0:
            raise InvalidPolicyError("delta must lie in (0, 1)")
        coef = math.pi * math.sqrt(n_items / (3.0 * delta))
        return cls("matching_id", coef)

    def beta(self, level: int) -> float:
        if self.mode == "horizon":
            raw = self.coef
        else:
            raw = self.coef * max(level, 1)
        return max(raw, math.e)

    def log_beta(self, level: int) -> float:
        return math.log(self.beta(level))

    def thresholds(self, max_level: int = MAX_LEVEL) -> np.ndarray:
        """k_l for l = 0..max_level, saturating instead of overflowing."""
        ks = np.empty(max_level + 1, dtype=np.int64)
        for l in range(max_level + 1):
            val = math.ceil(4.0 ** (l + 1) * self.log_beta(l))
            ks[l] = min(int(val), _SATURATE)
        return ks


def level_threshold(level: int, policy: BetaPolicy) -> int:
    """k_l = ceil(4^(l+1) * ln(beta_l))."""
    if level < 0:
        raise ParameterError("level must be non-negative")
    beta = policy.beta(level)
    if beta <= 1.0:
        raise InvalidPolicyError(f"policy yields beta={beta} <= 1 at level {level}")
    return min(int(math.ceil(4.0 ** (level + 1) * math.log(beta))), _SATURATE)


@dataclass
class EliminationTracker:
    """Running (count, sum) with refresh-only bounds; scalar reference form."""

    count: int = 0
    sum: float = 0.0
    level: int = -1
    lower: float = -math.inf
    upper: float = math.inf
    fresh: bool = False


def ingest(tracker: EliminationTracker, observations: Sequence[float],
           policy: BetaPolicy) -> bool:
    """Fold observations in; refresh bounds if a k_l threshold was crossed."""
    tracker.count += len(observations)
    tracker.sum += float(np.sum(observations)) if len(observations) else 0.0
    new_level = tracker.level
    while new_level < MAX_LEVEL and level_threshold(new_level + 1, policy) <= tracker.count:
        new_level += 1
    if new_level > tracker.level:
        tracker.level = new_level
        mean = tracker.sum / tracker.count
        radius = math.sqrt(policy.log_beta(new_level) / level_threshold(new_level, policy))
        tracker.lower = mean - radius
        tracker.upper = mean + radius
        tracker.fresh = True
        return True
    tracker.fresh = False
    return False


def separated(a: EliminationTracker, b: EliminationTracker) -> str:
    if b.upper < a.lower:
        return A_ABOVE_B
    if a.upper < b.lower:
        return B_ABOVE_A
    return UNDECIDED


class TrackerBank:
    """Array of trackers sharing one policy; bounds change only at refreshes."""

    def __init__(self, shape, policy: BetaPolicy):
        self.policy = policy
        self.ks = policy.thresholds()
        self.radii = np.array(
            [math.sqrt(policy.log_beta(l) / self.ks[l]) for l in range(len(self.ks))]
        )
        self.shape = shape
        self.cnt = np.zeros(shape, dtype=np.int64)
        self.sm = np.zeros(shape, dtype=float)
        self.lvl = np.full(shape, -1, dtype=np.int64)
        self.lo = np.full(shape, -np.inf)
        self.hi = np.full(shape, np.inf)

    def reset(self) -> None:
        self.cnt.fill(0)
        self.sm.fill(0.0)
        self.lvl.fill(-1)
        self.lo.fill(-np.inf)
        self.hi.fill(np.inf)

    def set_policy(self, policy: BetaPolicy) -> None:
        """Swap the beta schedule; bounds are re-derived at the next refresh."""
        self.policy = policy
        self.ks = policy.thresholds()
        self.radii = np.array(
            [math.sqrt(policy.log_beta(l) / self.ks[l]) for l in range(len(self.ks))]
        )

    def refresh(self) -> bool:
        """Advance levels where counts crossed k_l; recompute those bounds."""
        new_lvl = np.searchsorted(self.ks, self.cnt, side="right") - 1
        moved = new_lvl > self.lvl
        if not np.any(moved):
            return False
        self.lvl = np.where(moved, new_lvl, self.lvl)
        means = self.sm[moved] / self.cnt[moved]
        rad = self.radii[new_lvl[moved]]
        self.lo[moved] = means - rad
        self.hi[moved] = means + rad
        return True
