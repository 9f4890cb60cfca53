"""Ground-truth domain types, gap computations, and matching combinatorics.

Item ids are 0-based everywhere. For monopartite instances a "pair" is an
unordered pair of item ids stored as (min, max); for bipartite instances a
pair is (row_id, col_id) with the two ids living in separate index spaces.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

MAX_ENUM_ITEMS = 12


class MatchbandError(Exception):
    pass


class ShapeError(MatchbandError):
    """Instance kind/shape does not fit the requested operation."""


class ParameterError(MatchbandError):
    """Out-of-range generator or instance parameters."""


class RefusalError(MatchbandError):
    """Instance violates a precondition of a pure-exploration driver."""


class EnumerationError(MatchbandError):
    """Exhaustive enumeration requested beyond the guard size."""


@dataclass(frozen=True)
class Bernoulli:
    name: str = field(default="bernoulli", init=False)


@dataclass(frozen=True)
class Gaussian:
    sigma: float = 1.0
    name: str = field(default="gaussian", init=False)


Dist = Bernoulli | Gaussian


def _readonly(a) -> np.ndarray:
    arr = np.asarray(a, dtype=float).copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Rank1Instance:
    """Hidden ground truth: W = u v^T (bipartite) or W = u u^T (monopartite)."""

    kind: str
    u: np.ndarray
    v: Optional[np.ndarray] = None
    dist: Dist = Bernoulli()

    def __post_init__(self):
        object.__setattr__(self, "u", _readonly(self.u))
        if self.kind == "bipartite":
            if self.v is None:
                raise ParameterError("bipartite instance requires v")
            object.__setattr__(self, "v", _readonly(self.v))
        elif self.kind == "monopartite":
            if self.v is not None:
                raise ParameterError("monopartite instance must not carry v")
            if len(self.u) % 2 != 0:
                raise ParameterError("monopartite instance needs an even number of items")
        else:
            raise ParameterError(f"unknown kind {self.kind!r}")
        for vec in (self.u,) if self.v is None else (self.u, self.v):
            if vec.size == 0:
                raise ParameterError("empty parameter vector")
            if np.any(vec < 0.0) or np.any(vec > 1.0):
                raise ParameterError("parameter entries must lie in [0, 1]")

    @property
    def n_rows(self) -> int:
        return len(self.u)

    @property
    def n_cols(self) -> int:
        return len(self.v) if self.v is not None else len(self.u)

    @property
    def n_items(self) -> int:
        if self.kind != "monopartite":
            raise ShapeError("n_items is defined for monopartite instances")
        return len(self.u)

    def mean(self, i: int, j: int) -> float:
        """Expected reward of pair (i, j)."""
        if self.kind == "bipartite":
            return float(self.u[i] * self.v[j])
        return float(self.u[i] * self.u[j])

    def sigma(self) -> float:
        return self.dist.sigma if isinstance(self.dist, Gaussian) else 0.0

    def to_json(self) -> str:
        obj = {"kind": self.kind, "u": list(map(float, self.u))}
        if self.v is not None:
            obj["v"] = list(map(float, self.v))
        if isinstance(self.dist, Bernoulli):
            obj["dist"] = "bernoulli"
        else:
            obj["dist"] = {"gaussian": {"sigma": float(self.dist.sigma)}}
        return json.dumps(obj, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "Rank1Instance":
        obj = json.loads(text)
        dist_spec = obj.get("dist", "bernoulli")
        if dist_spec == "bernoulli":
            dist: Dist = Bernoulli()
        elif isinstance(dist_spec, dict) and "gaussian" in dist_spec:
            dist = Gaussian(float(dist_spec["gaussian"].get("sigma", 1.0)))
        else:
            raise ParameterError(f"unknown dist spec {dist_spec!r}")
        return cls(kind=obj["kind"], u=obj["u"], v=obj.get("v"), dist=dist)

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:12]


@dataclass(frozen=True)
class Matching:
    """A set of vertex-disjoint pairs; equality is pair-set equality."""

    pairs: tuple[tuple[int, int], ...]

    @classmethod
    def mono(cls, pairs: Iterable[Sequence[int]]) -> "Matching":
        canon = sorted((min(a, b), max(a, b)) for a, b in pairs)
        return cls(tuple((int(a), int(b)) for a, b in canon))

    @classmethod
    def bipartite(cls, pairs: Iterable[Sequence[int]]) -> "Matching":
        return cls(tuple(sorted((int(a), int(b)) for a, b in pairs)))

    def __len__(self) -> int:
        return len(self.pairs)

    def items(self) -> list[int]:
        return [x for p in self.pairs for x in p]


def validate_matching(instance: Rank1Instance, matching: Matching, mode: str = "any") -> None:
    """Raise unless `matching` is well-formed for `instance` (and `mode`)."""
    if instance.kind == "bipartite":
        rows = [i for i, _ in matching.pairs]
        cols = [j for _, j in matching.pairs]
        if any(i < 0 or i >= instance.n_rows for i in rows) or any(
            j < 0 or j >= instance.n_cols for j in cols
        ):
            raise IndexError("pair references an out-of-range item")
        if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
            raise ParameterError("pairs share a vertex")
        if mode == "maximal" and not (
            len(matching.pairs) == instance.n_rows == instance.n_cols
        ):
            raise ParameterError("maximal bipartite matching must cover all rows and columns")
    else:
        items = matching.items()
        if any(x < 0 or x >= instance.n_items for x in items):
            raise IndexError("pair references an out-of-range item")
        if len(set(items)) != len(items):
            raise ParameterError("pairs share a vertex")
        if any(a == b for a, b in matching.pairs):
            raise ParameterError("monopartite pair cannot match an item with itself")
        if mode == "maximal" and len(items) != instance.n_items:
            raise ParameterError("maximal matching must cover all items")
    if mode == "minimal" and len(matching.pairs) != 1:
        raise ParameterError("minimal matching must contain exactly one pair")


def ranked_items(values: np.ndarray) -> np.ndarray:
    """Item ids sorted by decreasing value; ties broken by lowest id."""
    values = np.asarray(values, dtype=float)
    return np.lexsort((np.arange(len(values)), -values))


def optimal_matching(instance: Rank1Instance, mode: str) -> Matching:
    """Best minimal (single-pair) or maximal matching; ties go to lowest ids."""
    if mode not in ("minimal", "maximal"):
        raise ParameterError(f"unknown mode {mode!r}")
    if instance.kind == "bipartite":
        ru = ranked_items(instance.u)
        rv = ranked_items(instance.v)
        if mode == "minimal":
            return Matching.bipartite([(ru[0], rv[0])])
        if instance.n_rows != instance.n_cols:
            raise ShapeError("maximal bipartite matching needs N == M")
        return Matching.bipartite(zip(ru, rv))
    order = ranked_items(instance.u)
    if mode == "minimal":
        return Matching.mono([(order[0], order[1])])
    return Matching.mono([(order[2 * k], order[2 * k + 1]) for k in range(len(order) // 2)])


def expected_reward(instance: Rank1Instance, matching: Matching) -> float:
    """Sum of pair means over the matching."""
    total = 0.0
    for i, j in matching.pairs:
        if instance.kind == "bipartite":
            if not (0 <= i < instance.n_rows and 0 <= j < instance.n_cols):
                raise IndexError(f"pair ({i}, {j}) out of range")
        else:
            n = instance.n_items
            if not (0 <= i < n and 0 <= j < n):
                raise IndexError(f"pair ({i}, {j}) out of range")
        total += instance.mean(i, j)
    return total


def round_robin_schedule(items: Sequence[int]) -> list[list[tuple[int, int]]]:
    """Circle-method tournament: every unordered pair meets exactly once.

    Even n gives n-1 rounds of perfect matchings; odd n gives n rounds with
    one bye per round. Fewer than 2 items gives an empty schedule.
    """
    items = list(items)
    n = len(items)
    if n < 2:
        return []
    arr: list[Optional[int]] = items + ([None] if n % 2 else [])
    m = len(arr)
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for i in range(m // 2):
            a, b = arr[i], arr[m - 1 - i]
            if a is not None and b is not None:
                pairs.append((min(a, b), max(a, b)))
        rounds.append(pairs)
        arr = [arr[0], arr[-1]] + arr[1:-1]
    return rounds


def enumerate_perfect_matchings(n_items: int) -> list[Matching]:
    """All perfect matchings on items 0..n_items-1; count is (2N)!/(2^N N!)."""
    if n_items % 2 != 0:
        raise EnumerationError("perfect matchings need an even number of items")
    if n_items > MAX_ENUM_ITEMS:
        raise EnumerationError(f"refusing to enumerate beyond {MAX_ENUM_ITEMS} items")
    out: list[Matching] = []

    def rec(free: list[int], acc: list[tuple[int, int]]):
        if not free:
            out.append(Matching(tuple(acc)))
            return
        a = free[0]
        for k in range(1, len(free)):
            b = free[k]
            rec(free[1:k] + free[k + 1 :], acc + [(a, b)])

    rec(list(range(n_items)), [])
    return out


def matching_count(n_items: int) -> int:
    """(2N)!/(2^N N!) for n_items = 2N."""
    n = n_items // 2
    return math.factorial(n_items) // (2**n * math.factorial(n))


@dataclass(frozen=True)
class GapSummary:
    """Instance gap quantities; monopartite boundary indices are 0-based.

    Boundary k (0-based, k in [0, N-2]) separates sorted ranks 2k+1 and 2k+2
    (1-based), i.e. the k-th and (k+1)-th optimal pairs.
    """

    delta_row: np.ndarray
    delta_col: Optional[np.ndarray] = None
    delta_2i: Optional[np.ndarray] = None
    delta_pairsel: Optional[np.ndarray] = None
    delta_min: Optional[float] = None
    delta_min_approximate: bool = False
    gamma_min: Optional[float] = None
    mu_excl: Optional[np.ndarray] = None
    s_index: Optional[int] = None
    h_index: Optional[int] = None


def _delta_min_enumerated(w: np.ndarray) -> float:
    n = len(w)
    inst_order_value = sum(w[2 * k] * w[2 * k + 1] for k in range(n // 2))
    best_other = -np.inf
    opt_pairs = frozenset((2 * k, 2 * k + 1) for k in range(n // 2))
    for m in enumerate_perfect_matchings(n):
        if frozenset(m.pairs) == opt_pairs:
            continue
        val = sum(w[a] * w[b] for a, b in m.pairs)
        best_other = max(best_other, val)
    return float(inst_order_value - best_other)


def _delta_min_adjacent(w: np.ndarray) -> float:
    n = len(w)
    losses = []
    for k in range(1, n // 2):
        # swap the two items adjacent to boundary k (sorted positions 2k-1, 2k)
        losses.append((w[2 * k - 2] - w[2 * k + 1]) * (w[2 * k - 1] - w[2 * k]))
    return float(min(losses))


def compute_gaps(instance: Rank1Instance) -> GapSummary:
    """Populate every gap quantity the algorithms and bounds consume."""
    u_sorted = np.sort(np.asarray(instance.u, dtype=float))[::-1]
    delta_row = u_sorted[0] - np.asarray(instance.u, dtype=float)
    if instance.kind == "bipartite":
        v_sorted = np.sort(np.asarray(instance.v, dtype=float))[::-1]
        delta_col = v_sorted[0] - np.asarray(instance.v, dtype=float)
        return GapSummary(delta_row=delta_row, delta_col=delta_col)

    w = u_sorted
    two_n = len(w)
    n_pairs = two_n // 2

    # boundary gaps u_{2k} - u_{2k+1} (paper 1-based), k = 1..N-1
    delta_2i = np.array([w[2 * k - 1] - w[2 * k] for k in range(1, n_pairs)])

    # per-item gaps of the full-ranking theorem, indexed by paper item id - 1
    pairsel = np.zeros(two_n)
    for idx in range(2, two_n + 1):  # paper item index
        if idx == two_n:
            pairsel[idx - 1] = w[two_n - 3] - w[two_n - 1]
        elif idx % 2 == 0:
            pairsel[idx - 1] = w[idx - 1] - w[idx]
        else:
            pairsel[idx - 1] = w[idx - 2] - w[idx - 1]

    total = float(w.sum())
    mu_excl = np.array(
        [(total - w[2 * k - 1] - w[2 * k]) / two_n for k in range(1, n_pairs)]
    )
    if len(delta_2i):
        gamma_min = float(np.min(mu_excl * delta_2i))
    else:
        gamma_min = None

    if two_n <= MAX_ENUM_ITEMS:
        delta_min = _delta_min_enumerated(w)
        approx = False
    elif n_pairs >= 2:
        delta_min = _delta_min_adjacent(w)
        approx = True
    else:
        delta_min, approx = None, False

    s_index = h_index = None
    if n_pairs >= 3:
        # s over boundaries k in [2, N-1] (paper), stored 0-based
        cand = np.arange(1, n_pairs - 1)
        s_index = int(cand[np.argmin(delta_2i[cand])])
        rest = [k for k in range(n_pairs - 1) if k != s_index]
        prods = mu_excl[rest] * delta_2i[rest]
        h_index = int(rest[int(np.argmin(prods))])

    return GapSummary(
        delta_row=delta_row,
        delta_2i=delta_2i,
        delta_pairsel=pairsel,
        delta_min=delta_min,
        delta_min_approximate=approx,
        gamma_min=gamma_min,
        mu_excl=mu_excl,
        s_index=s_index,
        h_index=h_index,
    )
