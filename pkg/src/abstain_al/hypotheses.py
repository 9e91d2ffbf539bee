"""Finite instance spaces, hypothesis classes and their set-level geometry.

Every class is fully enumerated: a ``(K, M)`` table of 0/1 predictions over
``M`` support points. Abstaining classifiers use the value ``ABSTAIN`` (-1)
in an ``int8`` table.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

ABSTAIN = -1

# Largest number of k-subsets enumerated by growth_function / vc_dimension.
ENUMERATION_CAP = 10**7


class EnumerationError(ValueError):
    """Raised when an exact brute-force computation exceeds its cap."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class InstanceSpace:
    """Support points ``0..size-1``, optionally with increasing coordinates."""

    size: int
    coords: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("instance space needs at least one point")
        if self.coords is not None:
            if len(self.coords) != self.size:
                raise ValueError("one coordinate per point is required")
            if any(b <= a for a, b in zip(self.coords, self.coords[1:])):
                raise ValueError("coordinates must be strictly increasing")

    @classmethod
    def grid(cls, m: int) -> "InstanceSpace":
        return cls(m, tuple(i / m for i in range(m)))


@dataclass(frozen=True, eq=False)
class Hypothesis:
    predictions: np.ndarray
    class_index: int = -1

    def __post_init__(self):
        pred = np.asarray(self.predictions)
        if pred.ndim != 1 or not np.isin(pred, (0, 1)).all():
            raise ValueError("a hypothesis predicts 0 or 1 at every point")
        object.__setattr__(self, "predictions", _frozen(pred.astype(np.int8)))

    def __len__(self):
        return len(self.predictions)

    def __eq__(self, other):
        if isinstance(other, (Hypothesis, AbstainingHypothesis)):
            return np.array_equal(self.predictions, other.predictions)
        return NotImplemented

    def __hash__(self):
        return hash(self.predictions.tobytes())

    def as_abstaining(self) -> "AbstainingHypothesis":
        return AbstainingHypothesis(self.predictions)


@dataclass(frozen=True, eq=False)
class AbstainingHypothesis:
    """A {0, 1, *}-valued prediction table; * is stored as ``ABSTAIN``."""

    predictions: np.ndarray

    def __post_init__(self):
        pred = np.asarray(self.predictions)
        if pred.ndim != 1 or not np.isin(pred, (0, 1, ABSTAIN)).all():
            raise ValueError("predictions must be 0, 1 or ABSTAIN")
        object.__setattr__(self, "predictions", _frozen(pred.astype(np.int8)))

    def __len__(self):
        return len(self.predictions)

    def __eq__(self, other):
        if isinstance(other, (Hypothesis, AbstainingHypothesis)):
            return np.array_equal(self.predictions, other.predictions)
        return NotImplemented

    def __hash__(self):
        return hash(self.predictions.tobytes())

    @property
    def abstain_mask(self) -> np.ndarray:
        return self.predictions == ABSTAIN

    def abstains(self) -> bool:
        return bool(self.abstain_mask.any())

    def to_list(self) -> list:
        return ["*" if v == ABSTAIN else int(v) for v in self.predictions]

    @classmethod
    def from_list(cls, values: Sequence) -> "AbstainingHypothesis":
        return cls(np.array([ABSTAIN if v == "*" else int(v) for v in values]))


@dataclass(frozen=True, eq=False)
class HypothesisClass:
    """An ordered, duplicate-free finite class over one instance space.

    ``declared_vc`` may hold the VC dimension or any valid upper bound on it;
    when absent :func:`vc_dimension` computes it by brute force and caches it.
    """

    table: np.ndarray
    space: InstanceSpace | None = None
    declared_vc: int | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        table = np.asarray(self.table)
        if table.ndim != 2 or table.shape[0] == 0:
            raise ValueError("a class needs a non-empty (K, M) table")
        if not np.isin(table, (0, 1)).all():
            raise ValueError("class tables are {0,1}-valued")
        if len(np.unique(table, axis=0)) != len(table):
            raise ValueError("duplicate prediction tables in class")
        if self.space is None:
            object.__setattr__(self, "space", InstanceSpace(table.shape[1]))
        elif self.space.size != table.shape[1]:
            raise ValueError("table width does not match the instance space")
        if self.declared_vc is not None and self.declared_vc < 0:
            raise ValueError("declared_vc must be non-negative")
        object.__setattr__(self, "table", _frozen(table.astype(np.int8)))

    def __len__(self):
        return self.table.shape[0]

    def __getitem__(self, i: int) -> Hypothesis:
        return Hypothesis(self.table[i], int(i))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def hypotheses(self) -> list[Hypothesis]:
        return list(self)

    @property
    def m(self) -> int:
        return self.table.shape[1]

    def subset(self, indices: Iterable[int]) -> list[Hypothesis]:
        return [self[i] for i in indices]

    def vc(self) -> int:
        """Declared VC dimension (or bound), else the brute-force value."""
        if self.declared_vc is not None:
            return self.declared_vc
        return vc_dimension(self)


ClassLike = Union[HypothesisClass, Sequence[Hypothesis], np.ndarray]


def as_table(hyps: ClassLike) -> np.ndarray:
    """Stack a class, a sequence of hypotheses or a raw array into a 2-D table."""
    if isinstance(hyps, HypothesisClass):
        return hyps.table
    if isinstance(hyps, np.ndarray):
        return np.atleast_2d(hyps)
    hyps = list(hyps)
    if not hyps:
        raise ValueError("empty version space")
    sizes = {len(h) for h in hyps}
    if len(sizes) != 1:
        raise ValueError("hypotheses live on different instance spaces")
    return np.stack([h.predictions for h in hyps])


# --------------------------------------------------------------------------
# constructors


def threshold_class(m: int) -> HypothesisClass:
    """All thresholds ``f_t(x) = 1[x >= t]`` on the grid ``{0, 1/m, ...}``.

    Row ``k`` has threshold ``t = k/m``, so row 0 is all-ones and row ``m`` is
    all-zeros.
    """
    idx = np.arange(m)
    table = (idx[None, :] >= np.arange(m + 1)[:, None]).astype(np.int8)
    return HypothesisClass(table, InstanceSpace.grid(m), declared_vc=1 if m >= 1 else 0)


def random_class(m: int, count: int, seed: int) -> HypothesisClass:
    if count > 2**m:
        raise ValueError("more hypotheses requested than distinct tables exist")
    rng = np.random.default_rng(seed)
    rows: dict[bytes, np.ndarray] = {}
    while len(rows) < count:
        row = rng.integers(0, 2, size=m, dtype=np.int8)
        rows.setdefault(row.tobytes(), row)
    return HypothesisClass(np.stack(list(rows.values())))


def class_from_json(spec: dict) -> HypothesisClass:
    """Build a class from ``{"kind": "threshold"|"explicit"|"random", ...}``."""
    kind = spec.get("kind")
    declared = spec.get("declared_vc")
    if kind == "threshold":
        return threshold_class(int(spec["grid"]))
    if kind == "explicit":
        table = np.array(spec["table"], dtype=np.int8)
        return HypothesisClass(table, declared_vc=declared)
    if kind == "random":
        cls = random_class(int(spec["m"]), int(spec["count"]), int(spec["seed"]))
        if declared is not None:
            return HypothesisClass(cls.table, cls.space, declared_vc=int(declared))
        return cls
    raise ValueError(f"unknown class kind {kind!r}")


# --------------------------------------------------------------------------
# geometry


def disagreement_mask(table: np.ndarray) -> np.ndarray:
    if table.shape[0] == 0:
        raise ValueError("empty version space")
    return table.min(axis=0) != table.max(axis=0)


def disagreement_set(hyps: ClassLike) -> frozenset[int]:
    """Points where at least two members of ``hyps`` predict differently."""
    return frozenset(np.flatnonzero(disagreement_mask(as_table(hyps))).tolist())


def pairwise_disagreement(table: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Matrix of ``sum_x w_x 1[f(x) != g(x)]`` for all row pairs."""
    t = table.astype(np.float64)
    w = np.asarray(weights, dtype=np.float64)
    a = t @ w
    return a[:, None] + a[None, :] - 2.0 * (t * w) @ t.T


def max_pairwise_disagreement(table: np.ndarray, weights: np.ndarray, chunk: int = 1024) -> float:
    """``max_{f,g} sum_x w_x 1[f(x) != g(x)]`` without materialising huge matrices."""
    if table.shape[0] <= 1:
        return 0.0
    # columns where every row agrees contribute nothing
    cols = disagreement_mask(table)
    if not cols.any():
        return 0.0
    t = table[:, cols].astype(np.float64)
    w = np.asarray(weights, dtype=np.float64)[cols]
    a = t @ w
    tw = t * w
    best = 0.0
    for s in range(0, len(t), chunk):
        block = a[s : s + chunk, None] + a[None, :] - 2.0 * tw[s : s + chunk] @ t.T
        best = max(best, float(block.max()))
    return max(best, 0.0)


def _sample_counts(sample, m: int) -> np.ndarray:
    sample = np.asarray(sample, dtype=np.int64)
    if sample.size == 0:
        raise ValueError("empty sample")
    if sample.min() < 0 or sample.max() >= m:
        raise ValueError("sample point outside the instance space")
    return np.bincount(sample, minlength=m)


def empirical_l2_diameter(hyps: ClassLike, sample) -> float:
    """L2(P_n) diameter of ``hyps`` under the empirical measure of ``sample``.

    ``sample`` is a multiset of point ids.
    """
    table = as_table(hyps)
    counts = _sample_counts(sample, table.shape[1])
    return empirical_l2_diameter_counts(table, counts)


def empirical_l2_diameter_counts(table: np.ndarray, counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        raise ValueError("empty sample")
    return math.sqrt(max_pairwise_disagreement(table, counts) / n)


def true_l1_distance(f: Hypothesis, g: Hypothesis, px) -> float:
    px = np.asarray(px, dtype=np.float64)
    if not (len(f) == len(g) == len(px)):
        raise ValueError("hypotheses and weights live on different spaces")
    if abs(px.sum() - 1.0) > 1e-9:
        raise ValueError("weights must sum to one")
    return float(px[f.predictions != g.predictions].sum())


def midpoint(f: Hypothesis, g: Hypothesis) -> AbstainingHypothesis:
    """Average of two classifiers with the value 1/2 replaced by *."""
    if len(f) != len(g):
        raise ValueError("hypotheses live on different spaces")
    pred = np.where(f.predictions == g.predictions, f.predictions, ABSTAIN)
    return AbstainingHypothesis(pred)


# --------------------------------------------------------------------------
# combinatorial dimensions


def _informative_columns(table: np.ndarray) -> np.ndarray:
    cols = table[:, disagreement_mask(table)]
    if cols.shape[1] == 0:
        return cols
    _, first = np.unique(cols.T, axis=0, return_index=True)
    return cols[:, np.sort(first)]


def _max_restrictions(cols: np.ndarray, k: int, stop_at: int | None = None) -> int:
    """Largest number of distinct restrictions over k-subsets of ``cols``."""
    K, u = cols.shape
    n_subsets = math.comb(u, k)
    if n_subsets > ENUMERATION_CAP:
        raise EnumerationError("growth function too large to enumerate")
    weights = (1 << np.arange(k, dtype=np.int64))
    batch = max(1, 2_000_000 // max(1, K * k))
    combos = itertools.combinations(range(u), k)
    best = 0
    while True:
        chunk = list(itertools.islice(combos, batch))
        if not chunk:
            break
        idx = np.array(chunk, dtype=np.int64)
        codes = (cols[:, idx].astype(np.int64) * weights).sum(axis=2)
        codes.sort(axis=0)
        distinct = 1 + (np.diff(codes, axis=0) != 0).sum(axis=0)
        best = max(best, int(distinct.max()))
        if stop_at is not None and best >= stop_at:
            break
    return best


def growth_function(cls: ClassLike, k: int) -> int:
    """Largest number of distinct labelings the class induces on k points.

    Points may repeat, so for ``k`` at least the number of distinct
    informative columns the value is the class size.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    table = as_table(cls)
    if k == 0:
        return 1
    cols = _informative_columns(table)
    if k >= cols.shape[1]:
        return len(np.unique(table, axis=0))
    return _max_restrictions(cols, k)


def vc_dimension(cls: ClassLike) -> int:
    """Largest d with growth_function(d) == 2**d; cached on HypothesisClass."""
    if isinstance(cls, HypothesisClass) and "vc" in cls._cache:
        return cls._cache["vc"]
    table = as_table(cls)
    cols = _informative_columns(table)
    K = len(table)
    d = 0
    for k in range(1, cols.shape[1] + 1):
        if 2**k > K:
            break
        if _max_restrictions(cols, k, stop_at=2**k) < 2**k:
            break
        d = k
    if isinstance(cls, HypothesisClass):
        cls._cache["vc"] = d
    return d
