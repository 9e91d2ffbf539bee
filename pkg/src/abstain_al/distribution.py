"""Joint distributions on a finite support, the unlabeled pool and the label oracle.

Randomness uses counter-based Philox streams. A run seed is expanded with
``SeedSequence`` into independently keyed streams for the pool, the oracle
and the (uncounted) shadow labels used by debug checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hypotheses import ABSTAIN, AbstainingHypothesis, Hypothesis, InstanceSpace

POOL_STREAM = 0
ORACLE_STREAM = 1
SHADOW_STREAM = 2


def stream(seed: int, key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(key,))))


@dataclass(frozen=True, eq=False)
class LabeledDistribution:
    """``P_X`` weights and ``eta(x) = Pr(Y = 1 | X = x)`` per support point."""

    px: np.ndarray
    eta: np.ndarray
    space: InstanceSpace | None = None

    def __post_init__(self):
        px = np.asarray(self.px, dtype=np.float64)
        eta = np.asarray(self.eta, dtype=np.float64)
        if px.ndim != 1 or px.shape != eta.shape:
            raise ValueError("px and eta need one entry per point")
        if (px < 0).any() or abs(px.sum() - 1.0) > 1e-12:
            raise ValueError("px must be a probability vector")
        if ((eta < 0) | (eta > 1)).any():
            raise ValueError("eta values lie in [0, 1]")
        space = self.space or InstanceSpace(len(px))
        if space.size != len(px):
            raise ValueError("distribution does not match the instance space")
        px.setflags(write=False)
        eta.setflags(write=False)
        object.__setattr__(self, "px", px)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "space", space)

    @property
    def m(self) -> int:
        return len(self.px)

    def massart_margin(self) -> float:
        support = self.px > 0
        return float(np.abs(2 * self.eta[support] - 1).min())

    def to_json(self) -> dict:
        return {"px": self.px.tolist(), "eta": self.eta.tolist()}


def bayes_classifier(dist: LabeledDistribution) -> Hypothesis:
    return Hypothesis((dist.eta >= 0.5).astype(np.int8))


def bayes_chow_classifier(dist: LabeledDistribution, p: float) -> AbstainingHypothesis:
    """Chow-optimal classifier: the Bayes label where the margin is at least 2p, else *."""
    if not 0 < p <= 0.5:
        raise ValueError("p must lie in (0, 1/2]")
    bayes = (dist.eta >= 0.5).astype(np.int8)
    confident = np.abs(2 * dist.eta - 1) >= 2 * p
    return AbstainingHypothesis(np.where(confident, bayes, ABSTAIN))


class Pool:
    """The i.i.d. unlabeled stream drawn from ``P_X``."""

    def __init__(self, dist: LabeledDistribution, seed: int):
        self.distribution = dist
        self.rng_seed = seed
        self.draws_made = 0
        self._rng = stream(seed, POOL_STREAM)

    def sample(self, count: int) -> np.ndarray:
        """Ordered point ids of the next ``count`` draws."""
        if count < 0:
            raise ValueError("count must be non-negative")
        self.draws_made += count
        if count == 0:
            return np.zeros(0, dtype=np.int64)
        return self._rng.choice(self.distribution.m, size=count, p=self.distribution.px)

    def sample_counts(self, count: int) -> np.ndarray:
        """Occurrence counts per point of the next ``count`` draws.

        Same law as ``bincount(sample(count))`` but O(M) regardless of count.
        """
        if count < 0:
            raise ValueError("count must be non-negative")
        self.draws_made += count
        return self._rng.multinomial(count, self.distribution.px).astype(np.int64)


class LabelOracle:
    """Answers label requests with fresh Bernoulli(eta(x)) draws and counts them."""

    def __init__(self, dist: LabeledDistribution, seed: int):
        self.distribution = dist
        self.rng_seed = seed
        self.requests_made = 0
        self._rng = stream(seed, ORACLE_STREAM)

    def _check(self, x) -> None:
        x = np.asarray(x)
        if x.size and (x.min() < 0 or x.max() >= self.distribution.m):
            raise ValueError("invalid point id")

    def query(self, x: int) -> int:
        self._check(x)
        self.requests_made += 1
        return int(self._rng.random() < self.distribution.eta[x])

    def query_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        self._check(xs)
        self.requests_made += len(xs)
        return (self._rng.random(len(xs)) < self.distribution.eta[xs]).astype(np.int8)

    def query_counts(self, counts: np.ndarray) -> np.ndarray:
        """Number of 1-labels when point x is requested ``counts[x]`` times."""
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != (self.distribution.m,) or (counts < 0).any():
            raise ValueError("counts need one non-negative entry per point")
        self.requests_made += int(counts.sum())
        return self._rng.binomial(counts, self.distribution.eta).astype(np.int64)

    def shadow_stream(self) -> np.random.Generator:
        """A separate stream for labels that are never charged to the ledger."""
        return stream(self.rng_seed, SHADOW_STREAM)


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """Sufficient statistics of a labeled multiset: per-point counts and 1-labels."""

    counts: np.ndarray
    ones: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        ones = np.asarray(self.ones, dtype=np.int64)
        if counts.shape != ones.shape or (ones < 0).any() or (ones > counts).any():
            raise ValueError("inconsistent labeled sample")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "ones", ones)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def zeros(self) -> np.ndarray:
        return self.counts - self.ones

    @classmethod
    def from_pairs(cls, m: int, pairs) -> "LabeledSample":
        pairs = list(pairs)
        counts = np.zeros(m, dtype=np.int64)
        ones = np.zeros(m, dtype=np.int64)
        for x, y in pairs:
            if not 0 <= x < m or y not in (0, 1):
                raise ValueError(f"bad labeled pair {(x, y)!r}")
            counts[x] += 1
            ones[x] += y
        return cls(counts, ones)

    @classmethod
    def draw(cls, pool: Pool, oracle: LabelOracle, n: int) -> "LabeledSample":
        counts = pool.sample_counts(n)
        return cls(counts, oracle.query_counts(counts))

    def __add__(self, other: "LabeledSample") -> "LabeledSample":
        return LabeledSample(self.counts + other.counts, self.ones + other.ones)


# --------------------------------------------------------------------------
# instance generators


def massart_threshold(grid: int, h: float, crossing: float = 0.5, seed: int | None = None) -> LabeledDistribution:
    """Uniform grid; labels flip across ``crossing`` with margin exactly ``h``.

    With a seed, eta is drawn uniformly from the admissible side of the margin
    (margin then at least ``h``).
    """
    space = InstanceSpace.grid(grid)
    c = int(round(crossing * grid))
    above = np.arange(grid) >= c
    if seed is None:
        eta = np.where(above, (1 + h) / 2, (1 - h) / 2)
    else:
        rng = np.random.default_rng(seed)
        hi = rng.uniform((1 + h) / 2, 1.0, grid)
        lo = rng.uniform(0.0, (1 - h) / 2, grid)
        eta = np.where(above, hi, lo)
    return LabeledDistribution(np.full(grid, 1.0 / grid), eta, space)


def noisy_threshold(grid: int, crossing: float = 0.5, width: float = 0.25, power: float = 2.0) -> LabeledDistribution:
    """Uniform grid with ``eta = 1/2 + sign(x-c)|(x-c)/width|^power / 2`` near the crossing."""
    space = InstanceSpace.grid(grid)
    x = np.array(space.coords)
    z = np.clip((x - crossing) / width, -1.0, 1.0)
    eta = 0.5 + 0.5 * np.sign(z) * np.abs(z) ** power
    return LabeledDistribution(np.full(grid, 1.0 / grid), eta, space)


def noisy_band_threshold(
    grid: int, crossing: float = 0.5, width: float = 0.4, band_mass: float = 0.9, margin: float = 0.3
) -> LabeledDistribution:
    """Threshold labels, deterministic except on a heavy band around ``crossing``.

    Points with ``|x - crossing| < width/2`` share ``band_mass`` and have
    ``|2 eta - 1| = margin``; the rest share the remaining mass.
    """
    space = InstanceSpace.grid(grid)
    x = np.array(space.coords)
    band = np.abs(x - crossing) < width / 2
    if not band.any() or band.all():
        raise ValueError("band must hold some but not all grid points")
    px = np.where(band, band_mass / band.sum(), (1.0 - band_mass) / (~band).sum())
    above = x >= crossing
    eta = np.where(above, 1.0, 0.0)
    eta = np.where(band, np.where(above, 0.5 + margin / 2, 0.5 - margin / 2), eta)
    return LabeledDistribution(px / px.sum(), eta, space)


def heavy_noisy_point(m: int, mass: float, gap: float, labels=None) -> LabeledDistribution:
    """Point 0 carries ``mass`` with eta = 1/2 + gap; the rest is deterministic."""
    rest = np.full(m - 1, (1.0 - mass) / (m - 1)) if m > 1 else np.zeros(0)
    px = np.concatenate([[mass], rest])
    tail = np.zeros(m - 1) if labels is None else np.asarray(labels, dtype=float)
    eta = np.concatenate([[0.5 + gap], tail])
    return LabeledDistribution(px, eta)


def deterministic(px, target) -> LabeledDistribution:
    """Noise-free labels ``Y = target(X)``."""
    return LabeledDistribution(px, np.asarray(target, dtype=np.float64))


def misspecified_pair(m: int, D: int, dis_mass: float = 0.6) -> tuple[np.ndarray, LabeledDistribution]:
    """Two-row class table plus noise-free labels from a target outside the class.

    Row 0 is all-zeros and row 1 is one on points ``0..D-1``. The target is one
    on the first ``D // 2`` points only, so it disagrees with both rows. The
    disagreement region carries ``dis_mass``, split so that both rows have
    risk ``dis_mass / 2``.
    """
    if not 2 <= D <= m:
        raise ValueError("need 2 <= D <= m")
    if not 0 < dis_mass <= 1 or (D == m and dis_mass != 1):
        raise ValueError("dis_mass must lie in (0, 1] and be 1 when D == m")
    table = np.zeros((2, m), dtype=np.int8)
    table[1, :D] = 1
    k = D // 2
    px = np.empty(m)
    px[:k] = dis_mass / 2 / k
    px[k:D] = dis_mass / 2 / (D - k)
    px[D:] = (1.0 - dis_mass) / max(m - D, 1)
    target = np.zeros(m)
    target[:k] = 1
    return table, deterministic(px / px.sum(), target)


def random_distribution(m: int, seed: int) -> LabeledDistribution:
    rng = np.random.default_rng(seed)
    px = rng.dirichlet(np.ones(m))
    px = px / px.sum()
    return LabeledDistribution(px, rng.uniform(0, 1, m))


def distribution_from_json(spec: dict) -> LabeledDistribution:
    kind = spec.get("kind")
    if kind is None:
        return LabeledDistribution(spec["px"], spec["eta"])
    if kind == "massart_threshold":
        return massart_threshold(int(spec["grid"]), float(spec["h"]), float(spec.get("crossing", 0.5)), spec.get("seed"))
    if kind == "noisy_threshold":
        return noisy_threshold(
            int(spec["grid"]), float(spec.get("crossing", 0.5)), float(spec.get("width", 0.25)), float(spec.get("power", 2.0))
        )
    if kind == "noisy_band_threshold":
        return noisy_band_threshold(
            int(spec["grid"]),
            float(spec.get("crossing", 0.5)),
            float(spec.get("width", 0.4)),
            float(spec.get("band_mass", 0.9)),
            float(spec.get("margin", 0.3)),
        )
    if kind == "heavy_noisy_point":
        return heavy_noisy_point(int(spec["m"]), float(spec["mass"]), float(spec["gap"]), spec.get("labels"))
    if kind == "deterministic":
        return deterministic(spec["px"], spec["target"])
    if kind == "misspecified_pair":
        return misspecified_pair(int(spec["m"]), int(spec["D"]), float(spec.get("dis_mass", 0.6)))[1]
    if kind == "random":
        return random_distribution(int(spec["m"]), int(spec["seed"]))
    raise ValueError(f"unknown distribution kind {kind!r}")
