"""Passive ERM, the mid-point aggregate and the active learners with abstention.

All learners work on sufficient statistics (per-point counts of draws and of
1-labels), so a sample of size 2**23 costs O(M) memory. Ties are always
broken toward the lowest class index.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .distribution import LabeledDistribution, LabeledSample, LabelOracle, Pool
from .hypotheses import (
    ABSTAIN,
    AbstainingHypothesis,
    Hypothesis,
    HypothesisClass,
    as_table,
    disagreement_mask,
    max_pairwise_disagreement,
)
from .risk import DeviationRadius, alpha, alpha_sq, binary_risk_exact, clog

TRIGGER_CONSTANT = 49.0
SCHEDULE_CONSTANT = 148.0
MAX_ITERATIONS = 60
# step of the nested passive sample-size grid
PASSIVE_GROWTH = 2**0.25


def _errors(table: np.ndarray, sample: LabeledSample) -> np.ndarray:
    """Number of misclassified sample points for every row of ``table``."""
    ones = sample.ones.astype(np.float64)
    zeros = sample.zeros.astype(np.float64)
    return np.rint(ones.sum() + table.astype(np.float64) @ (zeros - ones)).astype(np.int64)


def _d_for(cls, d: int | None) -> int:
    if d is None:
        d = cls.vc() if isinstance(cls, HypothesisClass) else 1
    # the radius formulas need d >= 1; d = 0 only occurs for a singleton class
    return max(int(d), 1)


@dataclass(frozen=True, eq=False)
class VersionSpace:
    """Members surviving the excess-risk constraint, with the statistics that defined it.

    ``sample`` holds the labeled points, ``query_counts`` the (possibly larger)
    unlabeled sample whose empirical measure enters the L1 term, and ``scale``
    the normaliser (``n`` for the mid-point algorithm, ``n_j`` in the active loop).
    """

    member_indices: np.ndarray
    defining_radius: DeviationRadius
    erm_index: int
    sample: LabeledSample
    query_counts: np.ndarray
    scale: int

    def __len__(self):
        return len(self.member_indices)

    def __contains__(self, i):
        return int(i) in set(self.member_indices.tolist())

    def check(self, cls, candidates=None) -> bool:
        """Re-evaluate the membership constraint on ``candidates`` (default: members)."""
        table = as_table(cls)
        idx = self.member_indices if candidates is None else np.asarray(candidates)
        keep = _constraint(table, idx, self.erm_index, self.sample, self.query_counts, self.scale, self.defining_radius.value)
        return bool(keep.all())


def _constraint(table, idx, erm_index, sample, qcounts, scale, a) -> np.ndarray:
    err = _errors(table[idx], sample)
    err_g = _errors(table[[erm_index]], sample)[0]
    dis = (table[idx] != table[erm_index]).astype(np.float64) @ qcounts
    return (err - err_g) / scale <= 2 * a * a + 2 * a * np.sqrt(dis / scale)


def erm(cls, labeled_sample, indices=None) -> Hypothesis:
    """Empirical risk minimiser over ``cls`` (or the rows ``indices`` of it)."""
    table = as_table(cls)
    idx = np.arange(len(table)) if indices is None else np.asarray(indices, dtype=np.int64)
    if len(idx) == 0:
        raise ValueError("empty version space")
    sample = labeled_sample if isinstance(labeled_sample, LabeledSample) else LabeledSample.from_pairs(table.shape[1], labeled_sample)
    best = int(idx[int(np.argmin(_errors(table[idx], sample)))])
    return Hypothesis(table[best], best)


def _midpoint_choice(table, members, erm_index, sample, p) -> int:
    """Member f whose mid-point with the ERM has least empirical Chow risk."""
    g = table[erm_index]
    per_point_err = np.where(g == 1, sample.zeros, sample.ones).astype(np.float64)
    dis = (table[members] != g).astype(np.float64)
    # unnormalised: errors where f agrees with the ERM, plus the abstention price elsewhere
    chow = per_point_err.sum() + dis @ ((0.5 - p) * sample.counts - per_point_err)
    tol = 1e-9 * max(1.0, float(sample.n))
    return int(members[np.flatnonzero(chow <= chow.min() + tol)[0]])


def _midpoint_table(table, f_index, g_index) -> AbstainingHypothesis:
    f, g = table[f_index], table[g_index]
    return AbstainingHypothesis(np.where(f == g, f, ABSTAIN))


# --------------------------------------------------------------------------
# schedule


@dataclass(frozen=True)
class Schedule:
    J: int
    epsilon: float
    delta: float
    p: float
    d: int

    def n(self, j: int) -> int:
        return 2 ** (j - 1)

    def delta_j(self, j: int) -> float:
        return self.delta / (j + 1) ** 2

    def alpha(self, j: int) -> DeviationRadius:
        return alpha(self.n(j), self.delta_j(j), self.d)

    def to_json(self) -> dict:
        return asdict(self)


def compute_schedule(epsilon: float, delta: float, p: float, d: int) -> Schedule:
    """Smallest J with ``148 alpha^2(2^(J-1), delta/(J+1)^2) / p <= epsilon``."""
    if not (0 < epsilon <= 1 and 0 < delta <= 1 and 0 < p <= 0.5):
        raise ValueError("need epsilon, delta in (0, 1] and p in (0, 1/2]")
    d = max(int(d), 1)
    k = 1
    while SCHEDULE_CONSTANT * alpha_sq(2 ** (k - 1), delta / (k + 1) ** 2, d) / p > epsilon:
        k += 1
        if k > MAX_ITERATIONS:
            raise ValueError("schedule needs more than 2**60 samples per iteration")
    return Schedule(k, epsilon, delta, p, d)


# --------------------------------------------------------------------------
# mid-point algorithm


class MidpointResult(NamedTuple):
    classifier: AbstainingHypothesis
    version_space: VersionSpace
    diameter: float


def midpoint_algorithm(cls, labeled_sample, p: float, delta: float, d: int | None = None) -> MidpointResult:
    """Passive mid-point aggregate: ERM, confidence set, best mid-point by empirical Chow risk."""
    table = as_table(cls)
    sample = labeled_sample if isinstance(labeled_sample, LabeledSample) else LabeledSample.from_pairs(table.shape[1], labeled_sample)
    n = sample.n
    if n == 0:
        raise ValueError("empty sample")
    a = alpha(n, delta, _d_for(cls, d))
    all_idx = np.arange(len(table))
    g = erm(table, sample).class_index
    keep = _constraint(table, all_idx, g, sample, sample.counts, n, a.value)
    members = all_idx[keep]
    diameter = math.sqrt(max_pairwise_disagreement(table[members], sample.counts) / n)
    chosen = _midpoint_choice(table, members, g, sample, p)
    vs = VersionSpace(members, a, g, sample, sample.counts, n)
    return MidpointResult(_midpoint_table(table, chosen, g), vs, diameter)


# --------------------------------------------------------------------------
# active learning with abstention


@dataclass
class IterationRecord:
    j: int
    n_j: int
    queried: int
    version_size_before: int
    version_size: int
    erm_index: int
    alpha: float
    diameter: float
    threshold: float
    triggered: bool
    disagreement_points: int


@dataclass
class RunTranscript:
    algorithm: str
    iterations: list[IterationRecord] = field(default_factory=list)
    label_requests: int = 0
    extra_requests: int = 0
    terminal_iteration: int = 0
    triggered: bool = False
    midpoint_partner: int = -1
    erm_index: int = -1
    output: list = field(default_factory=list)
    abstention_points: list = field(default_factory=list)
    extra_queries_per_point: dict = field(default_factory=dict)
    extra_pool_size: int = 0
    scaling_checks: int = 0

    @property
    def total_requests(self) -> int:
        return self.label_requests + self.extra_requests

    def to_json(self) -> dict:
        out = asdict(self)
        out["extra_queries_per_point"] = {str(k): v for k, v in self.extra_queries_per_point.items()}
        return out


def active_abstain(
    cls,
    pool: Pool,
    oracle: LabelOracle,
    schedule: Schedule,
    debug: bool = False,
) -> tuple[AbstainingHypothesis, RunTranscript]:
    """Disagreement-based active learner that returns a mid-point classifier.

    Stops early when the empirical L2 diameter of the version space exceeds
    ``49 alpha / p``. With ``debug`` the label-scaling identity between the
    queried and full samples is asserted on every iteration using shadow
    labels that are not charged to the oracle.
    """
    table = as_table(cls)
    p = schedule.p
    V = np.arange(len(table))
    transcript = RunTranscript("active_abstain")
    requests_before = oracle.requests_made
    shadow = oracle.shadow_stream() if debug else None

    for j in range(1, schedule.J + 1):
        n_j = schedule.n(j)
        counts = pool.sample_counts(n_j)
        mask = disagreement_mask(table[V])
        queried = np.where(mask, counts, 0)
        ones = oracle.query_counts(queried)
        S = LabeledSample(queried, ones)

        err = _errors(table[V], S)
        g = int(V[int(np.argmin(err))])
        a = schedule.alpha(j)

        if debug:
            rest = counts - queried
            full = S + LabeledSample(rest, shadow.binomial(rest, oracle.distribution.eta))
            err_full = _errors(table[V], full)
            # |S_j|(R_S(f) - R_S(g)) == n_j (R_Q(f) - R_Q(g)) for all f, g in V_{j-1}
            if not np.array_equal(err - err[0], err_full - err_full[0]):
                raise AssertionError(f"scaling identity violated at iteration {j}")
            transcript.scaling_checks += 1

        keep = _constraint(table, V, g, S, counts, n_j, a.value)
        size_before = len(V)
        V = V[keep]
        diameter = math.sqrt(max_pairwise_disagreement(table[V], counts) / n_j)
        threshold = TRIGGER_CONSTANT * a.value / p
        triggered = diameter > threshold
        transcript.iterations.append(
            IterationRecord(
                j=j,
                n_j=n_j,
                queried=int(queried.sum()),
                version_size_before=size_before,
                version_size=len(V),
                erm_index=g,
                alpha=a.value,
                diameter=diameter,
                threshold=threshold,
                triggered=bool(triggered),
                disagreement_points=int(mask.sum()),
            )
        )
        if triggered or j == schedule.J:
            chosen = _midpoint_choice(table, V, g, S, p)
            out = _midpoint_table(table, chosen, g)
            transcript.terminal_iteration = j
            transcript.triggered = bool(triggered)
            transcript.midpoint_partner = chosen
            transcript.erm_index = g
            transcript.label_requests = oracle.requests_made - requests_before
            transcript.output = out.to_list()
            return out, transcript
    raise RuntimeError("schedule has no iterations")  # pragma: no cover


def majority_sample_sizes(D: int, h: float, epsilon: float, delta: float) -> tuple[int, int]:
    """(fresh pool size, per-point label cap) for the repeated-querying stage."""
    log_term = clog(6 * D / delta)
    pool_size = math.ceil(28 * D * log_term / (3 * h * h * epsilon))
    cap = math.ceil(2 * log_term / (h * h))
    return pool_size, cap


def finite_diameter(
    cls,
    pool: Pool,
    oracle: LabelOracle,
    h: float,
    epsilon: float,
    delta: float,
    d: int | None = None,
    debug: bool = False,
) -> tuple[Hypothesis, RunTranscript]:
    """{0,1}-valued learner for classes of finite diameter under a known Massart margin.

    Runs the abstaining learner at ``p = h/2``, then replaces each abstention
    by the majority of repeated label requests at that point (ties give 1).
    """
    if not 0 < h <= 1:
        raise ValueError("h must lie in (0, 1]")
    table = as_table(cls)
    D = int(max_pairwise_disagreement(table, np.ones(table.shape[1])))
    schedule = compute_schedule(epsilon / 2, delta / 3, h / 2, _d_for(cls, d))
    f_p, transcript = active_abstain(table, pool, oracle, schedule, debug=debug)
    transcript.algorithm = "finite_diameter"

    abstain = np.flatnonzero(f_p.abstain_mask)
    out = f_p.predictions.copy()
    if len(abstain):
        size, cap = majority_sample_sizes(D, h, epsilon, delta)
        appearances = pool.sample_counts(size)
        requests = np.zeros_like(appearances)
        requests[abstain] = np.minimum(appearances[abstain], cap)
        before = oracle.requests_made
        ones = oracle.query_counts(requests)
        transcript.extra_requests = oracle.requests_made - before
        transcript.extra_pool_size = size
        for x in abstain:
            k = int(requests[x])
            out[x] = 1 if 2 * ones[x] >= k else 0
            transcript.extra_queries_per_point[int(x)] = k
    transcript.abstention_points = abstain.tolist()
    transcript.output = [int(v) for v in out]
    return Hypothesis(out), transcript


# --------------------------------------------------------------------------
# passive baseline


def passive_erm_baseline(cls, dist: LabeledDistribution, n: int, seed: int) -> tuple[Hypothesis, int]:
    pool, oracle = Pool(dist, seed), LabelOracle(dist, seed)
    sample = LabeledSample.draw(pool, oracle, n)
    return erm(cls, sample), oracle.requests_made


def passive_labels_to_reach(
    cls,
    dist: LabeledDistribution,
    epsilon: float,
    seed: int,
    max_labels: int = 2**24,
    best_risk: float | None = None,
    growth: float = PASSIVE_GROWTH,
) -> tuple[int | None, Hypothesis]:
    """Labels after which passive ERM stays epsilon-good.

    One nested sample path is grown along n_0 = 1, n_{k+1} = max(n_k + 1,
    round(growth * n_k)) up to ``max_labels``; the answer is the smallest grid
    size from which the exact excess risk of ERM is at most epsilon at every
    later grid size. None when ERM is still worse than epsilon at the end.
    Also returns the ERM at the answer (the last ERM when None).
    """
    if growth <= 1:
        raise ValueError("growth must exceed 1")
    table = as_table(cls)
    if best_risk is None:
        best_risk = min(binary_risk_exact(row, dist) for row in table)
    pool, oracle = Pool(dist, seed), LabelOracle(dist, seed)
    sample = LabeledSample.draw(pool, oracle, 1)
    n = 1
    reached: tuple[int, Hypothesis] | None = None
    while True:
        f = erm(table, sample)
        if binary_risk_exact(f, dist) - best_risk <= epsilon:
            if reached is None:
                reached = (n, f)
        else:
            reached = None
        nxt = max(n + 1, int(round(growth * n)))
        if nxt > max_labels:
            return reached if reached is not None else (None, f)
        sample = sample + LabeledSample.draw(pool, oracle, nxt - n)
        n = nxt
