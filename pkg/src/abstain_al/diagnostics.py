"""Exact brute-force complexity measures and minimisers.

Everything here is ground truth on a finite support: every routine either
computes the exact quantity or reports that it was not computed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .distribution import LabeledDistribution
from .hypotheses import (
    ABSTAIN,
    AbstainingHypothesis,
    ClassLike,
    EnumerationError,
    Hypothesis,
    HypothesisClass,
    as_table,
    max_pairwise_disagreement,
    vc_dimension,
)
from .learners import RunTranscript, Schedule
from .risk import alpha_sq, binary_risk_exact, chow_risk_exact, clog

STAR_CAP = 64
STAR_NODE_BUDGET = 2_000_000
CHOW_EXHAUSTIVE_CAP = 8


# --------------------------------------------------------------------------
# disagreement coefficient


class ThetaCurve:
    """Precomputed ``theta(eps)`` for one class and marginal.

    For each centre g the disagreement mass of the L1 ball is a right-continuous
    step function of the radius that jumps only at realised distances, so the
    supremum over radii ``>= eps`` is attained at ``eps`` or at a realised
    distance. Rows of ``radii`` are those distances sorted per centre.
    """

    def __init__(self, cls: ClassLike, px):
        table = as_table(cls)
        px = np.asarray(px, dtype=np.float64)
        K = len(table)
        self.radii = np.empty((K, K))
        self.masses = np.empty((K, K))
        for g in range(K):
            diff = table != table[g]
            dist = diff @ px
            order = np.argsort(dist, kind="stable")
            r = dist[order]
            mass = np.logical_or.accumulate(diff[order], axis=0) @ px
            # equal radii enter the ball together
            last = np.searchsorted(r, r, side="right") - 1
            self.radii[g] = r
            self.masses[g] = mass[last]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(self.radii > 0, self.masses / self.radii, 0.0)
        self.suffix_max = np.maximum.accumulate(ratio[:, ::-1], axis=1)[:, ::-1]

    def __call__(self, epsilon: float) -> float:
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        best = 1.0
        for r, mass, smax in zip(self.radii, self.masses, self.suffix_max):
            inside = np.searchsorted(r, epsilon, side="right") - 1
            best = max(best, mass[inside] / epsilon)
            start = np.searchsorted(r, epsilon, side="left")
            if start < len(r):
                best = max(best, smax[start])
        return float(best)


def disagreement_coefficient(cls: ClassLike, px, epsilon: float) -> float:
    return ThetaCurve(cls, px)(epsilon)


# --------------------------------------------------------------------------
# star number


def _star_center(table: np.ndarray, c: int, budget: list) -> int | None:
    m = table.shape[1]
    diff = np.delete(table != table[c], c, axis=0)
    diff = diff[diff.any(axis=1)]
    if len(diff) == 0:
        return 0
    bits = [1 << x for x in range(m)]
    witness_masks = [sum(bits[x] for x in np.flatnonzero(row)) for row in diff]
    covered = diff.any(axis=0)
    wf = diff.astype(np.int64)
    # x, y compatible iff some witness separates each from the other
    sep = (wf.T @ (1 - wf)) > 0
    compat = sep & sep.T
    points = [x for x in range(m) if covered[x]]
    neighbours = {x: sum(bits[y] for y in points if y != x and compat[x, y]) for x in points}
    by_point = {x: [w for w in witness_masks if w & bits[x]] for x in points}
    upper = min(len(points), len(witness_masks))

    def valid(S: int, members: list[int]) -> bool:
        return all(any((w & S) == bits[x] for w in by_point[x]) for x in members)

    best = 1 if points else 0

    def extend(S: int, members: list[int], cand: int) -> bool:
        nonlocal best
        budget[0] -= 1
        if budget[0] < 0:
            raise EnumerationError("star number search budget exhausted")
        if len(members) > best:
            best = len(members)
            if best >= upper:
                return True
        while cand:
            if len(members) + bin(cand).count("1") <= best:
                return False
            low = cand & -cand
            x = low.bit_length() - 1
            cand ^= low
            S2 = S | low
            if valid(S2, members + [x]):
                if extend(S2, members + [x], cand & neighbours[x]):
                    return True
        return False

    extend(0, [], sum(bits[x] for x in points))
    return best


def star_number(cls: ClassLike, node_budget: int = STAR_NODE_BUDGET) -> int | None:
    """Largest star configuration; None when the class exceeds the search caps."""
    table = as_table(cls)
    if len(table) > STAR_CAP or table.shape[1] > STAR_CAP:
        return None
    budget = [node_budget]
    best = 0
    try:
        for c in range(len(table)):
            best = max(best, _star_center(table, c, budget))
    except EnumerationError:
        return None
    return best


# --------------------------------------------------------------------------
# diameter, best-in-class, Chow-optimal classifiers


def class_diameter(cls: ClassLike) -> int:
    """Largest number of support points on which two members disagree."""
    table = as_table(cls)
    return int(round(max_pairwise_disagreement(table, np.ones(table.shape[1]))))


def exact_best_in_class(cls: ClassLike, dist: LabeledDistribution) -> tuple[Hypothesis, float]:
    table = as_table(cls)
    risks = np.where(table == 1, 1.0 - dist.eta, dist.eta) @ dist.px
    i = int(np.argmin(risks))
    return Hypothesis(table[i], i), float(risks[i])


def exhaustive_chow_minimizer(dist: LabeledDistribution, p: float) -> tuple[AbstainingHypothesis, float]:
    """Minimise exact Chow risk over all 3^M abstaining tables (M <= 8)."""
    m = dist.m
    if m > CHOW_EXHAUSTIVE_CAP:
        raise EnumerationError(f"exhaustive Chow search needs M <= {CHOW_EXHAUSTIVE_CAP}")
    best, best_risk = None, math.inf
    for values in itertools.product((0, 1, ABSTAIN), repeat=m):
        risk = chow_risk_exact(np.array(values), dist, p).chow_risk
        if risk < best_risk:
            best, best_risk = values, risk
    return AbstainingHypothesis(np.array(best)), best_risk


# --------------------------------------------------------------------------
# profile and label-count ceiling


@dataclass
class ComplexityProfile:
    vc: int | None
    star: int | None = None
    diameter: int | None = None
    theta_curve: list = field(default_factory=list)
    theta: ThetaCurve | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {"vc": self.vc, "star": self.star, "diameter": self.diameter, "theta_curve": self.theta_curve}


DEFAULT_THETA_GRID = (0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.001)
# K^2 * M budget for the exact theta precomputation
THETA_CAP = 4 * 10**8


def complexity_profile(cls: HypothesisClass, px, eps_grid=DEFAULT_THETA_GRID, star: bool = True) -> ComplexityProfile:
    table = as_table(cls)
    try:
        vc = cls.declared_vc if cls.declared_vc is not None else vc_dimension(cls)
    except EnumerationError:
        vc = None
    theta = ThetaCurve(table, px) if len(table) ** 2 * table.shape[1] <= THETA_CAP else None
    curve = [(float(e), theta(e)) for e in eps_grid] if theta is not None else []
    return ComplexityProfile(
        vc=vc,
        star=star_number(table) if star else None,
        diameter=class_diameter(table),
        theta_curve=curve,
        theta=theta,
    )


@dataclass
class CeilingCheck:
    bound: float | None
    ledger: int
    within: bool | None

    @property
    def checked(self) -> bool:
        return self.bound is not None


def xi(j: int, schedule: Schedule) -> float:
    """Radius ``50^2 alpha^2(n_{j-1}, delta_{j-1}) / p^2`` of iteration j (n_0 = 1/2)."""
    n_prev = 2.0 ** (j - 2)
    delta_prev = schedule.delta / j**2
    return 50**2 * alpha_sq(n_prev, delta_prev, schedule.d) / schedule.p**2


def theorem31_label_ceiling(transcript: RunTranscript, profile, schedule: Schedule) -> CeilingCheck:
    """Closed-form label-count ceiling summed over the iterations actually run."""
    theta = profile.theta if isinstance(profile, ComplexityProfile) else profile
    ledger = transcript.label_requests
    if theta is None:
        return CeilingCheck(None, ledger, None)
    d, p, delta = schedule.d, schedule.p, schedule.delta
    T = transcript.terminal_iteration or schedule.J
    bound = 0.0
    for j in range(1, min(T, schedule.J) + 1):
        bound += (4 * 50**2 * theta(xi(j, schedule)) / p**2) * (9 * d + (3 * d + 3) * j + 2 * clog(56 / delta))
        bound += 6 * clog(1 + j) + 3 * clog(56 / delta)
    return CeilingCheck(bound, ledger, ledger <= bound)


def excess_report(out, cls: ClassLike, dist: LabeledDistribution, p: float) -> dict:
    """Exact excess risks of an output against the best member of the class."""
    _, best = exact_best_in_class(cls, dist)
    rep = chow_risk_exact(out, dist, p)
    pred = out.predictions if hasattr(out, "predictions") else np.asarray(out)
    confident = np.abs(2 * dist.eta - 1) >= 4 * p
    row = {
        "best_risk": best,
        "excess_chow": rep.chow_risk - best,
        "excess_r0": rep.binary_risk - best,
        "abstain_mass": rep.abstain_mass,
        "confident_abstain_mass": float(dist.px[(pred == ABSTAIN) & confident].sum()),
    }
    if not (pred == ABSTAIN).any():
        row["excess_binary"] = binary_risk_exact(pred, dist) - best
    else:
        row["excess_binary"] = rep.binary_risk - best
    return row
