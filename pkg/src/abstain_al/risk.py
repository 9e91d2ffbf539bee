"""Risk functionals, the abstention loss and uniform deviation radii."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .distribution import LabeledDistribution, LabeledSample, stream
from .hypotheses import (
    ABSTAIN,
    AbstainingHypothesis,
    ClassLike,
    EnumerationError,
    Hypothesis,
    as_table,
    growth_function,
    vc_dimension,
)


def clog(x: float) -> float:
    """Natural logarithm clamped below at 1."""
    return max(math.log(x), 1.0)


def _predictions(f) -> np.ndarray:
    if isinstance(f, (Hypothesis, AbstainingHypothesis)):
        return f.predictions
    return np.asarray(f)


def lp_loss(y: int, v, p: float) -> float:
    """Loss of predicting ``v`` (0, 1 or * / ABSTAIN) when the label is ``y``."""
    if v == "*" or v == ABSTAIN:
        return 0.5 - p
    return float(v != y)


@dataclass(frozen=True)
class RiskReport:
    """Exact risk decomposition. ``binary_risk`` scores * as a fair coin flip."""

    binary_risk: float
    chow_risk: float
    abstain_mass: float
    error_mass: float
    p: float

    def to_json(self) -> dict:
        return asdict(self)


def chow_risk_exact(f, dist: LabeledDistribution, p: float) -> RiskReport:
    pred = _predictions(f)
    if len(pred) != dist.m:
        raise ValueError("classifier and distribution live on different spaces")
    abstain = pred == ABSTAIN
    err = np.where(pred == 1, 1.0 - dist.eta, dist.eta)
    error_mass = float(dist.px[~abstain] @ err[~abstain])
    abstain_mass = float(dist.px[abstain].sum())
    return RiskReport(
        binary_risk=error_mass + 0.5 * abstain_mass,
        chow_risk=error_mass + (0.5 - p) * abstain_mass,
        abstain_mass=abstain_mass,
        error_mass=error_mass,
        p=p,
    )


def binary_risk_exact(f, dist: LabeledDistribution) -> float:
    pred = _predictions(f)
    if ((pred != 0) & (pred != 1)).any():
        raise ValueError("binary risk needs a {0,1}-valued classifier")
    return float(dist.px @ np.where(pred == 1, 1.0 - dist.eta, dist.eta))


def _as_sample(sample, m: int) -> LabeledSample:
    if isinstance(sample, LabeledSample):
        return sample
    return LabeledSample.from_pairs(m, sample)


def chow_risk_empirical(f, labeled_sample, p: float) -> float:
    pred = _predictions(f)
    s = _as_sample(labeled_sample, len(pred))
    if s.n == 0:
        raise ValueError("empty sample")
    errors = np.where(pred == 1, s.zeros, s.ones)
    total = errors[pred != ABSTAIN].sum() + (0.5 - p) * s.counts[pred == ABSTAIN].sum()
    return float(total / s.n)


def binary_risk_empirical(f, labeled_sample) -> float:
    pred = _predictions(f)
    s = _as_sample(labeled_sample, len(pred))
    if s.n == 0:
        raise ValueError("empty sample")
    return float(np.where(pred == 1, s.zeros, s.ones).sum() / s.n)


# --------------------------------------------------------------------------
# deviation radii


@dataclass(frozen=True)
class DeviationRadius:
    n: float
    delta: float
    d: int
    value: float
    kind: str = "alpha"
    exact_growth: bool | None = None

    @property
    def squared(self) -> float:
        return self.value**2

    def __float__(self):
        return self.value


def _vc_radius_sq(n: float, delta: float, d: int, d_coef: int, const: float) -> float:
    if n <= 0 or not 0 < delta <= 1 or d < 1:
        raise ValueError("need n > 0, delta in (0, 1], d >= 1")
    return (4.0 / n) * (d_coef * d * clog(math.e * max(2 * n, d) / d) + clog(const / delta))


def alpha_sq(n: float, delta: float, d: int) -> float:
    return _vc_radius_sq(n, delta, d, 3, 56.0)


def alpha(n: float, delta: float, d: int) -> DeviationRadius:
    return DeviationRadius(n, delta, d, math.sqrt(alpha_sq(n, delta, d)), "alpha")


def beta(n: float, delta: float, d: int) -> DeviationRadius:
    return DeviationRadius(n, delta, d, math.sqrt(_vc_radius_sq(n, delta, d, 2, 24.0)), "beta")


def gamma(n: float, delta: float, d: int) -> DeviationRadius:
    return DeviationRadius(n, delta, d, math.sqrt(_vc_radius_sq(n, delta, d, 3, 32.0)), "gamma")


def sigma(n: int, delta: float, cls: ClassLike, d: int | None = None) -> DeviationRadius:
    """Radius built on the growth function at 2n; Sauer bound when not enumerable."""
    if n < 1 or not 0 < delta <= 1:
        raise ValueError("need n >= 1, delta in (0, 1]")
    try:
        log_growth = math.log(growth_function(cls, 2 * n))
        exact = True
    except EnumerationError:
        if d is None:
            d = getattr(cls, "declared_vc", None)
        if d is None:
            raise
        log_growth = d * clog(math.e * max(2 * n, d) / d) if d else 0.0
        exact = False
    # log convention applies to every logarithm, including log S(2n)
    value_sq = (4.0 / n) * (max(log_growth, 1.0) + clog(8.0 / delta))
    return DeviationRadius(n, delta, d if d is not None else -1, math.sqrt(value_sq), "sigma", exact)


# --------------------------------------------------------------------------
# Monte Carlo verification of the uniform deviation lemmas


@dataclass
class UniformBoundsResult:
    trials: int
    vc_uniform_1: float
    vc_uniform_2: float
    chow_uniform: float
    rows: list

    def fractions(self) -> dict:
        return {"vc_uniform_1": self.vc_uniform_1, "vc_uniform_2": self.vc_uniform_2, "chow_uniform": self.chow_uniform}


def _loss_rows(values: np.ndarray, dist: LabeledDistribution, p: float):
    """Per-point exact loss and per-label loss tables for {0, 1/2, 1}-valued rows."""
    half = values == 0.5
    exact = np.where(values == 1, 1.0 - dist.eta, dist.eta)
    exact = np.where(half, 0.5 - p, exact)
    loss_if_one = np.where(half, 0.5 - p, (values != 1).astype(float))
    loss_if_zero = np.where(half, 0.5 - p, (values != 0).astype(float))
    return exact, loss_if_one, loss_if_zero


def verify_uniform_bounds(
    cls: ClassLike,
    dist: LabeledDistribution,
    n: int,
    delta: float,
    trials: int,
    p: float = 0.25,
    seed: int = 0,
    d: int | None = None,
) -> UniformBoundsResult:
    """Fraction of fresh samples on which each uniform deviation inequality holds.

    Checks, over all pairs of the class, the excess-risk and L1 deviation
    bounds with radius beta, and over all f in the class and g in the
    mid-point hull (F + F)/2 the Chow-risk deviation bound with radius gamma.
    """
    table = as_table(cls).astype(np.float64)
    K, m = table.shape
    if d is None:
        d = getattr(cls, "declared_vc", None) or vc_dimension(cls)
    d = max(d, 1)
    b = beta(n, delta, d).value
    g_rad = gamma(n, delta, d).value

    diff = (table[:, None, :] != table[None, :, :]).astype(np.float64)  # K x K x m
    true_l1 = diff @ dist.px
    err = np.where(table == 1, 1.0 - dist.eta, dist.eta)
    true_risk = err @ dist.px

    hull = ((table[:, None, :] + table[None, :, :]) / 2).reshape(K * K, m)
    f_exact, f_one, f_zero = _loss_rows(table, dist, p)
    g_exact, g_one, g_zero = _loss_rows(hull, dist, p)
    sq = (table[:, None, :] - hull[None, :, :]) ** 2  # K x K^2 x m
    true_sq = sq @ dist.px
    true_chow_gap = (f_exact @ dist.px)[:, None] - (g_exact @ dist.px)[None, :]

    rng = stream(seed, 0)
    rows = []
    passes = np.zeros(3)
    for t in range(trials):
        counts = rng.multinomial(n, dist.px)
        ones = rng.binomial(counts, dist.eta)
        zeros = counts - ones
        emp_l1 = diff @ counts / n
        emp_err = (np.where(table == 1, zeros, ones)).sum(axis=1) / n
        gap = np.abs(true_risk[:, None] - true_risk[None, :] - emp_err[:, None] + emp_err[None, :])
        scale = np.sqrt(np.minimum(emp_l1, true_l1))
        ok1 = bool((gap <= 2 * b * b + 2 * b * scale + 1e-12).all())
        ok2 = bool((np.abs(true_l1 - emp_l1) <= b * b + b * scale + 1e-12).all())

        f_emp = (f_one @ ones + f_zero @ zeros) / n
        g_emp = (g_one @ ones + g_zero @ zeros) / n
        emp_sq = sq @ counts / n
        chow_gap = np.abs(true_chow_gap - f_emp[:, None] + g_emp[None, :])
        ok3 = bool((chow_gap <= 4 * g_rad**2 + 8 * g_rad * np.sqrt(np.minimum(emp_sq, true_sq)) + 1e-12).all())

        passes += (ok1, ok2, ok3)
        rows.append(
            {
                "trial": t,
                "vc_uniform_1": ok1,
                "vc_uniform_2": ok2,
                "chow_uniform": ok3,
                "max_risk_gap": float(gap.max()),
                "max_l1_gap": float(np.abs(true_l1 - emp_l1).max()),
                "max_chow_gap": float(chow_gap.max()),
            }
        )
    frac = passes / max(trials, 1) if trials else np.ones(3)
    return UniformBoundsResult(trials, float(frac[0]), float(frac[1]), float(frac[2]), rows)
