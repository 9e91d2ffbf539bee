import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from abstain_al.distribution import LabeledDistribution, LabeledSample, LabelOracle, Pool, random_distribution
from abstain_al.hypotheses import ABSTAIN, AbstainingHypothesis, Hypothesis, HypothesisClass, random_class
from abstain_al.risk import (
    alpha,
    alpha_sq,
    beta,
    binary_risk_empirical,
    binary_risk_exact,
    chow_risk_empirical,
    chow_risk_exact,
    clog,
    gamma,
    lp_loss,
    sigma,
    verify_uniform_bounds,
)

P_GRID = [0.0, 0.01, 0.1, 0.25, 0.4, 0.5]
TOL = 1e-12


def test_lp_loss_cases():
    assert lp_loss(1, 1, 0.2) == 0
    assert lp_loss(0, "*", 0.1) == pytest.approx(0.4)
    assert lp_loss(1, 0, 0.3) == 1


def test_midpoint_loss_identity_exhaustive():
    for y, a, b, p in itertools.product((0, 1), (0, 1), (0, 1), P_GRID):
        mid = a if a == b else ABSTAIN
        rhs = 0.5 * lp_loss(y, a, p) + 0.5 * lp_loss(y, b, p) - p * (a - b) ** 2
        assert abs(lp_loss(y, mid, p) - rhs) <= TOL


def test_chow_risk_exact_cases():
    everywhere = AbstainingHypothesis(np.full(3, ABSTAIN))
    dist = random_distribution(3, seed=0)
    assert chow_risk_exact(everywhere, dist, 0.01).chow_risk == pytest.approx(0.49, abs=TOL)
    det = LabeledDistribution([0.2, 0.8], [0.0, 1.0])
    assert chow_risk_exact(Hypothesis(np.array([0, 1])), det, 0.3).chow_risk == 0.0
    single = LabeledDistribution([1.0], [0.3])
    assert chow_risk_exact(np.array([1]), single, 0.2).chow_risk == pytest.approx(0.7, abs=TOL)


def test_binary_risk_exact_cases():
    assert binary_risk_exact(np.array([1, 1]), LabeledDistribution([0.5, 0.5], [1.0, 1.0])) == 0.0
    assert binary_risk_exact(np.zeros(4, dtype=int), LabeledDistribution([0.25] * 4, [0.3] * 4)) == pytest.approx(0.3)
    rng = np.random.default_rng(7)
    dist = random_distribution(16, seed=7)
    f = rng.integers(0, 2, 16)
    assert binary_risk_exact(f, dist) == pytest.approx(oracles.binary_risk(f, dist.px, dist.eta), abs=TOL)
    with pytest.raises(ValueError):
        binary_risk_exact(np.array([ABSTAIN, 1]), LabeledDistribution([0.5, 0.5], [1.0, 1.0]))


@given(st.integers(0, 10**6), st.sampled_from(P_GRID[1:]))
def test_risk_report_decomposition(seed, p):
    rng = np.random.default_rng(seed)
    dist = random_distribution(8, seed)
    f = rng.choice([0, 1, ABSTAIN], size=8)
    rep = chow_risk_exact(f, dist, p)
    assert abs(rep.chow_risk - (rep.error_mass + (0.5 - p) * rep.abstain_mass)) <= TOL
    assert abs(rep.binary_risk - (rep.error_mass + 0.5 * rep.abstain_mass)) <= TOL
    assert abs(rep.chow_risk - oracles.chow_risk(f, dist.px, dist.eta, p)) <= TOL
    assert 0 <= rep.chow_risk <= 1
    # affine in p with slope -abstain_mass
    q = p / 2
    assert abs(chow_risk_exact(f, dist, q).chow_risk - rep.chow_risk - (p - q) * rep.abstain_mass) <= TOL


@given(st.integers(0, 10**6))
def test_chow_equals_binary_without_abstention(seed):
    rng = np.random.default_rng(seed)
    dist = random_distribution(10, seed)
    f = rng.integers(0, 2, 10)
    for p in P_GRID:
        assert abs(chow_risk_exact(f, dist, p).chow_risk - binary_risk_exact(f, dist)) <= TOL


def test_chow_risk_empirical_cases():
    f = AbstainingHypothesis(np.array([ABSTAIN, 1]))
    assert chow_risk_empirical(f, [(0, 1), (1, 0)], 0.1) == pytest.approx(0.7, abs=TOL)
    g = np.array([0, 1, 1])
    pairs = [(0, 1), (1, 1), (2, 0), (2, 0)]
    assert chow_risk_empirical(g, pairs, 0.3) == binary_risk_empirical(g, pairs) == 0.75
    with pytest.raises(ValueError, match="empty sample"):
        chow_risk_empirical(f, [], 0.1)


@given(st.integers(0, 10**6), st.sampled_from(P_GRID[1:]))
def test_chow_risk_empirical_matches_loop(seed, p):
    rng = np.random.default_rng(seed)
    f = rng.choice([0, 1, ABSTAIN], size=6)
    pairs = [(int(x), int(y)) for x, y in zip(rng.integers(0, 6, 40), rng.integers(0, 2, 40))]
    assert abs(chow_risk_empirical(f, pairs, p) - oracles.empirical_chow(f, pairs, p)) <= TOL
    # sample-level decomposition: errors off the abstention set plus (1/2 - p) per abstained draw
    s = LabeledSample.from_pairs(6, pairs)
    abstained = s.counts[f == ABSTAIN].sum() / s.n
    non_abstain = np.where(f == ABSTAIN, 0, f)
    errs_off = np.where(non_abstain == 1, s.zeros, s.ones)[f != ABSTAIN].sum() / s.n
    assert abs(chow_risk_empirical(f, s, p) - (errs_off + (0.5 - p) * abstained)) <= TOL


def test_chow_risk_empirical_converges():
    dist = random_distribution(12, seed=11)
    f = AbstainingHypothesis(np.array([0, 1, ABSTAIN] * 4))
    n = 200_000
    s = LabeledSample.draw(Pool(dist, 5), LabelOracle(dist, 5), n)
    # losses lie in [0, 1]; Hoeffding at delta = 1e-6
    radius = math.sqrt(math.log(2 / 1e-6) / (2 * n))
    assert abs(chow_risk_empirical(f, s, 0.2) - chow_risk_exact(f, dist, 0.2).chow_risk) <= radius


# radii


def test_clog():
    assert clog(1.0) == 1.0 and clog(math.e**3) == pytest.approx(3.0)


def test_alpha_reference_value():
    assert alpha_sq(100, 0.1, 1) == pytest.approx(1.008915555, abs=1e-8)
    assert alpha_sq(100, 0.1, 1) == pytest.approx(float(oracles.alpha_sq(100, 0.1, 1)), abs=1e-14)


@given(st.integers(1, 10**7), st.floats(1e-6, 1.0), st.integers(1, 30))
def test_radii_match_high_precision(n, delta, d):
    assert alpha(n, delta, d).value ** 2 == pytest.approx(float(oracles.alpha_sq(n, delta, d)), rel=1e-12)
    assert beta(n, delta, d).value ** 2 == pytest.approx(float(oracles.beta_sq(n, delta, d)), rel=1e-12)
    assert gamma(n, delta, d).value ** 2 == pytest.approx(float(oracles.gamma_sq(n, delta, d)), rel=1e-12)


@given(st.integers(1, 10**6), st.floats(1e-4, 0.9), st.integers(1, 10))
def test_radii_monotone(n, delta, d):
    for rad in (alpha, beta, gamma):
        assert rad(n, delta, d).value > 0
        assert rad(n + 1, delta, d).value <= rad(n, delta, d).value
        assert rad(n, delta / 2, d).value > rad(n, delta, d).value


def test_radii_at_n_equal_d():
    for rad in (alpha, beta, gamma):
        v = rad(5, 0.05, 5).value
        assert math.isfinite(v) and v > 0


def test_sigma_exact_and_sauer_paths(monkeypatch):
    cls = random_class(6, 10, seed=2)
    s = sigma(3, 0.1, cls)
    assert s.exact_growth
    expected = math.sqrt(4 / 3 * (max(math.log(oracles.growth(cls.table, 6)), 1) + clog(80)))
    assert s.value == pytest.approx(expected, abs=1e-12)

    import abstain_al.hypotheses as H

    monkeypatch.setattr(H, "ENUMERATION_CAP", 1)
    big = HypothesisClass(random_class(10, 30, seed=1).table, declared_vc=3)
    s2 = sigma(2, 0.1, big)
    assert not s2.exact_growth
    assert s2.value == pytest.approx(math.sqrt(2 * (3 * clog(math.e * 4 / 3) + clog(80))), abs=1e-12)


# Monte Carlo deviation-bound check


def test_uniform_bounds_singleton_class():
    cls = HypothesisClass(np.array([[0, 1, 1, 0]]))
    res = verify_uniform_bounds(cls, random_distribution(4, seed=1), n=20, delta=0.1, trials=25)
    assert res.fractions() == {"vc_uniform_1": 1.0, "vc_uniform_2": 1.0, "chow_uniform": 1.0}


def test_uniform_bounds_rows_consistent():
    cls = random_class(8, 6, seed=4)
    res = verify_uniform_bounds(cls, random_distribution(8, seed=4), n=30, delta=0.1, trials=20, seed=3)
    assert len(res.rows) == 20
    assert res.vc_uniform_1 == np.mean([r["vc_uniform_1"] for r in res.rows])
    again = verify_uniform_bounds(cls, random_distribution(8, seed=4), n=30, delta=0.1, trials=20, seed=3)
    assert again.rows == res.rows
