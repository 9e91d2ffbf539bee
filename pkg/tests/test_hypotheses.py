import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from abstain_al.hypotheses import (
    ABSTAIN,
    AbstainingHypothesis,
    EnumerationError,
    Hypothesis,
    HypothesisClass,
    InstanceSpace,
    class_from_json,
    disagreement_set,
    empirical_l2_diameter,
    growth_function,
    max_pairwise_disagreement,
    midpoint,
    random_class,
    threshold_class,
    true_l1_distance,
    vc_dimension,
)

tables = st.integers(2, 7).flatmap(
    lambda m: st.lists(st.lists(st.integers(0, 1), min_size=m, max_size=m), min_size=1, max_size=12, unique_by=tuple)
)


def test_instance_space_validation():
    assert InstanceSpace.grid(4).coords == (0.0, 0.25, 0.5, 0.75)
    with pytest.raises(ValueError):
        InstanceSpace(0)
    with pytest.raises(ValueError):
        InstanceSpace(2, (0.5, 0.1))


def test_class_rejects_duplicates_and_bad_values():
    with pytest.raises(ValueError, match="duplicate"):
        HypothesisClass(np.array([[0, 1], [0, 1]]))
    with pytest.raises(ValueError):
        HypothesisClass(np.array([[0, 2]]))
    with pytest.raises(ValueError):
        Hypothesis(np.array([0, -1]))


def test_hypothesis_equality_is_by_table():
    a = Hypothesis(np.array([0, 1, 1]), 3)
    b = Hypothesis(np.array([0, 1, 1]), 7)
    assert a == b and hash(a) == hash(b)
    assert a.as_abstaining() == a


def test_abstaining_roundtrip():
    f = AbstainingHypothesis.from_list([0, "*", 1])
    assert f.to_list() == [0, "*", 1]
    assert f.abstains()
    assert f.predictions[1] == ABSTAIN


# disagreement set


def test_disagreement_singleton_is_empty():
    assert disagreement_set([Hypothesis(np.array([1, 0, 1]))]) == frozenset()


def test_disagreement_of_two_thresholds():
    cls = threshold_class(10)
    # f_{0.3} and f_{0.7}: coordinates in [0.3, 0.7)
    assert disagreement_set([cls[3], cls[7]]) == frozenset({3, 4, 5, 6})


def test_disagreement_random_class_matches_pairwise_scan():
    cls = random_class(8, 10, seed=1)
    assert disagreement_set(cls) == oracles.disagreement(cls.table)


def test_disagreement_empty_subset():
    with pytest.raises(ValueError, match="empty version space"):
        disagreement_set([])


@given(tables, st.data())
def test_disagreement_union_and_monotonicity(table, data):
    cls = HypothesisClass(np.array(table))
    full = disagreement_set(cls)
    s0 = cls[0]
    assert full == frozenset().union(*(disagreement_set([f, s0]) for f in cls))
    k = data.draw(st.integers(1, len(cls)))
    sub = [cls[i] for i in range(k)]
    assert disagreement_set(sub) <= full


# diameters and distances


def test_empirical_diameter_small_cases():
    f = Hypothesis(np.array([0, 0, 0, 0]))
    g = Hypothesis(np.array([1, 0, 0, 0]))
    assert empirical_l2_diameter([f], [0, 1, 2]) == 0.0
    assert empirical_l2_diameter([f, g], [0, 1, 2, 3]) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(ValueError, match="empty sample"):
        empirical_l2_diameter([f, g], [])


def test_empirical_diameter_matches_pairwise_max(rng):
    cls = random_class(12, 20, seed=5)
    sample = rng.integers(0, 12, size=50)
    expected = math.sqrt(oracles.max_pair_disagreement(cls.table, sample.tolist()) / 50)
    assert empirical_l2_diameter(cls, sample) == pytest.approx(expected, abs=1e-12)


@given(st.lists(st.integers(0, 1), min_size=5, max_size=5), st.lists(st.integers(0, 1), min_size=5, max_size=5),
       st.lists(st.integers(0, 4), min_size=1, max_size=30))
def test_binary_identity_diameter_squared_is_mean_disagreement(f, g, sample):
    f, g = Hypothesis(np.array(f)), Hypothesis(np.array(g))
    mean = np.mean([f.predictions[x] != g.predictions[x] for x in sample])
    assert empirical_l2_diameter([f, g], sample) ** 2 == pytest.approx(mean, abs=1e-12)


@given(tables, st.data())
def test_diameter_monotone_in_subsets(table, data):
    table = np.array(table, dtype=np.int8)
    k = data.draw(st.integers(1, len(table)))
    w = np.ones(table.shape[1])
    assert max_pairwise_disagreement(table[:k], w) <= max_pairwise_disagreement(table, w) + 1e-12


def test_true_l1_distance_cases(rng):
    f = Hypothesis(np.array([0, 1, 0]))
    assert true_l1_distance(f, f, [0.2, 0.3, 0.5]) == 0.0
    g = Hypothesis(np.array([0, 0, 0]))
    assert true_l1_distance(f, g, [0.2, 0.3, 0.5]) == pytest.approx(0.3, abs=1e-15)
    a, b = rng.integers(0, 2, 16), rng.integers(0, 2, 16)
    px = rng.dirichlet(np.ones(16))
    expected = sum(w for x, y, w in zip(a, b, px) if x != y)
    assert true_l1_distance(Hypothesis(a), Hypothesis(b), px) == pytest.approx(expected, abs=1e-12)
    with pytest.raises(ValueError):
        true_l1_distance(f, Hypothesis(np.array([0, 1])), [0.5, 0.5])


# midpoints


def test_midpoint_cases():
    f = Hypothesis(np.array([0, 1, 0]))
    g = Hypothesis(np.array([1, 1, 0]))
    assert midpoint(f, f) == f
    assert midpoint(f, g).to_list() == ["*", 1, 0]
    cls = threshold_class(8)
    m = midpoint(cls[2], cls[5])
    assert np.flatnonzero(m.abstain_mask).tolist() == [2, 3, 4]


@given(st.lists(st.integers(0, 1), min_size=6, max_size=6), st.lists(st.integers(0, 1), min_size=6, max_size=6))
def test_midpoint_symmetric(a, b):
    f, g = Hypothesis(np.array(a)), Hypothesis(np.array(b))
    assert midpoint(f, g) == midpoint(g, f)


# growth function and VC dimension


def test_growth_function_small_cases():
    cls = threshold_class(6)
    assert growth_function(cls, 0) == 1
    assert growth_function(cls, 1) == 2
    assert growth_function(cls, 2) == 3


def test_growth_function_matches_subset_enumeration():
    cls = random_class(8, 10, seed=3)
    for k in range(0, 5):
        assert growth_function(cls, k) == oracles.growth(cls.table, k)


def test_vc_dimension_cases():
    assert vc_dimension(HypothesisClass(np.array([[0, 1, 1]]))) == 0
    assert vc_dimension(HypothesisClass(threshold_class(12).table)) == 1
    for seed in range(4):
        cls = random_class(6, 12, seed=seed)
        assert vc_dimension(cls) == oracles.vc(cls.table)


def test_vc_cap_raises_without_declaration(monkeypatch):
    import abstain_al.hypotheses as H

    monkeypatch.setattr(H, "ENUMERATION_CAP", 5)
    with pytest.raises(EnumerationError):
        vc_dimension(random_class(12, 40, seed=0))
    cls = HypothesisClass(random_class(12, 40, seed=0).table, declared_vc=5)
    assert cls.vc() == 5


@given(tables)
def test_sauer_bound(table):
    cls = HypothesisClass(np.array(table))
    d = vc_dimension(cls)
    for k in range(1, cls.m + 1):
        bound = (math.e * max(k, d) / d) ** d if d else 1
        assert growth_function(cls, k) <= bound + 1e-9


def test_class_from_json():
    assert len(class_from_json({"kind": "threshold", "grid": 16})) == 17
    cls = class_from_json({"kind": "explicit", "table": [[0, 1], [1, 1]], "declared_vc": 1})
    assert cls.vc() == 1
    assert len(class_from_json({"kind": "random", "m": 6, "count": 5, "seed": 2})) == 5
    with pytest.raises(ValueError):
        class_from_json({"kind": "spline"})
