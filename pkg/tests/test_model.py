import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from impactlearn import errors
from impactlearn.model import ImpactModel, impact_scores

from conftest import make_dataset


def test_zero_weights_predict_bias():
    m = ImpactModel([0.0, 0.0], 0.3, 4.5, 1.0, 2.0)
    assert m.predict([7.0, -3.0]) == 4.5


def test_direct_substitution_degree_one():
    m = ImpactModel([1.0], 0.25, 0.0, 1.0, 2.0)
    assert m.predict([3.0]) == pytest.approx(12.0, abs=1e-12)


def test_direct_substitution_degree_two():
    m = ImpactModel([1.0, 1.0], 0.0, 1.0, 2.0, 1.0, degree=2)
    assert m.predict([2.0, 3.0]) == pytest.approx(7.5, abs=1e-12)


def test_matrix_prediction_matches_rows():
    m = ImpactModel([0.5, -1.0], 0.1, 0.2, 1.5, 3.0)
    X = np.array([[1.0, 2.0], [0.0, -1.0]])
    np.testing.assert_array_equal(m.predict(X), [m.predict(X[0]), m.predict(X[1])])


def test_dimension_mismatch():
    with pytest.raises(errors.DimensionMismatch):
        ImpactModel([1.0, 2.0], 0.0, 0.0, 1.0, 1.0).predict([1.0])


def test_pole_guard():
    with pytest.raises(errors.PoleViolation):
        ImpactModel([1.0], 0.5, 0.0, 1.0, 2.0)
    ImpactModel([1.0], 0.5, 0.0, 1.0 + 1e-9, 2.0)  # just off the pole is fine


@pytest.mark.parametrize("kw", [dict(k=0.0), dict(k=-1.0), dict(degree=0), dict(degree=1.5)])
def test_invalid_parameters(kw):
    params = dict(w=[1.0], w_y=0.0, b=0.0, r=1.0, k=1.0, degree=1)
    params.update(kw)
    with pytest.raises(errors.InvalidModel):
        ImpactModel(**params)


@pytest.mark.parametrize("score,label", [(0.9, 1), (0.5, 1), (0.2, 0)])
def test_classify_threshold(score, label):
    m = ImpactModel([0.0], 0.0, score, 1.0, 1.0, threshold=0.5)
    assert m.classify([1.0]) == (label, score)


def test_json_round_trip_exact(rng):
    m = ImpactModel(rng.normal(size=4), 0.1234567890123, -3.3e-7, 0.7, 2.0 / 3.0, 2, 0.37)
    text = m.to_json()
    assert set(json.loads(text)) == {"w", "w_y", "b", "r", "k", "j", "threshold"}
    back = ImpactModel.from_json(text)
    X = rng.normal(size=(10, 4))
    np.testing.assert_array_equal(back.predict(X), m.predict(X))


# impact scores

def test_zero_weight_feature_has_no_impact(rng):
    X = rng.uniform(size=(20, 2))
    m = ImpactModel([1.5, 0.0], 0.1, 0.3, 1.0, 2.0)
    ds = make_dataset(X, m.predict(X) + rng.normal(0, 0.1, 20))
    excl = m.impact_score(ds, 1)
    full = np.abs(ds.target - m.predict(X)) ** (2.0 / ds.n)
    np.testing.assert_allclose(excl.per_row, full, rtol=1e-12)


def test_impact_exponent_two_over_n():
    # N = 2 rows, residual 4 on the first row: 4 ** (2/2) = 4
    m = ImpactModel([1.0, 0.0], 0.0, 0.0, 1.0, 1.0)
    ds = make_dataset([[10.0, 1.0], [0.0, 1.0]], [4.0, 0.0])
    res = m.impact_score(ds, 0)
    np.testing.assert_allclose(res.per_row, [4.0, 0.0])
    assert res.aggregate == pytest.approx(2.0)


def test_negative_residual_uses_magnitude():
    m = ImpactModel([0.0], 0.0, 0.0, 1.0, 1.0)
    ds = make_dataset([[0.0], [0.0], [0.0], [0.0]], [-16.0, 16.0, 0.0, 0.0])
    np.testing.assert_allclose(m.impact_score(ds, 0).per_row, [4.0, 4.0, 0.0, 0.0])


def test_real_feature_outweighs_dummy(rng):
    """Brute force: noise-free single-feature data padded with a zero-weight dummy."""
    X = rng.uniform(size=(50, 1))
    gen = ImpactModel([2.0], 0.2, 1.0, 1.5, 1.0)
    y = gen.predict(X)
    padded = ImpactModel([2.0, 0.0], 0.2, 1.0, 1.5, 1.0)
    ds = make_dataset(np.hstack([X, rng.uniform(size=(50, 1))]), y)
    brute = []
    for excluded in (0, 1):
        vals = []
        for row, target in zip(ds.features, ds.target):
            s = sum(padded.w[i] * row[i] for i in range(2) if i != excluded)
            vals.append(abs(target - (padded.k * s / (padded.r - padded.w_y * padded.k) + padded.b)) ** (2 / 50))
        brute.append(np.mean(vals))
    real, dummy = impact_scores(padded, ds)
    assert real.aggregate == pytest.approx(brute[0], rel=1e-12)
    assert dummy.aggregate == pytest.approx(brute[1], abs=1e-12)
    assert real.aggregate > dummy.aggregate


def test_impact_index_out_of_range():
    m = ImpactModel([1.0], 0.0, 0.0, 1.0, 1.0)
    with pytest.raises(errors.IndexOutOfRange):
        m.impact_score(make_dataset([[1.0]], [1.0]), 1)


# properties

param = st.floats(-3, 3, allow_nan=False)


@given(st.lists(param, min_size=1, max_size=5), param, st.floats(0.1, 5), st.floats(0.1, 5),
       st.floats(0.1, 5), st.floats(-2, 2), st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_gauge_equivalence(w, b, k1, k2, r2, w_y2, seed):
    """Two parameterizations sharing c = k w / (r - w_y k) predict identically."""
    m1 = ImpactModel(w, 0.0, b, 1.0, k1)
    c = m1.effective_coefficients()
    D2 = r2 - w_y2 * k2
    if abs(D2) < 1e-3:
        return
    m2 = ImpactModel(c * D2 / k2, w_y2, b, r2, k2)
    X = np.random.default_rng(seed).normal(size=(8, len(w)))
    np.testing.assert_allclose(m2.predict(X), m1.predict(X), rtol=1e-9, atol=1e-9)


@given(st.lists(param, min_size=3, max_size=3), param, st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_linear_in_x_for_degree_one(w, b, seed):
    m = ImpactModel(w, 0.3, b, 2.0, 1.5)
    x1, x2 = np.random.default_rng(seed).normal(size=(2, 3))
    assert m.predict(x1 + x2) - b == pytest.approx((m.predict(x1) - b) + (m.predict(x2) - b), abs=1e-9)


@given(st.integers(-80, 80), st.integers(-80, 80), st.sampled_from([np.exp, np.arctan, lambda v: v ** 3 + v]))
@settings(max_examples=100, deadline=None)
def test_classify_invariant_under_increasing_map(score, threshold, f):
    # a coarse grid keeps the maps strictly increasing after rounding
    score, threshold = score / 8, threshold / 8
    m = ImpactModel([0.0], 0.0, score, 1.0, 1.0, threshold=threshold)
    mapped = ImpactModel([0.0], 0.0, f(score), 1.0, 1.0, threshold=f(threshold))
    assert m.classify([0.0])[0] == mapped.classify([0.0])[0]
