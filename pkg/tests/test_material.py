import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from npspect.material import (Classification, ConvexityError, EssSpecPrediction, LameParams, constant_field,
                              kappa0, kelvin_constants, modulated_field, per_component_field,
                              predict_essential_spectrum, prediction_from_ranges, validate_convexity)


def test_convexity_verdicts():
    assert validate_convexity(LameParams(1, 1), 3)
    bad = validate_convexity(LameParams(-1, 1), 3)
    assert not bad and bad.failed == "3*lambda+2*mu>0 failed"
    zero = validate_convexity(LameParams(0, 0), 2)
    assert not zero and zero.failed == "mu>0 failed"
    with pytest.raises(ValueError):
        validate_convexity(LameParams(1, 1), 4)


@pytest.mark.parametrize("lam,mu,expected", [(1, 1, 1 / 6), (0, 1, 1 / 4), (1, 2, 0.2)])
def test_kappa0_values(lam, mu, expected):
    assert kappa0(LameParams(lam, mu)) == pytest.approx(expected, rel=1e-15)


def test_kappa0_rejects_invalid():
    with pytest.raises(ConvexityError):
        kappa0(LameParams(-1, 1))


def test_kelvin_constants_unit_material():
    kc = kelvin_constants(LameParams(1, 1))
    assert kc.lambda_prime == pytest.approx(1 / (6 * math.pi), rel=1e-14)
    assert kc.mu_prime == pytest.approx(1 / (3 * math.pi), rel=1e-14)
    assert kc.delta_prime == pytest.approx(1 / (6 * math.pi), rel=1e-14)
    # the defining formulas give a negative difference; only its modulus is used
    assert kc.literal_difference == pytest.approx(-kc.delta_prime, rel=1e-14)
    assert kelvin_constants(LameParams(0, 1)).delta_prime == pytest.approx(1 / (4 * math.pi), rel=1e-14)


valid_params = st.builds(
    lambda mu, t: LameParams(-2 * mu / 3 + t, mu),
    st.floats(0.05, 20.0), st.floats(1e-3, 50.0))


@settings(max_examples=200, deadline=None)
@given(valid_params)
def test_kappa0_bounds_and_identity(p):
    k = kappa0(p)
    assert 0 < k < 0.5
    assert math.pi * p.mu * kelvin_constants(p).delta_prime == pytest.approx(k, rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(0.1, 5.0), st.floats(1e-3, 1.0))
def test_kappa0_increasing_in_mu(lam, mu, dmu):
    assert kappa0(LameParams(lam, mu + dmu)) > kappa0(LameParams(lam, mu))


def test_predictions_per_field_kind(rng):
    pts = rng.normal(size=(500, 3))
    pred = predict_essential_spectrum(constant_field(1, 1), [pts])
    assert pred.points == pytest.approx((-1 / 6, 0.0, 1 / 6)) and not pred.intervals
    two = predict_essential_spectrum(per_component_field([(1, 1), (1, 2)]), [pts, pts])
    assert two.points == pytest.approx((-0.2, -1 / 6, 0.0, 1 / 6, 0.2))
    sphere = np.vstack([pts / np.linalg.norm(pts, axis=1, keepdims=True), [[0, 0, 1], [0, 0, -1]]])
    var = predict_essential_spectrum(modulated_field((1, 1), (1, 2)), [sphere])
    assert var.points == (0.0,)
    assert var.intervals[1] == pytest.approx((1 / 6, 0.2), abs=1e-12)
    assert var.is_symmetric(1e-15)


def test_prediction_invariants():
    with pytest.raises(ValueError):
        EssSpecPrediction((0.1, -0.1))
    with pytest.raises(ValueError):
        EssSpecPrediction((0.0,), ((0.2, 0.2),))
    with pytest.raises(ValueError):
        predict_essential_spectrum(constant_field(), [])
    with pytest.raises(ValueError):
        predict_essential_spectrum(constant_field(), [np.empty((0, 3))])
    p = prediction_from_ranges([(0.2, 0.2 * (1 + 1e-11))])
    assert len(p.points) == 3 and not p.intervals
    d = EssSpecPrediction.from_dict(p.to_dict())
    assert d == p


def test_field_classification_checks(rng):
    pts = rng.normal(size=(50, 3))
    assert constant_field().check_classification([pts])
    assert per_component_field([(1, 1), (2, 1)]).check_classification([pts, pts])
    fake = per_component_field([(1, 1)])
    object.__setattr__(fake, "classification", Classification.CONSTANT)
    assert fake.check_classification([pts])
    f = modulated_field((1, 1), (1, 2))
    lam, mu = f.evaluate(np.array([[0, 0, 1.0], [0, 0, -1.0]]))
    assert mu.tolist() == [2.0, 1.0] and lam.tolist() == [1.0, 1.0]
    assert f.at([0, 0, 2.0]) == LameParams(1.0, 2.0)


def test_field_rejects_bad_values():
    with pytest.raises(ConvexityError):
        constant_field(1, -1)
    with pytest.raises(ConvexityError):
        modulated_field((1, 1), (-1, 2))
    with pytest.raises(ValueError):
        per_component_field([(1, 1)]).evaluate(np.zeros((1, 3)), 0)  # fine
        per_component_field([(1, 1), (1, 2)]).evaluate(np.zeros((1, 3)), 2)
