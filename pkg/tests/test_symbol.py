import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from npspect.material import LameParams, constant_field, kappa0, kelvin_constants, modulated_field
from npspect.symbol import (lame_symbol, lame_symbol_inverse, line_integrals, modified_symbol, np_symbol,
                            polynomial_of_symbol, projector, single_layer_symbol, symbol_branches,
                            symbol_essential_spectrum)

vec3 = st.tuples(*[st.floats(-10, 10)] * 3).filter(lambda v: np.linalg.norm(v) > 1e-3).map(np.array)
vec2 = st.tuples(*[st.floats(-10, 10)] * 2).filter(lambda v: np.linalg.norm(v) > 1e-3).map(np.array)
params = st.builds(lambda mu, t: LameParams(-2 * mu / 3 + t, mu), st.floats(0.1, 10), st.floats(0.01, 20))


def test_lame_symbol_examples():
    p = LameParams(1, 1)
    assert np.allclose(lame_symbol([0, 0, 1], p), -np.diag([1, 1, 3]))
    assert np.allclose(lame_symbol_inverse([0, 0, 1], p), -np.diag([1, 1, 1 / 3]))
    with pytest.raises(ValueError):
        lame_symbol([0, 0, 0], p)


@settings(max_examples=200, deadline=None)
@given(vec3, vec3, params)
def test_symbol_identities(xi, v, p):
    P = projector(xi)
    assert np.abs(P @ P - P).max() < 1e-14
    ell = lame_symbol(xi, p)
    assert np.abs(ell @ lame_symbol_inverse(xi, p) - np.eye(3)).max() < 1e-13
    q = -(ell @ v) @ v
    want = p.mu * (xi @ xi) * (v @ v) + (p.lam + p.mu) * (xi @ v) ** 2
    assert q == pytest.approx(want, rel=1e-12, abs=1e-12 * (xi @ xi) * (v @ v) * (abs(p.lam) + p.mu))
    assert np.allclose(lame_symbol_inverse(2 * xi, p), lame_symbol_inverse(xi, p) / 4, rtol=1e-13)


@settings(max_examples=200, deadline=None)
@given(vec2, params)
def test_np_symbol_hermitian_with_three_eigenvalues(xi2, p):
    s = np_symbol(None, xi2, p)
    assert np.abs(s - s.conj().T).max() < 1e-14
    k = kappa0(p)
    assert np.allclose(np.linalg.eigvalsh(s), [-k, 0, k], atol=1e-12)
    assert np.allclose(np.linalg.eigvalsh(modified_symbol(None, xi2, p)), [-1, 0, 1], atol=1e-12)
    assert np.abs(polynomial_of_symbol(s, [k])).max() < 1e-12
    assert math.pi * p.mu * kelvin_constants(p).delta_prime == pytest.approx(k, rel=1e-14)


def test_np_symbol_example_and_rotation():
    br = symbol_branches(None, LameParams(1, 1), 32)
    assert np.abs(br - np.array([-1 / 6, 0, 1 / 6])).max() < 1e-12


def test_line_integrals():
    i1, i2, i3 = line_integrals(1.0)
    assert i1 == pytest.approx(math.pi, abs=1e-8)
    assert i2 == pytest.approx(math.pi / 2, abs=1e-8)
    assert i3 == pytest.approx(math.pi / 2, abs=1e-8)
    j1, _, j3 = line_integrals(2.0)
    assert j1 == pytest.approx(math.pi / 2, abs=1e-8) and j3 == pytest.approx(math.pi / 16, abs=1e-8)


@pytest.mark.parametrize("xi2,p", [((1.0, 0.0), LameParams(1, 1)), ((0.6, -0.8), LameParams(2, 0.5)),
                                   ((0.3, 2.0), LameParams(0, 1))])
def test_single_layer_closed_form_matches_integral(xi2, p):
    a = single_layer_symbol(xi2, p)
    b = single_layer_symbol(xi2, p, "numeric_line_integral")
    assert np.abs(a - b).max() < 1e-6


def test_single_layer_symbol_homogeneity():
    p = LameParams(1, 1)
    assert np.allclose(single_layer_symbol((2.0, 0.0), p), single_layer_symbol((1.0, 0.0), p) / 2, rtol=1e-14)
    with pytest.raises(ValueError):
        single_layer_symbol((0.0, 0.0), p)
    with pytest.raises(ValueError):
        single_layer_symbol((1.0, 0.0), p, "bogus")


def test_variable_field_symbol(rng):
    f = modulated_field((1, 1), (1, 2))
    x = np.array([0.0, 0.0, 1.0])
    assert np.allclose(np.linalg.eigvalsh(np_symbol(x, (1, 0), f)), [-0.2, 0, 0.2], atol=1e-12)
    with pytest.raises(ValueError):
        np_symbol(None, (1, 0), f)


def test_per_component_polynomial():
    roots = [kappa0(LameParams(1, 1)), kappa0(LameParams(1, 2))]
    for p in (LameParams(1, 1), LameParams(1, 2)):
        assert np.abs(polynomial_of_symbol(np_symbol(None, (0.3, 0.4), p), roots)).max() < 1e-12


def test_symbol_prediction_cross_check(rng):
    from npspect.material import predict_essential_spectrum
    pts = rng.normal(size=(400, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    pts = np.vstack([pts, [[0, 0, 1], [0, 0, -1]]])
    c = symbol_essential_spectrum(constant_field(1, 1), [pts])
    assert c.points == pytest.approx((-1 / 6, 0, 1 / 6))
    f = modulated_field((1, 1), (1, 2))
    s, m = symbol_essential_spectrum(f, [pts], 4), predict_essential_spectrum(f, [pts])
    assert s.points == (0.0,)
    assert np.abs(np.array(s.intervals) - np.array(m.intervals)).max() < 1e-3
