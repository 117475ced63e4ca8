import math

import numpy as np
import pytest

from npspect.material import LameParams
from npspect.planar import (assemble_np_2d, assemble_single_layer_2d, decay_fit_2d, ellipse_asymptotics,
                            gap_sequence_2d, kelvin2d, kelvin2d_constants, lame_operator_fd_2d, make_ellipse,
                            traction2d)
from npspect.spectral import eigenvalues

UNIT = LameParams(1, 1)


def _rot(a):
    return np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])


def test_kelvin2d_structure():
    r = np.array([0.3, -1.1])
    Q = _rot(0.7)
    assert np.allclose(kelvin2d(Q @ r, UNIT), Q @ kelvin2d(r, UNIT) @ Q.T, atol=1e-14)
    c1, _ = kelvin2d_constants(UNIT)
    assert np.allclose(kelvin2d(3 * r, UNIT) - kelvin2d(r, UNIT), c1 * math.log(1 / 3) * np.eye(2), atol=1e-14)
    with pytest.raises(ValueError):
        kelvin2d([0.0, 0.0], UNIT)


@pytest.mark.parametrize("p", [UNIT, LameParams(0, 1), LameParams(2, 0.5)])
def test_kelvin2d_lame_residual(p):
    r = np.array([0.8, 0.9])
    res = [np.abs(lame_operator_fd_2d(r, p, h)).max() for h in (4e-2, 2e-2, 1e-2)]
    assert res[0] > res[1] > res[2]
    assert math.log2(res[1] / res[2]) == pytest.approx(2.0, abs=0.3)


def test_traction2d_finite_differences():
    p = LameParams(2, 0.5)
    r, nu, h = np.array([0.7, -0.4]), np.array([0.6, 0.8]), 1e-5
    G = np.stack([(kelvin2d(r + e, p) - kelvin2d(r - e, p)) / (2 * h) for e in np.eye(2) * h])
    div = np.einsum("iik->k", G)
    sym = 0.5 * (G + np.swapaxes(G, 0, 1))
    ref = p.lam * nu[:, None] * div[None, :] + 2 * p.mu * np.einsum("aik,a->ik", sym, nu)
    T = traction2d(nu, r, p)
    assert np.abs(T - ref).max() <= 1e-6 * np.abs(T).max()


def test_curve_basics():
    c = make_ellipse(1, 1, 64)
    assert c.perimeter() == pytest.approx(2 * math.pi, rel=1e-14)
    assert np.allclose(np.linalg.norm(c.normals, axis=1), 1.0)
    assert np.allclose(c.normals, c.points)
    for bad in ((0, 1, 64), (1, 1, 7), (1, 1, 9)):
        with pytest.raises(ValueError):
            make_ellipse(*bad)


@pytest.fixture(scope="module")
def circle256():
    c = make_ellipse(1, 1, 256)
    return c, eigenvalues(assemble_np_2d(c, UNIT)).values


def test_circle_accumulates_at_two_points(circle256):
    c, v = circle256
    k = 1 / 6
    near = np.minimum(np.abs(v - k), np.abs(v + k))
    assert np.mean(near < 0.02) > 0.95
    assert np.count_nonzero(np.abs(v) < 0.02) <= 4


def test_circle_rotation_invariance(circle256):
    c, v = circle256
    w = eigenvalues(assemble_np_2d(c.rolled(37), UNIT)).values
    assert np.abs(v - w).max() < 1e-8


def test_single_layer_2d_positive():
    c = make_ellipse(2, 1, 128)
    S = assemble_single_layer_2d(c, UNIT).data
    assert np.array_equal(S, S.T) and np.linalg.eigvalsh(S)[0] > 0


def test_ellipse_asymptotics_formula():
    j = np.arange(1, 30)
    plus, minus = ellipse_asymptotics(j, 2, 1, UNIT)
    q = 1 / 3
    ratio = minus / plus
    assert np.allclose(ratio[1:] / ratio[:-1], 1 / q, rtol=1e-12)
    fit = np.polyfit(j, np.log(plus / j), 1)[0]
    assert fit == pytest.approx(math.log(3), rel=1e-12)
    with pytest.raises(ValueError):
        ellipse_asymptotics(j, 1, 1, UNIT)
    with pytest.raises(ValueError):
        ellipse_asymptotics([0], 2, 1, UNIT)


def test_decay_fit_2d_synthetic():
    k = 1 / 6
    j = np.arange(1, 60)
    vals = np.concatenate([k + np.exp(-0.2 * j), -k - 0.01 * np.exp(-0.4 * j)])
    up = decay_fit_2d(vals, k, ceiling=1.0)
    assert up.rate == pytest.approx(0.2, abs=1e-3) and up.side == "above"
    down = decay_fit_2d(vals, -k)
    assert down.rate == pytest.approx(0.4, abs=1e-3) and down.side == "below"
    assert gap_sequence_2d(np.array([0.2, 0.1, -0.2]), k, k).tolist() == pytest.approx([k - 0.1, 0.2 - k])
