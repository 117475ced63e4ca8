import math

import numpy as np
import pytest

from npspect.assembly import MatrixKind, assemble_np, assemble_single_layer, symmetrize
from npspect.geometry import build_grid, make_sphere
from npspect.material import EssSpecPrediction, constant_field, prediction_from_ranges
from npspect.spectral import (SpectrumResult, capture_fraction, decay_fit, detect_essential_spectrum,
                              eigenvalues, growth_exponent, interval_coverage, large_singular_count,
                              normal_energy_fractions, point_coverage, predicted_decay_exponent, tip_sequence)

CONST = EssSpecPrediction((-1 / 6, 0.0, 1 / 6))


def _clustered(n, spread, rng):
    centres = rng.choice([-1 / 6, 0.0, 1 / 6], size=n)
    return np.sort(centres + rng.uniform(-spread, spread, n))


def test_identity_sanity():
    s = eigenvalues(2.5 * np.eye(6))
    assert np.array_equal(s.values, np.full(6, 2.5)) and s.imag_max == 0
    assert SpectrumResult([3, 1, 2], "x").values.tolist() == [1, 2, 3]


def test_detection_pass_and_negative_control(rng):
    spectra = [_clustered(300 * k, 0.05 / k, rng) for k in (1, 2, 4)]
    good = detect_essential_spectrum(spectra, CONST, 0.02)
    assert good.passed and good.capture_nondecreasing
    assert good.levels[-1].capture == pytest.approx(1.0)
    bad = detect_essential_spectrum(spectra, EssSpecPrediction((-0.4, 0.0, 0.4)), 0.02)
    assert not bad.passed
    with pytest.raises(ValueError):
        detect_essential_spectrum(spectra[:2], CONST, 0.02)
    with pytest.raises(ValueError):
        detect_essential_spectrum(spectra, CONST, 0.0)


def test_capture_monotone_in_eps(rng):
    v = rng.uniform(-0.5, 0.5, 2000)
    caps = [capture_fraction(v, CONST, e) for e in np.linspace(0.001, 0.3, 40)]
    assert all(b >= a for a, b in zip(caps, caps[1:]))


def test_interval_coverage():
    pred = prediction_from_ranges([(1 / 6, 0.2)])
    v = np.linspace(1 / 6, 0.2, 50)
    assert interval_coverage(np.concatenate([-v, v]), pred, 0.01) == pytest.approx(1.0)
    assert interval_coverage(v, pred, 0.01) == pytest.approx(0.5)
    assert point_coverage([0.0], pred, 0.01) == 1.0
    assert interval_coverage([0.0], CONST, 0.01) is None


def test_constant_sphere_parity(lab):
    # +kappa0 and -kappa0 capture fractions agree
    sp = lab.spectrum("sphere", (16, 32), constant_field(1, 1), MatrixKind.SYMMETRIZED)
    rep = detect_essential_spectrum([sp] * 3, CONST, 0.02)
    per = rep.levels[-1].per_target
    assert abs(per["0.166667"] - per["-0.166667"]) < 0.1
    assert abs(sp.values[-1] - 0.5) < 0.05


def test_decay_fit_synthetic_laws():
    j = np.arange(1, 200)
    fit = decay_fit(j ** -0.5, 0.0, "above")
    assert fit.exponent == pytest.approx(-0.5, abs=1e-6) and fit.n_points == 199
    k = 1 / 6
    fit = decay_fit(k - np.exp(-0.3 * j[:60]), k, "below", mode="exponential")
    assert fit.rate == pytest.approx(0.3, abs=1e-3)
    with pytest.raises(ValueError):
        decay_fit(j[:5] ** -0.5, 0.0)
    with pytest.raises(ValueError):
        decay_fit(j ** -0.5, 0.0, "sideways")


def test_tip_assignment_uses_prediction():
    pred = prediction_from_ranges([(0.1, 0.2)])
    v = np.array([0.01, 0.02, 0.07, 0.15, -0.03])
    # 0.07 is nearer the interval, 0.15 lies inside it
    assert tip_sequence(v, 0.0, "above", pred).tolist() == [0.02, 0.01]
    with pytest.raises(ValueError):
        tip_sequence(v, 0.3, "above", pred)


def test_predicted_exponents():
    assert predicted_decay_exponent("essential_point_constant").exponent == -0.5
    nd = predicted_decay_exponent("nondegenerate_min")
    assert nd.exponent == -1.0 and nd.admits(1.01) and not nd.admits(1.0)
    flat = predicted_decay_exponent("flat_min", 2)
    assert flat.tau_min == pytest.approx(1.5) and flat.exponent == pytest.approx(-2 / 3)
    assert predicted_decay_exponent("flat_min", 3).tau_min == pytest.approx(5 / 3)
    with pytest.raises(ValueError):
        predicted_decay_exponent("flat_min", 1)
    with pytest.raises(ValueError):
        predicted_decay_exponent("cusp")


def test_normal_fractions_split_families():
    g = build_grid(make_sphere(), 12, 24)
    f = constant_field()
    Kc = symmetrize(assemble_np(g, f), assemble_single_layer(g, f))
    vals, frac = normal_energy_fractions(Kc)
    assert np.all((frac >= 0) & (frac <= 1))
    # the lambda0 family (3/(2(2j+1))) is purely tangential
    for j in (1, 2, 3):
        hit = np.abs(vals - 1.5 / (2 * j + 1)) < 1e-3
        assert hit.sum() >= 2 * j + 1 and np.sort(frac[hit])[: 2 * j + 1].max() < 0.1


def test_polynomial_compactness_counts():
    assert large_singular_count(np.diag([0.0, 1 / 6, -1 / 6, 0.5]), [1 / 6]) == 1
    assert large_singular_count(np.diag([0.0, 1 / 6, -1 / 6, 0.5])) == 3
    assert growth_exponent([10, 100, 1000], [5, 50, 500]) == pytest.approx(1.0)
    assert growth_exponent([10, 100, 1000], [7, 7, 7]) == pytest.approx(0.0)
