"""Principal symbols of the Lamé operator, the single layer and the NP operator.

The local frame at a boundary point is ``(t1, t2, nu)``, right-handed, with
``t1`` along the chart's first derivative; frequencies ``xi'`` are
expressed in ``(t1, t2)``.

The single-layer symbol in closed form reads

    sigma_A(0, xi') = -(1 / (2 mu |xi'|)) (E - (k/2) diag(Lambda', 1)),
    k = (lam + mu) / (lam + 2 mu),

with ``Lambda' = xi' xi'^T / |xi'|^2`` occupying the tangential block.  This
is the value of ``(1/2pi) int l^{-1}(xi', xi3) d xi3`` and is checked against
that integral in :func:`single_layer_symbol` (``mode="numeric"``).
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy import integrate

from .material import (EssSpecPrediction, LameField, LameParams, kappa0, kelvin_constants,
                       prediction_from_ranges, _as_points)

__all__ = [
    "projector",
    "lame_symbol",
    "lame_symbol_inverse",
    "line_integrals",
    "single_layer_symbol",
    "np_symbol",
    "modified_symbol",
    "symbol_branches",
    "symbol_essential_spectrum",
    "polynomial_of_symbol",
    "TRUNCATION",
]

TRUNCATION = 1e4


def _vec(xi, n) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (n,):
        raise ValueError(f"frequency must be a {n}-vector")
    if not np.any(xi != 0):
        raise ValueError("frequency must be nonzero")
    return xi


def _lm(params) -> tuple[float, float]:
    if isinstance(params, LameParams):
        kelvin_constants(params)
        return params.lam, params.mu
    return tuple(params)


def projector(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    return np.outer(xi, xi) / (xi @ xi)


def lame_symbol(xi, params) -> np.ndarray:
    xi = _vec(xi, 3)
    lam, mu = _lm(params)
    n2 = xi @ xi
    return -n2 * (mu * np.eye(3) + (lam + mu) * projector(xi))


def lame_symbol_inverse(xi, params) -> np.ndarray:
    xi = _vec(xi, 3)
    lam, mu = _lm(params)
    n2 = xi @ xi
    return -(np.eye(3) - (lam + mu) / (lam + 2 * mu) * projector(xi)) / (mu * n2)


def _line_quad(f, xi_norm: float, tail_coeff: float) -> tuple[float, float]:
    """``int_{-T}^{T} f`` for even ``f`` plus the ``c/xi3^2`` tail."""
    T = TRUNCATION * xi_norm
    breaks = [xi_norm * s for s in (1.0, 10.0, 100.0, 1000.0)]
    val, err = integrate.quad(f, 0.0, T, points=breaks, limit=400, epsabs=1e-14, epsrel=1e-13)
    return 2.0 * val + 2.0 * tail_coeff / T, 2.0 * err


def line_integrals(xi_norm: float = 1.0) -> tuple[float, float, float]:
    """Numerical ``int dxi3/|xi|^2``, ``int xi3^2/|xi|^4`` and ``int 1/|xi|^4``."""
    if not xi_norm > 0:
        raise ValueError("|xi'| must be positive")
    a2 = xi_norm**2
    i1, _ = _line_quad(lambda t: 1.0 / (a2 + t * t), xi_norm, 1.0)
    i2, _ = _line_quad(lambda t: t * t / (a2 + t * t) ** 2, xi_norm, 1.0)
    i3, _ = _line_quad(lambda t: 1.0 / (a2 + t * t) ** 2, xi_norm, 0.0)
    return i1, i2, i3


def _sigma_a_closed(xi2: np.ndarray, lam: float, mu: float) -> np.ndarray:
    n = math.hypot(*xi2)
    k = (lam + mu) / (lam + 2 * mu)
    block = np.zeros((3, 3))
    block[:2, :2] = np.outer(xi2, xi2) / n**2
    block[2, 2] = 1.0
    return -(np.eye(3) - 0.5 * k * block) / (2 * mu * n)


def _sigma_a_numeric(xi2: np.ndarray, lam: float, mu: float) -> np.ndarray:
    n = math.hypot(*xi2)
    k = (lam + mu) / (lam + 2 * mu)
    out = np.zeros((3, 3))
    # entries (i,3), i<3, are odd in xi3 and integrate to zero
    for i in range(3):
        for j in range(i, 3):
            if (i == 2) != (j == 2):
                continue

            def f(t, i=i, j=j):
                xi = np.array([xi2[0], xi2[1], t])
                return lame_symbol_inverse(xi, (lam, mu))[i, j]

            # large-|xi3| behaviour: -(delta_ij - k delta_i3 delta_j3) / (mu xi3^2)
            tail = -((1.0 if i == j else 0.0) - (k if i == j == 2 else 0.0)) / mu
            val, err = _line_quad(f, n, tail)
            if not np.isfinite(val) or err > 1e-8 * max(1.0, abs(val)):
                raise ArithmeticError(f"line integral for entry ({i},{j}) did not converge")
            out[i, j] = out[j, i] = val / (2 * math.pi)
    return out


def single_layer_symbol(xi2, params, mode: str = "closed_form") -> np.ndarray:
    xi2 = _vec(xi2, 2)
    lam, mu = _lm(params)
    if mode == "closed_form":
        return _sigma_a_closed(xi2, lam, mu)
    if mode == "numeric_line_integral":
        return _sigma_a_numeric(xi2, lam, mu)
    raise ValueError(f"unknown mode {mode!r}")


def _params_from(x, field_or_params, component: int = 0) -> LameParams:
    if isinstance(field_or_params, LameField):
        if x is None:
            raise ValueError("a point is required to evaluate a field")
        return field_or_params.at(x, component)
    if isinstance(field_or_params, LameParams):
        return field_or_params
    return LameParams(*field_or_params)


def np_symbol(x, xi2, field_or_params, component: int = 0) -> np.ndarray:
    """``(pi mu delta' i / |xi'|) M(xi')`` at the moduli governing ``x``."""
    xi2 = _vec(xi2, 2)
    p = _params_from(x, field_or_params, component)
    delta = kelvin_constants(p).delta_prime
    M = np.array([[0.0, 0.0, -xi2[0]], [0.0, 0.0, -xi2[1]], [xi2[0], xi2[1], 0.0]])
    return (math.pi * p.mu * delta * 1j / math.hypot(*xi2)) * M


def modified_symbol(x, xi2, field_or_params, component: int = 0) -> np.ndarray:
    p = _params_from(x, field_or_params, component)
    return np_symbol(x, xi2, p) / kappa0(p)


def polynomial_of_symbol(sigma: np.ndarray, roots: Sequence[float]) -> np.ndarray:
    """``p(sigma)`` with ``p(s) = s prod (s^2 - r^2)``."""
    out = sigma.copy()
    E = np.eye(sigma.shape[0])
    for r in roots:
        out = out @ (sigma @ sigma - r * r * E)
    return out


def symbol_branches(x, field_or_params, n_directions: int = 16, component: int = 0) -> np.ndarray:
    """Sorted eigenvalues of the NP symbol over unit ``xi'``, shape ``(n, 3)``."""
    ang = 2 * math.pi * np.arange(n_directions) / n_directions
    out = []
    for a in ang:
        sig = np_symbol(x, (math.cos(a), math.sin(a)), field_or_params, component)
        out.append(np.linalg.eigvalsh(sig))
    return np.array(out)


def symbol_essential_spectrum(field: LameField, components: Sequence,
                              n_directions: int = 8) -> EssSpecPrediction:
    """Closure of the symbol's eigenvalue branches over sampled ``(x, xi')``."""
    if len(components) == 0:
        raise ValueError("no component samples given")
    ranges = []
    for c, sample in enumerate(components):
        pts = _as_points(sample)
        if pts.size == 0:
            raise ValueError(f"component {c} sample is empty")
        lam, mu = field.evaluate(pts, c)
        tops = []
        for lm in {(float(a), float(b)) for a, b in zip(lam, mu)}:
            br = symbol_branches(None, LameParams(*lm), n_directions)
            if np.abs(br[:, 1]).max() > 1e-12 or np.ptp(br[:, 2]) > 1e-12 or np.abs(br[:, 0] + br[:, 2]).max() > 1e-12:
                raise ArithmeticError("symbol branches are not {0, +-k}")
            tops.append(br[:, 2])
        tops = np.concatenate(tops)
        ranges.append((float(tops.min()), float(tops.max())))
    return prediction_from_ranges(ranges)
