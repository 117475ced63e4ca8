"""Kelvin matrix, boundary traction and layer-potential kernels in 3D.

Sign conventions.  ``kelvin`` is the positive fundamental solution of
``-L`` with ``L u = mu Lap u + (lam + mu) grad div u``.  The NP kernel is the
traction of the fundamental solution of ``L`` itself, i.e. ``-traction``;
with this choice the single-layer potential ``S`` built on ``kelvin`` is
positive and the interior trace satisfies ``d_nu S[phi] = (1/2 - K) phi``,
equivalently ``(-1/2 + K) phi`` for the potential built on ``-kelvin``.

All functions broadcast over leading axes: ``r`` has shape ``(..., 3)`` and
``lam``/``mu`` broadcast against ``r.shape[:-1]``.
"""

from __future__ import annotations

import math

import numpy as np

from .material import LameField, LameParams, kelvin_constants

__all__ = [
    "kelvin",
    "traction",
    "np_kernel",
    "double_layer_kernel",
    "kelvin_array",
    "traction_array",
    "lame_operator_fd",
    "traction_fd",
]


def _params(params) -> tuple[float, float]:
    if isinstance(params, LameParams):
        kelvin_constants(params)  # validates
        return params.lam, params.mu
    lam, mu = params
    return lam, mu


def _check_nonzero(d: np.ndarray) -> None:
    if np.any(d == 0.0):
        raise ValueError("kernel evaluated at coincident points")


def kelvin_array(r, lam, mu) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    lam = np.asarray(lam, dtype=float)[..., None, None]
    mu = np.asarray(mu, dtype=float)[..., None, None]
    d = np.linalg.norm(r, axis=-1)
    _check_nonzero(d)
    denom = 4.0 * math.pi * mu * (lam + 2.0 * mu)
    half_mp = 0.5 * (lam + 3.0 * mu) / denom
    half_lp = 0.5 * (lam + mu) / denom
    rr = r[..., :, None] * r[..., None, :]
    return half_mp * np.eye(3) / d[..., None, None] + half_lp * rr / d[..., None, None] ** 3


def traction_array(nu, r, lam, mu) -> np.ndarray:
    """Column ``k`` is the traction, with normal ``nu``, of column ``k`` of
    ``kelvin(x - y)`` differentiated in ``x``; ``r = x - y``."""
    r = np.asarray(r, dtype=float)
    nu = np.broadcast_to(np.asarray(nu, dtype=float), r.shape)
    lam = np.asarray(lam, dtype=float)[..., None, None]
    mu = np.asarray(mu, dtype=float)[..., None, None]
    d = np.linalg.norm(r, axis=-1)
    _check_nonzero(d)
    d = d[..., None, None]
    c = 1.0 / (4.0 * math.pi * (lam + 2.0 * mu))
    b = 0.5 * (lam + mu) / (4.0 * math.pi * mu * (lam + 2.0 * mu))
    rn = np.einsum("...k,...k->...", r, nu)[..., None, None]
    anti = nu[..., :, None] * r[..., None, :] - r[..., :, None] * nu[..., None, :]
    rr = r[..., :, None] * r[..., None, :]
    return (mu * c * anti / d**3 - mu * c * np.eye(3) * rn / d**3
            - 6.0 * mu * b * rr * rn / d**5)


def kelvin(x_minus_y, params) -> np.ndarray:
    lam, mu = _params(params)
    return kelvin_array(x_minus_y, lam, mu)


def traction(nu, x_minus_y, params) -> np.ndarray:
    lam, mu = _params(params)
    return traction_array(nu, x_minus_y, lam, mu)


def np_kernel(x, nu_x, y, field: LameField | LameParams, component: int = 0) -> np.ndarray:
    """Frozen-at-target NP kernel: the traction at ``x`` of ``-kelvin(x - y)``
    with the moduli of ``field`` at ``x``."""
    x = np.asarray(x, dtype=float)
    r = x - np.asarray(y, dtype=float)
    if isinstance(field, LameField):
        lam, mu = field.evaluate(np.broadcast_to(x, r.shape).reshape(-1, 3), component)
        lam = lam.reshape(r.shape[:-1])
        mu = mu.reshape(r.shape[:-1])
    else:
        lam, mu = _params(field)
    return -traction_array(nu_x, r, lam, mu)


def double_layer_kernel(x, y, nu_y, field: LameField | LameParams, component: int = 0) -> np.ndarray:
    """Double-layer kernel, the adjoint companion of :func:`np_kernel`.

    ``D(x, y) = np_kernel(y, nu_y, x)^T``: the traction in ``y`` with normal
    ``nu_y`` and moduli frozen at ``y``.
    """
    return np.swapaxes(np_kernel(y, nu_y, x, field, component), -1, -2)


# finite-difference references, used only by tests and verification

def _grad_fd(f, x, h):
    """Central-difference Jacobian: ``out[..., a, :, :] = d f / d x_a``."""
    cols = []
    for a in range(3):
        e = np.zeros(3)
        e[a] = h
        cols.append((f(x + e) - f(x - e)) / (2 * h))
    return np.stack(cols, axis=-3)


def traction_fd(nu, r, params, h: float = 1e-5) -> np.ndarray:
    """Traction of ``kelvin`` columns by central differences."""
    lam, mu = _params(params)
    nu = np.asarray(nu, dtype=float)
    G = _grad_fd(lambda z: kelvin_array(z, lam, mu), np.asarray(r, dtype=float), h)
    # G[a, i, k] = d Gamma_ik / d x_a
    div = np.einsum("iik->k", G)
    sym = 0.5 * (G + np.swapaxes(G, 0, 1))  # sym[a, i, k] = eps_ai of column k
    return lam * nu[:, None] * div[None, :] + 2 * mu * np.einsum("aik,a->ik", sym, nu)


def lame_operator_fd(r, params, h: float) -> np.ndarray:
    """``L`` applied by second-order central differences to ``kelvin`` columns."""
    lam, mu = _params(params)
    r = np.asarray(r, dtype=float)

    def G(z):
        return kelvin_array(z, lam, mu)

    eye = np.eye(3) * h
    H = np.empty((3, 3, 3, 3))  # H[a, b, i, k] = d2 Gamma_ik / dx_a dx_b
    for a in range(3):
        for b in range(3):
            if a == b:
                H[a, a] = (G(r + eye[a]) - 2 * G(r) + G(r - eye[a])) / h**2
            else:
                H[a, b] = (G(r + eye[a] + eye[b]) - G(r + eye[a] - eye[b])
                           - G(r - eye[a] + eye[b]) + G(r - eye[a] - eye[b])) / (4 * h**2)
    lap = np.einsum("aaik->ik", H)
    grad_div = np.einsum("iaak->ik", H)
    return mu * lap + (lam + mu) * grad_div
