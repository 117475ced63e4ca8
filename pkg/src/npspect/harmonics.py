"""Real orthonormal spherical harmonics on the unit sphere.

Basis functions are indexed ``l*l + l + m`` for ``-l <= m <= l``; ``m > 0``
carries ``cos(m phi)`` and ``m < 0`` carries ``sin(|m| phi)``.
"""

from __future__ import annotations

import numpy as np

__all__ = ["basis_size", "legendre_normalized", "real_sph_harm", "rotate_azimuth", "degree_order"]


def basis_size(L: int) -> int:
    return (L + 1) ** 2


def degree_order(L: int) -> tuple[np.ndarray, np.ndarray]:
    l = np.concatenate([np.full(2 * k + 1, k) for k in range(L + 1)])
    m = np.concatenate([np.arange(-k, k + 1) for k in range(L + 1)])
    return l, m


def legendre_normalized(L: int, x) -> np.ndarray:
    """Orthonormal associated Legendre values ``P[..., l, m]`` for ``m >= 0``.

    Normalized so that ``P[l, m](cos theta) * e^{i m phi}`` has unit L2 norm
    on the sphere (Condon-Shortley phase included).
    """
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.maximum(0.0, 1.0 - x * x))
    P = np.zeros(x.shape + (L + 1, L + 1))
    P[..., 0, 0] = 1.0 / np.sqrt(4.0 * np.pi)
    for m in range(1, L + 1):
        P[..., m, m] = -np.sqrt((2 * m + 1) / (2 * m)) * s * P[..., m - 1, m - 1]
    for m in range(L):
        P[..., m + 1, m] = np.sqrt(2 * m + 3) * x * P[..., m, m]
    for m in range(L + 1):
        for l in range(m + 2, L + 1):
            a = np.sqrt((4 * l * l - 1) / (l * l - m * m))
            b = np.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
            P[..., l, m] = a * (x * P[..., l - 1, m] - b * P[..., l - 2, m])
    return P


def real_sph_harm(L: int, cos_theta, phi) -> np.ndarray:
    """Real harmonics of degree ``<= L``, shape ``cos_theta.shape + (nb,)``."""
    cos_theta = np.asarray(cos_theta, dtype=float)
    phi = np.broadcast_to(np.asarray(phi, dtype=float), cos_theta.shape)
    P = legendre_normalized(L, cos_theta)
    out = np.empty(cos_theta.shape + (basis_size(L),))
    root2 = np.sqrt(2.0)
    for m in range(L + 1):
        if m == 0:
            for l in range(L + 1):
                out[..., l * l + l] = P[..., l, 0]
            continue
        c = root2 * np.cos(m * phi)
        s = root2 * np.sin(m * phi)
        for l in range(m, L + 1):
            out[..., l * l + l + m] = P[..., l, m] * c
            out[..., l * l + l - m] = P[..., l, m] * s
    return out


def _pair_indices(L: int):
    pos, neg, ms = [], [], []
    for l in range(1, L + 1):
        for m in range(1, l + 1):
            pos.append(l * l + l + m)
            neg.append(l * l + l - m)
            ms.append(m)
    return np.array(pos, dtype=int), np.array(neg, dtype=int), np.array(ms, dtype=float)


def rotate_azimuth(V: np.ndarray, phi: np.ndarray, L: int) -> np.ndarray:
    """Re-express trailing-axis harmonic samples after a z-rotation.

    If ``V[k, ..., b] = sum_q f_kq Y_b(p_q)`` then the result holds
    ``sum_q f_kq Y_b(R_z(phi_k) p_q)``.  ``phi`` has the length of axis 0.
    """
    pos, neg, ms = _pair_indices(L)
    phi = np.asarray(phi, dtype=float)
    shape = (len(phi),) + (1,) * (V.ndim - 2) + (len(ms),)
    c = np.cos(np.outer(phi, ms)).reshape(shape)
    s = np.sin(np.outer(phi, ms)).reshape(shape)
    out = V.copy()
    vp = V[..., pos]
    vn = V[..., neg]
    out[..., pos] = c * vp - s * vn
    out[..., neg] = s * vp + c * vn
    return out
