"""Two-dimensional companion: ellipses, planar Kelvin kernels and NP matrices.

Planar Kelvin matrix (positive fundamental solution of ``-L``)::

    Gamma(r) = c1 log(1/|r|) E + c2 r r^T / |r|^2
    c1 = (lam + 3 mu) / (4 pi mu (lam + 2 mu)),  c2 = (lam + mu) / (4 pi mu (lam + 2 mu))

These constants make the Lamé residual vanish away from the origin and give
a unit point-force flux, and the resulting NP symbol has eigenvalues
``+-kappa0``; both facts are checked in the test suite.

The default ``"spectral"`` scheme is a trapezoid Nyström rule in which the
Cauchy part of the NP kernel is handled by the discrete conjugate-function
matrix and the remainder, which is smooth, by its diagonal limit.  The
single layer uses logarithmic product weights.  ``"punctured"`` is plain
Nyström with zero diagonal blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assembly import AssemblyError, MatrixKind, OperatorMatrix
from .material import LameParams, validate_convexity
from .spectral import DecayFit, MIN_FIT_POINTS

__all__ = [
    "Curve",
    "make_ellipse",
    "kelvin2d_constants",
    "kelvin2d",
    "traction2d",
    "np_kernel2d",
    "lame_operator_fd_2d",
    "assemble_np_2d",
    "assemble_single_layer_2d",
    "ellipse_asymptotics",
    "decay_fit_2d",
    "gap_sequence_2d",
]


def _check(params: LameParams) -> tuple[float, float]:
    verdict = validate_convexity(params, 2)
    if not verdict:
        raise ValueError(f"{params}: {verdict.failed}")
    return params.lam, params.mu


def kelvin2d_constants(params: LameParams) -> tuple[float, float]:
    lam, mu = _check(params)
    den = 4.0 * math.pi * mu * (lam + 2.0 * mu)
    return (lam + 3.0 * mu) / den, (lam + mu) / den


def kelvin2d(r, params: LameParams) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    c1, c2 = kelvin2d_constants(params)
    d2 = np.einsum("...k,...k->...", r, r)
    if np.any(d2 == 0):
        raise ValueError("kernel evaluated at coincident points")
    rr = r[..., :, None] * r[..., None, :]
    return (-0.5 * c1 * np.log(d2))[..., None, None] * np.eye(2) + c2 * rr / d2[..., None, None]


def traction2d(nu, r, params: LameParams) -> np.ndarray:
    """Traction (normal ``nu``) of the columns of ``kelvin2d(x - y)`` in ``x``."""
    lam, mu = _check(params)
    r = np.asarray(r, dtype=float)
    nu = np.broadcast_to(np.asarray(nu, dtype=float), r.shape)
    _, c2 = kelvin2d_constants(params)
    c = 1.0 / (2.0 * math.pi * (lam + 2.0 * mu))
    d2 = np.einsum("...k,...k->...", r, r)
    if np.any(d2 == 0):
        raise ValueError("kernel evaluated at coincident points")
    d2 = d2[..., None, None]
    rn = np.einsum("...k,...k->...", r, nu)[..., None, None]
    anti = nu[..., :, None] * r[..., None, :] - r[..., :, None] * nu[..., None, :]
    rr = r[..., :, None] * r[..., None, :]
    return mu * c * anti / d2 - mu * c * np.eye(2) * rn / d2 - 4.0 * mu * c2 * rr * rn / d2**2


def np_kernel2d(x, nu_x, y, params: LameParams) -> np.ndarray:
    return -traction2d(nu_x, np.asarray(x, dtype=float) - np.asarray(y, dtype=float), params)


def lame_operator_fd_2d(r, params: LameParams, h: float) -> np.ndarray:
    lam, mu = _check(params)
    r = np.asarray(r, dtype=float)
    e = np.eye(2) * h

    def G(z):
        return kelvin2d(z, params)

    H = np.empty((2, 2, 2, 2))
    for a in range(2):
        for b in range(2):
            if a == b:
                H[a, a] = (G(r + e[a]) - 2 * G(r) + G(r - e[a])) / h**2
            else:
                H[a, b] = (G(r + e[a] + e[b]) - G(r + e[a] - e[b]) - G(r - e[a] + e[b])
                           + G(r - e[a] - e[b])) / (4 * h**2)
    return mu * np.einsum("aaik->ik", H) + (lam + mu) * np.einsum("iaak->ik", H)


@dataclass(frozen=True, eq=False)
class Curve:
    """Closed curve sampled at ``n`` equispaced parameters ``t_j = 2 pi j / n``."""

    descriptor: dict
    t: np.ndarray
    points: np.ndarray
    d1: np.ndarray
    d2: np.ndarray

    @property
    def n(self) -> int:
        return len(self.t)

    @property
    def speed(self) -> np.ndarray:
        return np.linalg.norm(self.d1, axis=1)

    @property
    def tangents(self) -> np.ndarray:
        return self.d1 / self.speed[:, None]

    @property
    def normals(self) -> np.ndarray:
        tau = self.tangents
        return np.stack([tau[:, 1], -tau[:, 0]], 1)

    @property
    def curvature(self) -> np.ndarray:
        cross = self.d1[:, 0] * self.d2[:, 1] - self.d1[:, 1] * self.d2[:, 0]
        return cross / self.speed**3

    @property
    def weights(self) -> np.ndarray:
        return (2.0 * math.pi / self.n) * self.speed

    def perimeter(self) -> float:
        return float(self.weights.sum())

    def diameter(self) -> float:
        d = self.points[:, None, :] - self.points[None, :, :]
        return float(np.sqrt((d**2).sum(-1)).max())

    def rolled(self, shift: int) -> "Curve":
        """Same curve with node indices rotated by ``shift``."""
        return Curve(self.descriptor, np.roll(self.t, -shift), np.roll(self.points, -shift, 0),
                     np.roll(self.d1, -shift, 0), np.roll(self.d2, -shift, 0))


def make_ellipse(a: float, b: float, n: int) -> Curve:
    if not (a > 0 and b > 0):
        raise ValueError("semi-axes must be positive")
    if n < 8 or n % 2:
        raise ValueError("node count must be even and at least 8")
    t = 2.0 * math.pi * np.arange(n) / n
    x = np.stack([a * np.cos(t), b * np.sin(t)], 1)
    d1 = np.stack([-a * np.sin(t), b * np.cos(t)], 1)
    return Curve({"kind": "ellipse", "a": float(a), "b": float(b), "n": n}, t, x, d1, -x)


def _pair_grid(curve: Curve):
    r = curve.points[:, None, :] - curve.points[None, :, :]
    dt = curve.t[:, None] - curve.t[None, :]
    idx = np.arange(curve.n)
    r[idx, idx] = 1.0  # replaced by diagonal limits
    dt[idx, idx] = 1.0
    return r, dt, idx


def _to_matrix(blocks: np.ndarray) -> np.ndarray:
    n = blocks.shape[0]
    return blocks.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)


def _provenance(curve: Curve, params: LameParams, scheme: str, extra=None) -> dict:
    prov = {"grids": [curve.descriptor], "field": {"kind": "constant", "lambda": params.lam, "mu": params.mu},
            "scheme": scheme}
    if extra:
        prov.update(extra)
    return prov


def assemble_np_2d(curve: Curve, params: LameParams, scheme: str = "spectral") -> OperatorMatrix:
    lam, mu = _check(params)
    n = curve.n
    nu, tau, sp = curve.normals, curve.tangents, curve.speed
    r, dt, idx = _pair_grid(curve)
    N = -traction2d(nu[:, None, :], r, params) * sp[None, :, None, None]
    if scheme == "punctured":
        N[idx, idx] = 0.0
        return OperatorMatrix(_to_matrix(N * (2 * math.pi / n)), MatrixKind.NP, "nodal", 2, None, None,
                              _provenance(curve, params, scheme))
    if scheme != "spectral":
        raise AssemblyError(f"unknown scheme {scheme!r}")
    c = 1.0 / (2.0 * math.pi * (lam + 2.0 * mu))
    _, c2 = kelvin2d_constants(params)
    # Cauchy part -mu c J(t) cot((t - s)/2) / 2 with J = nu tau^T - tau nu^T at the target
    J = nu[:, :, None] * tau[:, None, :] - tau[:, :, None] * nu[:, None, :]
    cot = 0.5 / np.tan(0.5 * dt)
    Rm = N - (-mu * c) * J[:, None, :, :] * cot[..., None, None]
    kap = curve.curvature
    A2 = nu[:, :, None] * curve.d2[:, None, :] - curve.d2[:, :, None] * nu[:, None, :]
    diag = ((mu * c * kap / 2)[:, None, None] * np.eye(2)
            + (2 * mu * c2 * kap)[:, None, None] * tau[:, :, None] * tau[:, None, :])
    Rm[idx, idx] = diag * sp[:, None, None] + mu * c * A2 / (2 * sp[:, None, None])
    K = Rm * (2 * math.pi / n)
    diff = np.subtract.outer(idx, idx)
    H = (1.0 - (-1.0) ** diff) / n * (1.0 / np.tan(0.5 * dt))
    H[idx, idx] = 0.0
    K = K + (-mu * c * math.pi) * J[:, None, :, :] * H[..., None, None]
    return OperatorMatrix(_to_matrix(K), MatrixKind.NP, "trigonometric", 2, None, None,
                          _provenance(curve, params, scheme))


def _log_weights(n: int) -> np.ndarray:
    """Product weights for ``int log(4 sin^2((t_i - s)/2)) f(s) ds``."""
    t = 2.0 * math.pi * np.arange(n) / n
    dt = t[:, None] - t[None, :]
    m = np.arange(1, n // 2)
    R = -(4.0 * math.pi / n) * np.einsum("ijm,m->ij", np.cos(dt[..., None] * m), 1.0 / m)
    return R - (4.0 * math.pi / n**2) * np.cos(0.5 * n * dt)


def assemble_single_layer_2d(curve: Curve, params: LameParams, shift: float | None = None) -> OperatorMatrix:
    """Gram matrix ``<S phi_j, phi_i>`` of the single layer on nodal values.

    ``shift`` adds ``shift * E`` to the Kelvin matrix, which is still a
    fundamental solution; by default it equals ``c1 log(4 diam)`` (when
    positive), which has the effect of rescaling the curve to diameter 1/4
    and keeps the logarithmic single layer positive definite.
    """
    _check(params)
    n = curve.n
    c1, c2 = kelvin2d_constants(params)
    if shift is None:
        shift = max(0.0, c1 * math.log(4.0 * curve.diameter()))
    sp, tau = curve.speed, curve.tangents
    r, dt, idx = _pair_grid(curve)
    d2 = (r**2).sum(-1)
    four_sin2 = 4.0 * np.sin(0.5 * dt) ** 2
    smooth_log = np.log(d2 / four_sin2)
    smooth_log[idx, idx] = np.log(sp**2)
    rr = r[..., :, None] * r[..., None, :] / d2[..., None, None]
    rr[idx, idx] = tau[:, :, None] * tau[:, None, :]
    smooth = (-0.5 * c1 * smooth_log + shift)[..., None, None] * np.eye(2) + c2 * rr
    S = smooth * (2.0 * math.pi / n) + (-0.5 * c1 * _log_weights(n))[..., None, None] * np.eye(2)
    S = S * sp[None, :, None, None]
    G = _to_matrix(S * curve.weights[:, None, None, None])
    G = 0.5 * (G + G.T)
    return OperatorMatrix(G, MatrixKind.SINGLE_LAYER, "trigonometric", 2, None, None,
                          _provenance(curve, params, "spectral", {"shift": shift}))


def ellipse_asymptotics(j, a: float, b: float, params: LameParams) -> tuple[np.ndarray, np.ndarray]:
    """Asymptotic gaps ``(|lambda_j^+ - kappa0|, |lambda_j^- + kappa0|)``.

    Evaluated as written with ``q = (a - b)/(a + b)`` raised to ``-j`` and
    ``-2j``, and ``tau`` the eccentricity.  With this sign the values grow
    in ``j``; observed gaps decay like ``q^j`` and ``q^(2j)``.
    """
    if not a > b > 0:
        raise ValueError("ellipse asymptotics need a > b > 0")
    lam, mu = _check(params)
    j = np.asarray(j, dtype=float)
    if np.any(j < 1):
        raise ValueError("j must be at least 1")
    q = (a - b) / (a + b)
    tau = math.sqrt(1.0 - (b / a) ** 2)
    plus = j * q ** (-j) / ((lam + 2 * mu) * tau)
    minus = (lam + mu) * (lam + 3 * mu) / (4 * mu**2 * (lam + 2 * mu) * tau) * j * q ** (-2 * j)
    return plus, minus


def gap_sequence_2d(values, tip: float, kappa: float) -> np.ndarray:
    """Gaps to ``tip`` (one of ``+-kappa``) of the eigenvalues nearest to it,
    largest first."""
    v = np.asarray(getattr(values, "values", values), dtype=float)
    other = -tip
    mine = v[np.abs(v - tip) < np.abs(v - other)]
    return np.sort(np.abs(mine - tip))[::-1]


def decay_fit_2d(spectrum, tip: float, kappa: float | None = None, floor: float = 1e-11,
                 ceiling: float | None = None, window: tuple[int, int] | None = None) -> DecayFit:
    """Exponential fit of the gaps to ``tip`` against their rank.

    Ranks count every eigenvalue assigned to the tip, largest gap first; the
    fit uses ranks whose gap lies in ``(floor, ceiling)`` (default ceiling
    ``kappa / 4``) or the explicit ``window``.
    """
    kappa = abs(tip) if kappa is None else kappa
    ceiling = kappa / 4.0 if ceiling is None else ceiling
    gaps = gap_sequence_2d(spectrum, tip, kappa)
    j = np.arange(1, len(gaps) + 1)
    if window is not None:
        keep = (j >= window[0]) & (j <= window[1]) & (gaps > 0)
    else:
        keep = (gaps > floor) & (gaps < ceiling)
    j, g = j[keep], gaps[keep]
    if len(g) < MIN_FIT_POINTS:
        raise ValueError(f"only {len(g)} gaps available for the fit, need {MIN_FIT_POINTS}")
    A = np.stack([j.astype(float), np.ones(len(j))], 1)
    coef, *_ = np.linalg.lstsq(A, np.log(g), rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - np.log(g)) ** 2)))
    # the sign of tip - lambda tells the side
    v = np.asarray(getattr(spectrum, "values", spectrum), dtype=float)
    near = v[np.abs(v - tip) < np.abs(v + tip)]
    side = "above" if np.sum(near > tip) >= np.sum(near < tip) else "below"
    return DecayFit(tip, side, "exponential", float(coef[0]), -float(coef[0]), resid, int(j[0]), int(j[-1]), len(j))
