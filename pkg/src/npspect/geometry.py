"""Closed surfaces charted over the unit sphere, and tensor quadrature grids."""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "Surface",
    "QuadratureGrid",
    "make_sphere",
    "make_ellipsoid",
    "make_custom",
    "two_spheres",
    "build_grid",
    "build_grids",
    "export_grid_csv",
    "unit_sphere_points",
]

MIN_NODES = 4


def unit_sphere_points(theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], -1)


@dataclass(frozen=True, eq=False)
class Surface:
    """A closed surface given as a map from the unit sphere.

    ``chart(theta, phi)`` returns points and ``chart_derivatives`` returns the
    partial derivatives in ``theta`` and ``phi``.  Affine surfaces (spheres,
    ellipsoids) are stored as ``x = center + D p`` with ``D`` diagonal, which
    gives closed forms for points, normals and the area factor at any point
    ``p`` of the unit sphere.
    """

    descriptor: dict
    component_id: int = 0
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    axes: tuple[float, float, float] | None = None
    custom_chart: Callable | None = field(default=None, repr=False)
    custom_derivatives: Callable | None = field(default=None, repr=False)

    @property
    def kind(self) -> str:
        return self.descriptor["kind"]

    # chart in (theta, phi)
    def chart(self, theta, phi) -> np.ndarray:
        if self.axes is None:
            return np.asarray(self.custom_chart(theta, phi), dtype=float)
        return self.point(unit_sphere_points(theta, phi))

    def chart_derivatives(self, theta, phi) -> tuple[np.ndarray, np.ndarray]:
        if self.axes is None:
            dt, dp = self.custom_derivatives(theta, phi)
            return np.asarray(dt, dtype=float), np.asarray(dp, dtype=float)
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        D = np.asarray(self.axes)
        ct, st, cp, sp = np.cos(theta), np.sin(theta), np.cos(phi), np.sin(phi)
        dt = np.stack([ct * cp, ct * sp, -st], -1) * D
        dp = np.stack([-st * sp, st * cp, np.zeros_like(st)], -1) * D
        return dt, dp

    # evaluation at unit-sphere points
    def point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.axes is None:
            th, ph = _angles(p)
            return self.chart(th, ph)
        return np.asarray(self.center) + p * np.asarray(self.axes)

    def normal(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.axes is None:
            n, _ = self._custom_frame(p)
            return n
        g = p / np.asarray(self.axes)
        return g / np.linalg.norm(g, axis=-1, keepdims=True)

    def area_factor(self, p) -> np.ndarray:
        """Ratio of surface area element to unit-sphere area element."""
        p = np.asarray(p, dtype=float)
        if self.axes is None:
            _, J = self._custom_frame(p)
            return J
        a, b, c = self.axes
        g = p / np.asarray(self.axes)
        return a * b * c * np.linalg.norm(g, axis=-1)

    def geometry_at(self, p) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.point(p), self.normal(p), self.area_factor(p)

    def _custom_frame(self, p):
        th, ph = _angles(p)
        dt, dp = self.chart_derivatives(th, ph)
        cr = np.cross(dt, dp)
        jac = np.linalg.norm(cr, axis=-1)
        n = cr / jac[..., None]
        st = np.sin(th)
        return n, jac / st

    def volume(self) -> float | None:
        if self.axes is None:
            return None
        return 4.0 / 3.0 * math.pi * float(np.prod(self.axes))

    def radius_bound(self) -> float:
        if self.axes is not None:
            return float(max(self.axes))
        th = np.linspace(0.01, math.pi - 0.01, 64)
        ph = np.linspace(0, 2 * math.pi, 128)
        T, P = np.meshgrid(th, ph, indexing="ij")
        x = self.chart(T, P) - np.asarray(self.center)
        return float(np.linalg.norm(x, axis=-1).max())


def _angles(p):
    theta = np.arccos(np.clip(p[..., 2], -1.0, 1.0))
    phi = np.arctan2(p[..., 1], p[..., 0])
    return theta, phi


def _check_center(center) -> tuple[float, float, float]:
    c = tuple(float(v) for v in center)
    if len(c) != 3:
        raise ValueError("center must have three coordinates")
    return c


def make_sphere(r: float = 1.0, center=(0.0, 0.0, 0.0), component_id: int = 0) -> Surface:
    if not r > 0:
        raise ValueError(f"sphere radius must be positive, got {r}")
    c = _check_center(center)
    return Surface({"kind": "sphere", "r": float(r), "center": list(c)}, component_id, c,
                   (float(r),) * 3)


def make_ellipsoid(a: float, b: float, c: float, center=(0.0, 0.0, 0.0),
                   component_id: int = 0) -> Surface:
    if not (a > 0 and b > 0 and c > 0):
        raise ValueError(f"semi-axes must be positive, got {(a, b, c)}")
    ctr = _check_center(center)
    return Surface({"kind": "ellipsoid", "axes": [float(a), float(b), float(c)], "center": list(ctr)},
                   component_id, ctr, (float(a), float(b), float(c)))


def make_custom(chart: Callable, derivatives: Callable, center=(0.0, 0.0, 0.0),
                component_id: int = 0, name: str = "custom") -> Surface:
    """Custom star-shaped surface; the caller guarantees a smooth embedding.

    ``chart(theta, phi)`` and ``derivatives(theta, phi) -> (d_theta, d_phi)``
    must be analytic; the orientation ``d_theta x d_phi`` must point outward.
    """
    return Surface({"kind": "custom", "name": name}, component_id, _check_center(center), None,
                   chart, derivatives)


def two_spheres(radius: float = 1.0, distance: float = 4.0) -> list[Surface]:
    """Two equal disjoint spheres on the x axis, centres ``distance`` apart."""
    if distance < 4.0 * radius:
        raise ValueError("centre distance must be at least four radii")
    h = 0.5 * distance
    return [make_sphere(radius, (-h, 0.0, 0.0), 0), make_sphere(radius, (h, 0.0, 0.0), 1)]


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Gauss-Legendre (in cos theta) times trapezoid (in phi) grid.

    Nodes are ordered ring by ring from the north pole, ``phi`` fastest.
    ``sphere_weights`` integrate over the unit sphere; ``weights`` include the
    area factor and integrate over the surface.
    """

    surface: Surface
    n_theta: int
    n_phi: int
    theta: np.ndarray
    phi: np.ndarray
    sphere_points: np.ndarray
    sphere_weights: np.ndarray
    nodes: np.ndarray
    normals: np.ndarray
    area_factor: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def patch_radius(self) -> np.ndarray:
        return np.sqrt(self.weights / math.pi)

    @property
    def component_id(self) -> int:
        return self.surface.component_id

    @property
    def ring_theta(self) -> np.ndarray:
        return self.theta[:: self.n_phi]

    @property
    def ring_phi(self) -> np.ndarray:
        return self.phi[: self.n_phi]

    @property
    def harmonic_degree(self) -> int:
        """Largest degree resolved exactly by the grid's product rule."""
        return min(self.n_theta - 1, (self.n_phi - 1) // 2)

    def area(self) -> float:
        return float(self.weights.sum())

    def flux(self) -> float:
        """``sum w (nu . x)``, three times the enclosed volume."""
        rel = self.nodes - np.asarray(self.surface.center)
        return float(np.sum(self.weights * np.einsum("ij,ij->i", self.normals, rel)))

    def descriptor(self) -> dict:
        return {"surface": self.surface.descriptor, "component": self.component_id,
                "n_theta": self.n_theta, "n_phi": self.n_phi}

    @cached_property
    def digest(self) -> int:
        h = hashlib.blake2b(digest_size=8)
        h.update(repr(sorted(self.descriptor()["surface"].items())).encode())
        h.update(np.array([self.component_id, self.n_theta, self.n_phi], dtype="<i8").tobytes())
        for arr in (self.nodes, self.normals, self.weights):
            h.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        return int.from_bytes(h.digest(), "little")


def build_grid(surface: Surface, n_theta: int, n_phi: int) -> QuadratureGrid:
    if n_theta < MIN_NODES or n_phi < MIN_NODES:
        raise ValueError(f"grid {n_theta}x{n_phi} too small, need at least {MIN_NODES} in each direction")
    x, w = leggauss(n_theta)
    # north pole first
    ct = x[::-1]
    wt = w[::-1]
    theta_r = np.arccos(ct)
    phi_r = 2.0 * math.pi * np.arange(n_phi) / n_phi
    T, P = np.meshgrid(theta_r, phi_r, indexing="ij")
    theta = T.ravel()
    phi = P.ravel()
    sw = np.repeat(wt * (2.0 * math.pi / n_phi), n_phi)
    p = unit_sphere_points(theta, phi)
    if surface.axes is not None:
        nodes, normals, J = surface.geometry_at(p)
    else:
        nodes = surface.chart(theta, phi)
        dt, dp = surface.chart_derivatives(theta, phi)
        cr = np.cross(dt, dp)
        jac = np.linalg.norm(cr, axis=-1)
        normals = cr / jac[:, None]
        J = jac / np.sin(theta)
    weights = sw * J
    grid = QuadratureGrid(surface, n_theta, n_phi, theta, phi, p, sw, nodes, normals, J, weights)
    if not np.all(weights > 0):
        raise ValueError("nonpositive quadrature weight")
    return grid


def build_grids(surfaces: Sequence[Surface], n_theta: int, n_phi: int) -> list[QuadratureGrid]:
    return [build_grid(s, n_theta, n_phi) for s in surfaces]


def export_grid_csv(grid: QuadratureGrid | Sequence[QuadratureGrid], path) -> None:
    grids = [grid] if isinstance(grid, QuadratureGrid) else list(grid)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z", "nx", "ny", "nz", "w"])
        for g in grids:
            for x, n, w in zip(g.nodes, g.normals, g.weights):
                writer.writerow([repr(float(v)) for v in (*x, *n, w)])
