"""Lamé parameter fields, convexity checks and derived constants.

A :class:`LameField` maps boundary points to Lamé moduli.  Fields are
evaluated in vectorized form, ``field.evaluate(points, component)`` returns
two arrays ``(lam, mu)``, and every evaluation is checked against the strong
convexity conditions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "ConvexityError",
    "ConvexityVerdict",
    "Classification",
    "LameParams",
    "LameField",
    "KelvinConstants",
    "EssSpecPrediction",
    "validate_convexity",
    "kappa0",
    "kelvin_constants",
    "predict_essential_spectrum",
    "constant_field",
    "per_component_field",
    "modulated_field",
    "POINT_REL_TOL",
]

# relative width below which a sampled kappa0 range is collapsed to a point
POINT_REL_TOL = 1e-9


class ConvexityError(ValueError):
    """Raised when Lamé parameters violate strong convexity."""


@dataclass(frozen=True)
class ConvexityVerdict:
    valid: bool
    failed: str | None = None

    def __bool__(self) -> bool:
        return self.valid


@dataclass(frozen=True)
class LameParams:
    lam: float
    mu: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.lam, self.mu)


def validate_convexity(params: LameParams, d: int = 3) -> ConvexityVerdict:
    """Check ``mu > 0`` and ``d*lam + 2*mu > 0``.

    The verdict names the first inequality that fails.
    """
    if d not in (2, 3):
        raise ValueError(f"dimension must be 2 or 3, got {d}")
    if not params.mu > 0:
        return ConvexityVerdict(False, "mu>0 failed")
    if not d * params.lam + 2 * params.mu > 0:
        return ConvexityVerdict(False, f"{d}*lambda+2*mu>0 failed")
    return ConvexityVerdict(True)


def _require(params: LameParams, d: int = 3) -> None:
    verdict = validate_convexity(params, d)
    if not verdict:
        raise ConvexityError(f"{params}: {verdict.failed}")


def kappa0(params: LameParams) -> float:
    """Essential-spectrum point ``mu / (2 (lam + 2 mu))``."""
    _require(params)
    value = params.mu / (2.0 * (params.lam + 2.0 * params.mu))
    assert 0.0 < value < 0.5
    return value


@dataclass(frozen=True)
class KelvinConstants:
    lambda_prime: float
    mu_prime: float
    delta_prime: float
    # lambda' - mu' as given by the defining formulas (negative)
    literal_difference: float


def kelvin_constants(params: LameParams) -> KelvinConstants:
    _require(params)
    lam, mu = params.lam, params.mu
    denom = 4.0 * math.pi * mu * (lam + 2.0 * mu)
    lp = (lam + mu) / denom
    mp = (lam + 3.0 * mu) / denom
    diff = lp - mp
    delta = 1.0 / (2.0 * math.pi * (lam + 2.0 * mu))
    assert math.isclose(abs(diff), delta, rel_tol=1e-12)
    assert math.isclose(math.pi * mu * delta, kappa0(params), rel_tol=1e-14)
    return KelvinConstants(lp, mp, delta, diff)


def kappa0_array(lam: np.ndarray, mu: np.ndarray) -> np.ndarray:
    return np.asarray(mu) / (2.0 * (np.asarray(lam) + 2.0 * np.asarray(mu)))


class Classification(str, enum.Enum):
    CONSTANT = "constant"
    PER_COMPONENT = "per_component"
    VARIABLE = "variable"


Evaluator = Callable[[np.ndarray, int], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class LameField:
    """A Lamé field over the boundary.

    ``evaluator(points, component)`` receives an ``(n, d)`` array of points
    lying on boundary component ``component`` and returns ``(lam, mu)``
    arrays of length ``n``.  It must be pure.
    """

    evaluator: Evaluator
    classification: Classification
    component_count: int = 1
    delta: float = 0.0
    descriptor: dict = dc_field(default_factory=dict, compare=False)

    def evaluate(self, points, component: int = 0, d: int = 3):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        # single-component fields apply to every component
        if self.component_count == 1:
            component = 0
        if not 0 <= component < self.component_count:
            raise ValueError(f"component {component} outside field with {self.component_count} components")
        lam, mu = self.evaluator(pts, component)
        lam = np.broadcast_to(np.asarray(lam, dtype=float), pts.shape[:1]).copy()
        mu = np.broadcast_to(np.asarray(mu, dtype=float), pts.shape[:1]).copy()
        bad_mu = ~(mu > 0)
        bad_conv = ~(d * lam + 2 * mu > 0)
        if bad_mu.any() or bad_conv.any():
            which = "mu>0" if bad_mu.any() else f"{d}*lambda+2*mu>0"
            raise ConvexityError(f"field violates {which} at {int((bad_mu | bad_conv).sum())} points")
        return lam, mu

    def at(self, point, component: int = 0, d: int = 3) -> LameParams:
        lam, mu = self.evaluate(np.asarray(point, dtype=float)[None, :], component, d)
        return LameParams(float(lam[0]), float(mu[0]))

    def kappa0(self, points, component: int = 0) -> np.ndarray:
        lam, mu = self.evaluate(points, component)
        return kappa0_array(lam, mu)

    def check_classification(self, samples: Sequence[np.ndarray]) -> bool:
        """Verify the classification against point samples per component."""
        values = [np.stack(self.evaluate(s, c), -1) for c, s in enumerate(samples)]
        if self.classification is Classification.VARIABLE:
            return True
        per_comp = [np.ptp(v, axis=0).max() == 0.0 for v in values]
        if not all(per_comp):
            return False
        if self.classification is Classification.CONSTANT:
            firsts = np.array([v[0] for v in values])
            return bool(np.ptp(firsts, axis=0).max() == 0.0)
        return True


def constant_field(lam: float = 1.0, mu: float = 1.0, component_count: int = 1) -> LameField:
    p = LameParams(float(lam), float(mu))
    _require(p)

    def ev(points, component):
        n = len(points)
        return np.full(n, p.lam), np.full(n, p.mu)

    return LameField(ev, Classification.CONSTANT, component_count, min(p.mu, 3 * p.lam + 2 * p.mu),
                     {"kind": "constant", "lambda": p.lam, "mu": p.mu})


def per_component_field(table: Iterable[tuple[float, float]]) -> LameField:
    params = [LameParams(float(a), float(b)) for a, b in table]
    if not params:
        raise ValueError("per-component table is empty")
    for p in params:
        _require(p)

    def ev(points, component):
        p = params[component]
        n = len(points)
        return np.full(n, p.lam), np.full(n, p.mu)

    delta = min(min(p.mu, 3 * p.lam + 2 * p.mu) for p in params)
    return LameField(ev, Classification.PER_COMPONENT, len(params), delta,
                     {"kind": "per_component", "table": [p.as_tuple() for p in params]})


def modulated_field(lam_range: tuple[float, float] = (1.0, 1.0),
                    mu_range: tuple[float, float] = (1.0, 2.0),
                    axis: Sequence[float] = (0.0, 0.0, 1.0),
                    center: Sequence[float] = (0.0, 0.0, 0.0)) -> LameField:
    """Smooth modulation ``lo + (hi - lo) * s(x)`` with ``s = (1 + a.u) / 2``.

    ``u`` is the unit vector from ``center`` to ``x`` and ``a`` the unit axis,
    so on a sphere about ``center`` both moduli sweep exactly their ranges.
    """
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    c = np.asarray(center, dtype=float)
    lam_lo, lam_hi = map(float, lam_range)
    mu_lo, mu_hi = map(float, mu_range)
    corners = [LameParams(x, y) for x in (lam_lo, lam_hi) for y in (mu_lo, mu_hi)]
    for p in corners:
        _require(p)

    def ev(points, component):
        d = points - c[: points.shape[1]]
        u = d / np.linalg.norm(d, axis=1, keepdims=True)
        s = 0.5 * (1.0 + u @ a[: points.shape[1]])
        return lam_lo + (lam_hi - lam_lo) * s, mu_lo + (mu_hi - mu_lo) * s

    delta = min(min(p.mu, 3 * p.lam + 2 * p.mu) for p in corners)
    return LameField(ev, Classification.VARIABLE, 1, delta,
                     {"kind": "modulated", "lambda": [lam_lo, lam_hi], "mu": [mu_lo, mu_hi],
                      "axis": a.tolist(), "center": c.tolist()})


@dataclass(frozen=True)
class EssSpecPrediction:
    """Finite union of points and closed intervals, symmetric about zero."""

    points: tuple[float, ...]
    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if 0.0 not in self.points:
            raise ValueError("prediction must contain 0")
        for lo, hi in self.intervals:
            if not hi > lo:
                raise ValueError(f"degenerate interval [{lo}, {hi}]")

    @property
    def elements(self) -> list[tuple[float, float]]:
        """All elements as closed intervals, points as ``(p, p)``."""
        return [(p, p) for p in self.points] + list(self.intervals)

    def distance(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=float)
        out = np.full(v.shape, np.inf)
        for lo, hi in self.elements:
            out = np.minimum(out, np.maximum(0.0, np.maximum(lo - v, v - hi)))
        return out

    def nearest(self, values) -> np.ndarray:
        """Index into :attr:`elements` of the nearest element."""
        v = np.asarray(values, dtype=float)
        dists = np.stack([np.maximum(0.0, np.maximum(lo - v, v - hi)) for lo, hi in self.elements])
        return np.argmin(dists, axis=0)

    def is_symmetric(self, tol: float = 0.0) -> bool:
        pts = sorted(self.points)
        neg = sorted(-p for p in self.points)
        ivs = sorted(self.intervals)
        negiv = sorted((-hi, -lo) for lo, hi in self.intervals)
        return (np.allclose(pts, neg, atol=tol, rtol=0)
                and (not ivs or np.allclose(ivs, negiv, atol=tol, rtol=0)))

    def hausdorff(self, other: "EssSpecPrediction", resolution: int = 200) -> float:
        def sample(pred):
            chunks = [np.array(pred.points, dtype=float)]
            chunks += [np.linspace(lo, hi, resolution) for lo, hi in pred.intervals]
            return np.concatenate(chunks)

        a, b = sample(self), sample(other)
        return float(max(other.distance(a).max(), self.distance(b).max()))

    def scaled(self, factor: float) -> "EssSpecPrediction":
        return EssSpecPrediction(tuple(factor * p for p in self.points),
                                 tuple(tuple(sorted((factor * lo, factor * hi))) for lo, hi in self.intervals))

    def to_dict(self) -> dict:
        return {"points": list(self.points), "intervals": [list(iv) for iv in self.intervals]}

    @classmethod
    def from_dict(cls, data: dict) -> "EssSpecPrediction":
        return cls(tuple(data["points"]), tuple(tuple(iv) for iv in data.get("intervals", ())))


def _as_points(sample) -> np.ndarray:
    pts = getattr(sample, "nodes", sample)
    return np.atleast_2d(np.asarray(pts, dtype=float))


def prediction_from_ranges(ranges: Sequence[tuple[float, float]],
                           rel_tol: float = POINT_REL_TOL) -> EssSpecPrediction:
    """Build ``{0} u +-ranges`` collapsing near-degenerate ranges to points."""
    points = {0.0}
    intervals = set()
    for lo, hi in ranges:
        mid = 0.5 * (lo + hi)
        if hi - lo < rel_tol * abs(mid):
            points.update((mid, -mid))
        else:
            intervals.update(((lo, hi), (-hi, -lo)))
    return EssSpecPrediction(tuple(sorted(points)), tuple(sorted(intervals)))


def predict_essential_spectrum(field: LameField, components: Sequence) -> EssSpecPrediction:
    """Range of ``kappa0`` over each component, mirrored about zero.

    ``components`` holds point samples (arrays, or objects with ``nodes``),
    one per boundary component.
    """
    if len(components) == 0:
        raise ValueError("no component samples given")
    ranges = []
    for c, sample in enumerate(components):
        pts = _as_points(sample)
        if pts.size == 0:
            raise ValueError(f"component {c} sample is empty")
        k = field.kappa0(pts, c)
        ranges.append((float(k.min()), float(k.max())))
    if field.classification is Classification.CONSTANT:
        ranges = [(ranges[0][0], ranges[0][0])]
    return prediction_from_ranges(ranges)
