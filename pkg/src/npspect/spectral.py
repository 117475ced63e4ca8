"""Eigenvalue extraction, essential-spectrum detection and decay fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np
import scipy.linalg

from .assembly import HarmonicBasis, MatrixKind, OperatorMatrix
from .material import EssSpecPrediction

__all__ = [
    "EigenError",
    "SpectrumResult",
    "LevelReport",
    "ClusterReport",
    "DecayFit",
    "ExponentBound",
    "eigenvalues",
    "capture_fraction",
    "interval_coverage",
    "point_coverage",
    "tip_sequence",
    "detect_essential_spectrum",
    "decay_fit",
    "predicted_decay_exponent",
    "normal_energy_fractions",
    "polynomial_values",
    "large_singular_count",
    "growth_exponent",
    "CAPTURE_THRESHOLD",
    "COVERAGE_THRESHOLD",
    "MIN_FIT_POINTS",
]

CAPTURE_THRESHOLD = 0.95
COVERAGE_THRESHOLD = 0.9
MIN_FIT_POINTS = 8


class EigenError(RuntimeError):
    pass


@dataclass
class SpectrumResult:
    values: np.ndarray
    kind: str
    grid: list = dc_field(default_factory=list)
    field: dict = dc_field(default_factory=dict)
    imag_max: float = 0.0
    label: str = ""

    def __post_init__(self):
        self.values = np.sort(np.asarray(self.values, dtype=float))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def spectral_radius(self) -> float:
        return float(np.abs(self.values).max()) if len(self.values) else 0.0


def eigenvalues(matrix: OperatorMatrix | np.ndarray, label: str = "") -> SpectrumResult:
    """Symmetric solve for symmetrized matrices, general solve otherwise."""
    if isinstance(matrix, OperatorMatrix):
        data, kind = matrix.data, matrix.kind
        grid = matrix.provenance.get("grids", [])
        fld = matrix.provenance.get("field", {})
    else:
        data, kind, grid, fld = np.asarray(matrix), None, [], {}
    try:
        if kind is MatrixKind.SYMMETRIZED or kind is MatrixKind.SINGLE_LAYER:
            vals = scipy.linalg.eigvalsh(0.5 * (data + data.T))
            imag = 0.0
        else:
            ev = scipy.linalg.eigvals(data)
            vals, imag = ev.real, float(np.abs(ev.imag).max()) if len(ev) else 0.0
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenError(f"eigensolver failed: {exc}") from exc
    kind_name = kind.value if kind is not None else "array"
    return SpectrumResult(vals, kind_name, grid, fld, imag, label)


def _values(spectrum) -> np.ndarray:
    return spectrum.values if isinstance(spectrum, SpectrumResult) else np.sort(np.asarray(spectrum, dtype=float))


def capture_fraction(values, prediction: EssSpecPrediction, eps: float) -> float:
    v = _values(values)
    return float(np.mean(prediction.distance(v) <= eps)) if len(v) else 0.0


def _union_length(centres: np.ndarray, eps: float, lo: float, hi: float) -> float:
    c = np.sort(centres[(centres >= lo - eps) & (centres <= hi + eps)])
    total, cur_lo, cur_hi = 0.0, None, None
    for x in c:
        a, b = max(lo, x - eps), min(hi, x + eps)
        if cur_hi is None or a > cur_hi:
            if cur_hi is not None:
                total += cur_hi - cur_lo
            cur_lo, cur_hi = a, b
        else:
            cur_hi = max(cur_hi, b)
    if cur_hi is not None:
        total += cur_hi - cur_lo
    return total


def interval_coverage(values, prediction: EssSpecPrediction, eps: float) -> float | None:
    """Fraction of the total interval length within ``eps`` of an eigenvalue."""
    if not prediction.intervals:
        return None
    v = _values(values)
    length = sum(hi - lo for lo, hi in prediction.intervals)
    covered = sum(_union_length(v, eps, lo, hi) for lo, hi in prediction.intervals)
    return covered / length


def point_coverage(values, prediction: EssSpecPrediction, eps: float) -> float:
    """Fraction of predicted isolated points with an eigenvalue within ``eps``."""
    v = _values(values)
    hits = [bool(np.any(np.abs(v - p) <= eps)) for p in prediction.points]
    return float(np.mean(hits))


@dataclass
class LevelReport:
    grid: str
    size: int
    capture: float
    coverage: float | None
    point_coverage: float
    per_target: dict
    target_counts: dict

    def to_dict(self) -> dict:
        return {"grid": self.grid, "size": self.size, "capture": self.capture,
                "coverage": self.coverage, "point_coverage": self.point_coverage,
                "per_target": self.per_target, "target_counts": self.target_counts}


@dataclass
class ClusterReport:
    prediction: EssSpecPrediction
    eps: float
    levels: list[LevelReport]
    nearest_distance: list[np.ndarray]
    capture_nondecreasing: bool
    coverage_nondecreasing: bool
    passed: bool

    def to_dict(self) -> dict:
        return {"prediction": self.prediction.to_dict(), "eps": self.eps,
                "ladder": [lv.to_dict() for lv in self.levels],
                "capture_nondecreasing": self.capture_nondecreasing,
                "coverage_nondecreasing": self.coverage_nondecreasing, "verdict": self.passed}


def _target_name(lo: float, hi: float) -> str:
    return f"{lo:.6g}" if lo == hi else f"[{lo:.6g},{hi:.6g}]"


def _nondecreasing(seq) -> bool:
    return all(b >= a - 1e-12 for a, b in zip(seq, seq[1:]))


def detect_essential_spectrum(spectra: Sequence, prediction: EssSpecPrediction, eps: float,
                              labels: Sequence[str] | None = None) -> ClusterReport:
    """Capture/coverage fractions along a refinement ladder with a verdict."""
    if len(spectra) < 3:
        raise ValueError("need at least three refinement levels")
    if not eps > 0:
        raise ValueError("eps must be positive")
    elements = prediction.elements
    levels, dists = [], []
    for k, sp in enumerate(spectra):
        v = _values(sp)
        d = prediction.distance(v)
        near = prediction.nearest(v)
        inside = d <= eps
        per, counts = {}, {}
        for e, (lo, hi) in enumerate(elements):
            hit = inside & (near == e)
            per[_target_name(lo, hi)] = float(hit.mean()) if len(v) else 0.0
            counts[_target_name(lo, hi)] = int(hit.sum())
        if labels is not None:
            name = labels[k]
        elif isinstance(sp, SpectrumResult) and sp.label:
            name = sp.label
        else:
            name = str(k)
        levels.append(LevelReport(name, len(v), float(inside.mean()), interval_coverage(v, prediction, eps),
                                  point_coverage(v, prediction, eps), per, counts))
        dists.append(d)
    caps = [lv.capture for lv in levels]
    covs = [lv.coverage if lv.coverage is not None else lv.point_coverage for lv in levels]
    cap_ok, cov_ok = _nondecreasing(caps), _nondecreasing(covs)
    passed = cap_ok and cov_ok and caps[-1] >= CAPTURE_THRESHOLD and covs[-1] >= COVERAGE_THRESHOLD
    return ClusterReport(prediction, eps, levels, dists, cap_ok, cov_ok, passed)


@dataclass(frozen=True)
class DecayFit:
    tip: float
    side: str
    mode: str
    exponent: float  # power mode: slope of log gap against log j
    rate: float      # exponential mode: -slope of log gap against j
    residual: float
    j_min: int
    j_max: int
    n_points: int

    def to_dict(self) -> dict:
        return {"tip": self.tip, "side": self.side, "mode": self.mode,
                "exponent": self.exponent if self.mode == "power" else -self.rate,
                "rate": self.rate, "residual": self.residual, "j_min": self.j_min, "j_max": self.j_max,
                "n_points": self.n_points}


def tip_sequence(values, tip: float, side: str, prediction: EssSpecPrediction | None = None,
                 mask=None) -> np.ndarray:
    """Gaps ``|lambda - tip|`` converging to ``tip`` from ``side``, largest first.

    With a prediction, only eigenvalues whose nearest predicted element is
    the tip and that lie outside every predicted interval are kept.
    """
    v = np.asarray(values, dtype=float)
    if mask is not None:
        v = v[np.asarray(mask, dtype=bool)]
    if side == "above":
        v = v[v > tip]
    elif side == "below":
        v = v[v < tip]
    else:
        raise ValueError("side must be 'above' or 'below'")
    if prediction is not None:
        elements = prediction.elements
        try:
            tip_index = elements.index((tip, tip))
        except ValueError:
            raise ValueError(f"tip {tip} is not a predicted point") from None
        outside = np.array([not any(lo <= x <= hi for lo, hi in prediction.intervals) for x in v], dtype=bool)
        v = v[(prediction.nearest(v) == tip_index) & outside] if len(v) else v
    return np.sort(np.abs(v - tip))[::-1]


def decay_fit(spectrum, tip: float, side: str = "above", window: tuple[int, int] | None = None,
              mode: str = "power", prediction: EssSpecPrediction | None = None, mask=None) -> DecayFit:
    """Least-squares fit of ``log|lambda_j - tip|`` against ``log j`` or ``j``.

    ``j`` is the 1-based rank in the gap sequence ordered with multiplicity.
    ``mask`` selects an eigenvalue family before ranking.
    """
    vals = spectrum.values if isinstance(spectrum, SpectrumResult) else np.asarray(spectrum, dtype=float)
    gaps = tip_sequence(vals, tip, side, prediction, mask)
    j = np.arange(1, len(gaps) + 1)
    if window is not None:
        lo, hi = window
        keep = (j >= lo) & (j <= hi)
        j, gaps = j[keep], gaps[keep]
    keep = gaps > 0
    j, gaps = j[keep], gaps[keep]
    if len(gaps) < MIN_FIT_POINTS:
        raise ValueError(f"only {len(gaps)} eigenvalues available for the fit, need {MIN_FIT_POINTS}")
    if mode == "power":
        xs = np.log(j)
    elif mode == "exponential":
        xs = j.astype(float)
    else:
        raise ValueError(f"unknown fit mode {mode!r}")
    A = np.stack([xs, np.ones_like(xs)], 1)
    coef, *_ = np.linalg.lstsq(A, np.log(gaps), rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - np.log(gaps)) ** 2)))
    slope = float(coef[0])
    return DecayFit(tip, side, mode, slope, -slope, resid, int(j[0]), int(j[-1]), len(j))


@dataclass(frozen=True)
class ExponentBound:
    kind: str
    exponent: float
    tau_min: float
    strict: bool
    note: str

    def admits(self, tau: float) -> bool:
        return tau > self.tau_min if self.strict else tau >= self.tau_min


def predicted_decay_exponent(kind: str, nu: float | None = None) -> ExponentBound:
    """Decay bound ``|lambda_j - s*| = O(j^(-1/tau))`` for a tip kind.

    ``essential_point_constant``: exponent -1/2.  ``nondegenerate_min``: any
    ``tau > 1``, exponents approaching -1.  ``flat_min`` with order ``nu >= 2``:
    ``tau > (2 nu - 1)/nu``.
    """
    if kind == "essential_point_constant":
        return ExponentBound(kind, -0.5, 2.0, False, "exponent -1/2")
    if kind == "nondegenerate_min":
        return ExponentBound(kind, -1.0, 1.0, True, "exponent <= -1/tau for all tau > 1, approaching -1")
    if kind == "flat_min":
        if nu is None or nu < 2:
            raise ValueError("flat_min requires flatness order nu >= 2 (nu = 1 is the nondegenerate case)")
        tau = (2.0 * nu - 1.0) / nu
        return ExponentBound(kind, -1.0 / tau, tau, True, f"exponent -1/tau for tau > {tau:g}")
    raise ValueError(f"unknown tip kind {kind!r}")


def normal_energy_fractions(matrix: OperatorMatrix, cluster_tol: float = 1e-7):
    """Eigenvalues with the share of each eigen-density in the normal direction.

    Within clusters of (numerically) repeated eigenvalues the share is the
    generalized eigenvalue of the normal-energy form, so each fraction belongs
    to a definite eigen-density.  Returns ``(values, fractions)`` sorted by value.
    """
    if matrix.basis != "harmonic" or matrix.grids is None:
        raise ValueError("normal fractions need a harmonic-basis matrix with its grids")
    data = matrix.data
    if matrix.kind is MatrixKind.SYMMETRIZED:
        vals, vecs = np.linalg.eigh(data)
        vecs = matrix.extras["density_map"] @ vecs
    elif np.abs(data - data.T).max() <= 1e-12 * np.abs(data).max():
        vals, vecs = np.linalg.eigh(0.5 * (data + data.T))
    else:
        ev, vecs = scipy.linalg.eig(data)
        vals = ev.real
        vecs = vecs.real if np.abs(vecs.imag).max() < 1e-12 else vecs
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    basis = HarmonicBasis(matrix.grids)
    fractions = np.empty(len(vals))
    scale = max(np.abs(vals).max(), 1e-300)
    start = 0
    while start < len(vals):
        stop = start + 1
        while stop < len(vals) and vals[stop] - vals[stop - 1] <= cluster_tol * scale:
            stop += 1
        V = vecs[:, start:stop]
        G = np.zeros((stop - start,) * 2, dtype=V.dtype)
        Gn = np.zeros_like(G)
        for g, phi in zip(basis.grids, basis.nodal_values(V)):
            w = g.weights[:, None, None]
            G += np.einsum("ian,iam->nm", (phi.conj() * w), phi)
            pn = np.einsum("ia,ian->in", g.normals, phi)
            Gn += np.einsum("in,im->nm", pn.conj() * g.weights[:, None], pn)
        G = 0.5 * (G + G.conj().T)
        Gn = 0.5 * (Gn + Gn.conj().T)
        fractions[start:stop] = np.clip(scipy.linalg.eigh(Gn, G, eigvals_only=True).real, 0.0, 1.0)
        start = stop
    return vals, fractions


def polynomial_values(values, roots: Sequence[float]) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    out = v.copy()
    for r in roots:
        out = out * (v * v - r * r)
    return out


def large_singular_count(matrix: OperatorMatrix | np.ndarray, roots: Sequence[float] = (), tau: float = 1e-2) -> int:
    """Number of singular values of ``p(M)`` above ``tau``, ``p(s) = s prod(s^2 - r^2)``.

    ``M`` must be symmetric, so the singular values are ``|p(eigenvalues)|``.
    """
    data = matrix.data if isinstance(matrix, OperatorMatrix) else np.asarray(matrix)
    vals = np.linalg.eigvalsh(0.5 * (data + data.T))
    return int(np.count_nonzero(np.abs(polynomial_values(vals, roots)) > tau))


def growth_exponent(sizes: Sequence[int], counts: Sequence[int]) -> float:
    """Slope of ``log count`` against ``log size`` (``-inf`` counts treated as 1)."""
    s = np.log(np.asarray(sizes, dtype=float))
    c = np.log(np.maximum(np.asarray(counts, dtype=float), 1.0))
    return float(np.polyfit(s, c, 1)[0])
