"""Verification suites shared by ``npspect verify`` and the acceptance tests.

Each suite returns a list of :class:`Verdict`, one per checked criterion.
Heavy runs go through a :class:`Lab`, which memoizes spectra (and keeps a
few assembled matrices) so that suites sharing a refinement ladder only
assemble it once.
"""

from __future__ import annotations

import logging
import math
import struct
import tempfile
from collections import OrderedDict
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import assembly, oracle, planar, spectral, symbol
from .assembly import MatrixKind, OperatorMatrix
from .geometry import Surface, build_grid, make_sphere, two_spheres
from .kernels import lame_operator_fd, traction, traction_array, traction_fd
from .material import (EssSpecPrediction, LameField, LameParams, constant_field, kappa0,
                       kelvin_constants, modulated_field, per_component_field, predict_essential_spectrum)

__all__ = ["Verdict", "Lab", "SUITES", "DEFAULT_LADDER", "run_suite", "jump_relation_errors"]

log = logging.getLogger("npspect")

DEFAULT_LADDER = ((12, 24), (16, 32), (24, 48), (32, 64))
ORACLE_GRID = (24, 48)
DECAY_GRID = (24, 48)
TANGENTIAL_FRACTION = 0.1


@dataclass
class Verdict:
    criterion: int
    name: str
    passed: bool
    summary: str
    details: dict = dc_field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.criterion:>2} {self.name}: {self.summary}"

    def to_dict(self) -> dict:
        return {"criterion": self.criterion, "name": self.name, "passed": bool(self.passed),
                "summary": self.summary, "details": _jsonable(self.details)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


# ------------------------------------------------------------------ lab

GEOMETRIES: dict[str, Callable[[], list[Surface]]] = {
    "sphere": lambda: [make_sphere(1.0)],
    "two_spheres": lambda: two_spheres(1.0, 4.0),
}


class Lab:
    """Assembles, caches and eigensolves discretizations on demand."""

    def __init__(self, workers: int = 1, cache_dir=None, keep_matrices: int = 4):
        self.workers = int(workers)
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.keep = keep_matrices
        self._matrices: OrderedDict = OrderedDict()
        self._spectra: dict = {}
        self._fractions: dict = {}
        self.cache_hits = 0
        self.assembled = 0

    def grids(self, geometry, size):
        surfaces = GEOMETRIES[geometry]() if isinstance(geometry, str) else list(geometry)
        return [build_grid(s, *size) for s in surfaces]

    def _key(self, geometry, size, field: LameField, kind: MatrixKind):
        geo = geometry if isinstance(geometry, str) else repr([s.descriptor for s in geometry])
        return (geo, tuple(size), repr(sorted(field.descriptor.items())), kind.value)

    def _remember(self, key, matrix):
        self._matrices[key] = matrix
        self._matrices.move_to_end(key)
        while len(self._matrices) > self.keep:
            self._matrices.popitem(last=False)

    def _base(self, geometry, size, field, kind) -> OperatorMatrix:
        key = self._key(geometry, size, field, kind)
        if key in self._matrices:
            self._matrices.move_to_end(key)
            return self._matrices[key]
        grids = self.grids(geometry, size)
        path = None
        if self.cache_dir is not None:
            h = assembly.build_hash(grids, field, kind, "spectral")
            path = self.cache_dir / f"{h:016x}.npsm"
            if path.exists():
                try:
                    m = assembly.cache_load(path, h, grids, field)
                    m.provenance.update({"grids": [g.descriptor() for g in grids], "field": field.descriptor,
                                         "scheme": "spectral"})
                    self.cache_hits += 1
                    log.info("cache hit %s (%s %dx%d), assembly skipped", path.name, kind.value, *size)
                    self._remember(key, m)
                    return m
                except assembly.CacheError as exc:
                    log.warning("ignoring cache file: %s", exc)
        if kind is MatrixKind.SINGLE_LAYER:
            m = assembly.assemble_single_layer(grids, field, workers=self.workers)
        else:
            m = assembly.assemble_np(grids, field, workers=self.workers)
        self.assembled += 1
        log.info("assembled %s %dx%d in %.1fs", kind.value, *size, m.provenance["timings"]["assembly_seconds"])
        if path is not None:
            assembly.cache_store(m, path)
        self._remember(key, m)
        return m

    def matrix(self, geometry, size, field: LameField, kind: MatrixKind | str) -> OperatorMatrix:
        kind = MatrixKind(kind)
        if kind in (MatrixKind.NP, MatrixKind.SINGLE_LAYER):
            return self._base(geometry, size, field, kind)
        K = self._base(geometry, size, field, MatrixKind.NP)
        if kind is MatrixKind.MODIFIED:
            return assembly.modified_np(K)
        S = self._base(geometry, size, field, MatrixKind.SINGLE_LAYER)
        return assembly.symmetrize(K, S)

    def spectrum(self, geometry, size, field, kind=MatrixKind.SYMMETRIZED) -> spectral.SpectrumResult:
        kind = MatrixKind(kind)
        key = self._key(geometry, size, field, kind)
        if key not in self._spectra:
            m = self.matrix(geometry, size, field, kind)
            sp = spectral.eigenvalues(m, label=f"{size[0]}x{size[1]}")
            if kind is MatrixKind.SYMMETRIZED:
                sp.field = dict(sp.field, clip_count=m.provenance.get("clip_count", 0))
            self._spectra[key] = sp
        return self._spectra[key]

    def fractions(self, geometry, size, field) -> tuple[np.ndarray, np.ndarray]:
        key = self._key(geometry, size, field, MatrixKind.SYMMETRIZED)
        if key not in self._fractions:
            self._fractions[key] = spectral.normal_energy_fractions(self.matrix(geometry, size, field,
                                                                                MatrixKind.SYMMETRIZED))
        return self._fractions[key]

    def ladder(self, geometry, field, kind=MatrixKind.SYMMETRIZED, ladder=DEFAULT_LADDER):
        return [self.spectrum(geometry, s, field, kind) for s in ladder]


def _sphere_sample(n: int = 4000, seed: int = 0) -> np.ndarray:
    """Random points on the unit sphere plus both poles."""
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return np.vstack([v, [[0, 0, 1.0], [0, 0, -1.0]]])


# ------------------------------------------------------- criterion 1

def suite_symbol_identities(lab: Lab | None = None, seed: int = 0) -> list[Verdict]:
    rng = np.random.default_rng(seed)
    materials = [LameParams(1.0, 1.0), LameParams(0.0, 1.0), LameParams(2.0, 0.5), LameParams(-0.5, 1.0)]
    worst = {"projector": 0.0, "inverse": 0.0, "ellipticity": 0.0, "hermitian": 0.0, "eigen": 0.0,
             "kappa_identity": 0.0}
    for _ in range(50):
        xi = rng.normal(size=3)
        p = materials[rng.integers(len(materials))]
        P = symbol.projector(xi)
        worst["projector"] = max(worst["projector"], np.abs(P @ P - P).max())
        prod = symbol.lame_symbol(xi, p) @ symbol.lame_symbol_inverse(xi, p)
        worst["inverse"] = max(worst["inverse"], np.abs(prod - np.eye(3)).max())
        v = rng.normal(size=3)
        lhs = -v @ symbol.lame_symbol(xi, p) @ v
        rhs = p.mu * (xi @ xi) * (v @ v) + (p.lam + p.mu) * (xi @ v) ** 2
        worst["ellipticity"] = max(worst["ellipticity"], abs(lhs - rhs) / max(1.0, abs(rhs)))
        xi2 = rng.normal(size=2)
        sig = symbol.np_symbol(None, xi2, p)
        worst["hermitian"] = max(worst["hermitian"], np.abs(sig - sig.conj().T).max())
        ev = np.linalg.eigvalsh(sig)
        k = kappa0(p)
        worst["eigen"] = max(worst["eigen"], np.abs(ev - [-k, 0.0, k]).max())
        kc = kelvin_constants(p)
        worst["kappa_identity"] = max(worst["kappa_identity"], abs(math.pi * p.mu * kc.delta_prime - k))
    i1, i2, i3 = symbol.line_integrals(1.0)
    lines = max(abs(i1 - math.pi), abs(i2 - math.pi / 2), abs(i3 - math.pi / 2))
    checks = {"projector": worst["projector"] < 1e-14, "inverse": worst["inverse"] < 1e-13,
              "ellipticity": worst["ellipticity"] < 1e-12, "hermitian": worst["hermitian"] < 1e-14,
              "eigenvalues": worst["eigen"] < 1e-12, "kappa_identity": worst["kappa_identity"] < 1e-15,
              "line_integrals": lines < 1e-8}
    details = dict(worst, line_integral_error=lines, checks=checks)
    return [Verdict(1, "symbol identities", all(checks.values()),
                    f"max eigenvalue error {worst['eigen']:.1e}, line integrals {lines:.1e}", details)]


# ------------------------------------------------------- criterion 2

def suite_kernel_oracles(lab: Lab | None = None, seed: int = 0) -> list[Verdict]:
    out = [_kernel_oracle_verdict(seed)]
    out.append(_jump_relation_verdict())
    return out


def _kernel_oracle_verdict(seed: int) -> Verdict:
    rng = np.random.default_rng(seed)
    materials = [LameParams(1.0, 1.0), LameParams(0.0, 1.0), LameParams(2.0, 0.5)]
    fd_err = 0.0
    orders = []
    for p in materials:
        for _ in range(20):
            r = rng.normal(size=3)
            r /= np.linalg.norm(r)
            nu = rng.normal(size=3)
            nu /= np.linalg.norm(nu)
            T = traction(nu, r, p)
            fd_err = max(fd_err, np.abs(T - traction_fd(nu, r, p, 1e-5)).max() / np.abs(T).max())
            res = [np.abs(lame_operator_fd(1.5 * r, p, h)).max() for h in (0.02, 0.01, 0.005)]
            orders.append(math.log2(res[0] / res[1]))
            orders.append(math.log2(res[1] / res[2]))
    orders = np.array(orders)
    # leading antisymmetric part on the unit sphere
    p = LameParams(1.0, 1.0)
    dp = kelvin_constants(p).delta_prime
    hs = np.geomspace(0.1, 1e-3, 7)
    bounded, full = [], []
    for base in rng.normal(size=(5, 3)):
        y = base / np.linalg.norm(base)
        t = np.cross(y, rng.normal(size=3))
        t /= np.linalg.norm(t)
        for h in hs:
            x = math.cos(h) * y + math.sin(h) * t
            r = x - y
            A = np.outer(y, r) - np.outer(r, y)
            Tn = traction(y, r, p)
            D = Tn - p.mu * dp * A / (2 * np.linalg.norm(r) ** 3)
            bounded.append(np.abs(D).max() * np.linalg.norm(r))
            full.append(np.abs(Tn).max() * np.linalg.norm(r))
    bounded = np.array(bounded).reshape(5, -1)
    full = np.array(full).reshape(5, -1)
    growth = float((bounded[:, -1] / bounded[:, 0]).max())
    checks = {"traction_fd": fd_err <= 1e-6, "lame_residual_order": bool(np.all(np.abs(orders - 2) < 0.2)),
              "antisymmetric_leading_part": growth < 1.5 and bool(np.all(full[:, -1] > 10 * full[:, 0]))}
    details = {"traction_fd_rel_error": fd_err, "lame_order_min": float(orders.min()),
               "lame_order_max": float(orders.max()), "remainder_times_r_growth": growth, "checks": checks}
    return Verdict(2, "kernel oracles", all(checks.values()),
                   f"traction FD error {fd_err:.1e}, Lame residual order {orders.min():.2f}-{orders.max():.2f}, "
                   f"remainder*|r| growth {growth:.2f}", details)


# ------------------------------------------------------- criterion 3

def _test_density(y: np.ndarray) -> np.ndarray:
    return np.stack([1.0 + y[:, 0] * y[:, 1], y[:, 2] ** 2, np.sin(y[:, 0]) + y[:, 1]], 1)


def _frame(x0: np.ndarray) -> np.ndarray:
    e3 = x0 / np.linalg.norm(x0)
    a = np.array([1.0, 0, 0]) if abs(e3[0]) < 0.9 else np.array([0, 1.0, 0])
    e1 = np.cross(a, e3)
    e1 /= np.linalg.norm(e1)
    return np.stack([e1, np.cross(e3, e1), e3], 1)


def _graded_polar_rule(delta: float, nq: int, nphi: int):
    """Surface rule about the north pole graded towards a near-singularity of width ``delta``."""
    edges = [0.0]
    s = delta / 4
    while s < math.pi:
        edges.append(s)
        s *= 2
    edges.append(math.pi)
    x, w = leggauss(nq)
    ts, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        ts.append(0.5 * (b - a) * (x + 1) + a)
        ws.append(0.5 * (b - a) * w)
    t, wt = np.concatenate(ts), np.concatenate(ws)
    ph = 2 * math.pi * np.arange(nphi) / nphi
    T, P = np.meshgrid(t, ph, indexing="ij")
    pts = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], -1).reshape(-1, 3)
    return pts, ((wt * np.sin(t))[:, None] * np.full(nphi, 2 * math.pi / nphi)).ravel()


def _potential_traction(surface: Surface, x, nu, x0, density, params: LameParams, delta: float) -> np.ndarray:
    """``int -T_nu(x - y) phi(y) dS_y`` with a rule centred at ``x0``.

    At ``x = x0`` the even azimuthal rule takes the principal value.
    """
    pts, w = _graded_polar_rule(delta, 24, 128)
    y, _, J = surface.geometry_at(pts @ _frame(x0).T)
    T = -traction_array(np.broadcast_to(nu, y.shape), x - y, params.lam, params.mu)
    return np.einsum("qij,qj,q->i", T, density(y), w * J)


def jump_relation_errors(offsets=(0.1, 0.05, 0.025), params: LameParams = LameParams(1.0, 1.0),
                         targets=None) -> np.ndarray:
    """Relative error of the interior conormal trace against ``(-1/2 + K) phi``.

    Rows are offsets, columns boundary targets.
    """
    surface = make_sphere(1.0)
    if targets is None:
        targets = np.array([[0.3, 0.5, 0.8], [-0.7, 0.2, 0.1], [0.1, -0.4, -0.9]])
    targets = targets / np.linalg.norm(targets, axis=1, keepdims=True)
    errs = np.empty((len(offsets), len(targets)))
    for c, x0 in enumerate(targets):
        y0, nu0, _ = surface.geometry_at(x0[None])
        x0, nu0 = y0[0], nu0[0]
        trace = -0.5 * _test_density(x0[None])[0] + _potential_traction(surface, x0, nu0, x0, _test_density,
                                                                         params, 0.01)
        for r, d in enumerate(offsets):
            inner = x0 - d * nu0
            val = _potential_traction(surface, inner, nu0, x0, _test_density, params, d)
            errs[r, c] = np.linalg.norm(val - trace) / np.linalg.norm(trace)
    return errs


def _jump_relation_verdict() -> Verdict:
    offsets = (0.1, 0.05, 0.025)
    errs = jump_relation_errors(offsets).max(axis=1)
    monotone = bool(np.all(np.diff(errs) < 0))
    order = float(np.polyfit(np.log(offsets), np.log(errs), 1)[0])
    return Verdict(3, "jump relation", monotone,
                   "errors " + ", ".join(f"{e:.2e}" for e in errs) + f" (observed order {order:.2f})",
                   {"offsets": offsets, "errors": errs, "order": order, "monotone": monotone})


# ------------------------------------------------------- criterion 4

def suite_sphere_oracle(lab: Lab | None = None, seed: int = 0, j_max: int = 4) -> list[Verdict]:
    lab = lab or Lab()
    reports = {}
    for lm in ((1.0, 1.0), (2.0, 1.0)):
        sp = lab.spectrum("sphere", ORACLE_GRID, constant_field(*lm))
        reports[lm] = oracle.match_spectrum_to_oracle(sp, LameParams(*lm), j_max)
    main = reports[(1.0, 1.0)]
    values_ok = all(e.rel_error <= main.tolerance for e in main.entries)
    mult_bad = [(e.j, e.branch, e.multiplicity_observed, e.multiplicity_expected)
                for e in main.entries if not e.matched]
    other = reports[(2.0, 1.0)]
    indep = []
    for j in range(1, j_max + 1):
        a, b = main.entry(j, "lambda0"), other.entry(j, "lambda0")
        indep.append(abs(a.observed - b.observed) / a.oracle)
    indep_ok = max(indep) <= main.tolerance and all(other.entry(j, "lambda0").matched for j in range(1, j_max + 1))
    passed = values_ok and not mult_bad and indep_ok
    summary = (f"max rel error {main.max_rel_error:.1e}; multiplicity mismatches "
               + (", ".join(f"j={j} {b} {o}/{e}" for j, b, o, e in mult_bad) or "none")
               + f"; lambda0 material spread {max(indep):.1e}")
    details = {"grid": ORACLE_GRID, "match": main.to_dict(), "material_2_1": other.to_dict(),
               "lambda0_material_spread": indep, "values_within_tolerance": values_ok,
               "multiplicity_mismatches": mult_bad, "material_independent": indep_ok}
    return [Verdict(4, "sphere closed forms", passed, summary, details)]


# ---------------------------------------------------- criteria 5 to 8

def _ladder_labels(ladder) -> list[str]:
    return [f"{a}x{b}" for a, b in ladder]


def criterion5(lab: Lab, ladder=DEFAULT_LADDER, eps: float = 0.02) -> Verdict:
    field = constant_field(1.0, 1.0)
    pred = predict_essential_spectrum(field, [_sphere_sample()])
    spectra = lab.ladder("sphere", field, ladder=ladder)
    rep = spectral.detect_essential_spectrum(spectra, pred, eps, _ladder_labels(ladder))
    caps = [lv.capture for lv in rep.levels]
    # parity between the +-kappa0 targets
    fin = rep.levels[-1]
    k = kappa0(LameParams(1.0, 1.0))
    plus = fin.per_target[f"{k:.6g}"]
    minus = fin.per_target[f"{-k:.6g}"]
    summary = "capture " + ", ".join(f"{c:.3f}" for c in caps) + (
        f" (threshold {spectral.CAPTURE_THRESHOLD}, nondecreasing {rep.capture_nondecreasing})")
    return Verdict(5, "essential spectrum, constant coefficients", rep.passed, summary,
                   dict(rep.to_dict(), parity=abs(plus - minus)))


VARIABLE_FIELD = dict(lam_range=(1.0, 1.0), mu_range=(1.0, 2.0))


def _variable_prediction(field: LameField) -> EssSpecPrediction:
    return predict_essential_spectrum(field, [_sphere_sample()])


def criterion6(lab: Lab, ladder=DEFAULT_LADDER, eps: float = 0.02) -> Verdict:
    field = modulated_field(**VARIABLE_FIELD)
    pred = _variable_prediction(field)
    spectra = lab.ladder("sphere", field, ladder=ladder)
    rep = spectral.detect_essential_spectrum(spectra, pred, eps, _ladder_labels(ladder))
    covs = [lv.coverage for lv in rep.levels]
    passed = rep.coverage_nondecreasing and covs[-1] >= spectral.COVERAGE_THRESHOLD
    summary = "interval coverage " + ", ".join(f"{c:.3f}" for c in covs) + (
        f" (threshold {spectral.COVERAGE_THRESHOLD}, nondecreasing {rep.coverage_nondecreasing})")
    return Verdict(6, "essential spectrum, variable coefficients", passed, summary, rep.to_dict())


def criterion7(lab: Lab, ladder=DEFAULT_LADDER, eps: float = 0.02, tau: float = 1e-2) -> Verdict:
    table = ((1.0, 1.0), (1.0, 2.0))
    field = per_component_field(table)
    spheres = two_spheres(1.0, 4.0)
    pred = predict_essential_spectrum(field, [build_grid(s, 16, 32) for s in spheres])
    spectra = lab.ladder("two_spheres", field, ladder=ladder)
    rep = spectral.detect_essential_spectrum(spectra, pred, eps, _ladder_labels(ladder))
    roots = sorted({kappa0(LameParams(*p)) for p in table})
    sizes = [len(sp) for sp in spectra]
    p_counts = [int(np.count_nonzero(np.abs(spectral.polynomial_values(sp.values, roots)) > tau))
                for sp in spectra]
    k_counts = [int(np.count_nonzero(np.abs(sp.values) > tau)) for sp in spectra]
    p_exp = spectral.growth_exponent(sizes, p_counts)
    k_exp = spectral.growth_exponent(sizes, k_counts)
    fin = rep.levels[-1]
    counts_ok = all(_nondecreasing_counts(rep, name) for name in fin.target_counts)
    checks = {"five_points": len(pred.points) == 5 and not pred.intervals,
              "all_points_populated": fin.point_coverage == 1.0,
              "cluster_counts_nondecreasing": counts_ok,
              "polynomial_sublinear": p_exp < 0.5, "unmodified_linear": k_exp > 0.9}
    summary = (f"populated {fin.point_coverage:.2f} of 5 points, counts {fin.target_counts}; "
               f"p(K_c) count exponent {p_exp:.2f} vs K_c {k_exp:.2f}; capture {fin.capture:.3f}")
    details = dict(rep.to_dict(), sizes=sizes, polynomial_counts=p_counts, plain_counts=k_counts,
                   polynomial_exponent=p_exp, plain_exponent=k_exp, checks=checks)
    return Verdict(7, "multi-component piecewise constant", all(checks.values()), summary, details)


def _nondecreasing_counts(rep: spectral.ClusterReport, name: str) -> bool:
    seq = [lv.target_counts[name] for lv in rep.levels]
    return all(b >= a for a, b in zip(seq, seq[1:]))


def criterion8(lab: Lab, ladder=DEFAULT_LADDER, eps: float = 0.05, k_eps: float = 0.02) -> Verdict:
    field = modulated_field(**VARIABLE_FIELD)
    spectra = lab.ladder("sphere", field, MatrixKind.MODIFIED, ladder=ladder)
    unit = EssSpecPrediction((-1.0, 0.0, 1.0), ())
    rep = spectral.detect_essential_spectrum(spectra, unit, eps, _ladder_labels(ladder))
    fin = rep.levels[-1]
    k_rep = spectral.detect_essential_spectrum(lab.ladder("sphere", field, ladder=ladder),
                                               _variable_prediction(field), k_eps, _ladder_labels(ladder))
    k_cov = k_rep.levels[-1].coverage
    tips_grow = all(_nondecreasing_counts(rep, n) for n in ("1", "-1"))
    growth = {n: [lv.target_counts[n] for lv in rep.levels] for n in fin.target_counts}
    checks = {"all_points_populated": fin.point_coverage == 1.0, "tip_counts_nondecreasing": tips_grow,
              "tip_counts_grow": all(growth[n][-1] > growth[n][0] for n in ("1", "-1")),
              "unmodified_fills_intervals": k_cov >= spectral.COVERAGE_THRESHOLD}
    summary = (f"B~ populated {fin.point_coverage:.2f} of {{0,+-1}}, counts at +-1 "
               f"{growth['1']} / {growth['-1']}, capture {fin.capture:.3f}; K coverage {k_cov:.3f}")
    details = dict(rep.to_dict(), unmodified_coverage=k_cov, counts=growth, checks=checks,
                   imag_max=[sp.imag_max for sp in spectra])
    return Verdict(8, "modified NP operator", all(checks.values()), summary, details)


def suite_essential_spectrum(lab: Lab | None = None, seed: int = 0, ladder=DEFAULT_LADDER) -> list[Verdict]:
    lab = lab or Lab()
    # criterion 8 reuses the variable-coefficient NP matrices of criterion 6 while they are held
    c5, c6 = criterion5(lab, ladder), criterion6(lab, ladder)
    c8 = criterion8(lab, ladder)
    return [c5, c6, criterion7(lab, ladder), c8]


# ------------------------------------------------------- criterion 9

def suite_decay(lab: Lab | None = None, seed: int = 0) -> list[Verdict]:
    lab = lab or Lab()
    field = constant_field(1.0, 1.0)
    vals, frac = lab.fractions("sphere", DECAY_GRID, field)
    fit = spectral.decay_fit(vals, 0.0, "above", (5, 40), mask=frac < TANGENTIAL_FRACTION)
    fit_ok = abs(fit.exponent + 0.5) <= 0.1
    # synthetic exact laws
    rng = np.random.default_rng(seed)
    j = np.arange(1, 201)
    power = spectral.decay_fit(rng.permutation(j ** -0.5), 0.0, "above")
    k = 1 / 6
    expo = spectral.decay_fit(k - np.exp(-0.3 * j[:60]), k, "below", mode="exponential")
    synth_ok = abs(power.exponent + 0.5) <= 1e-6 and abs(expo.rate - 0.3) <= 1e-3
    b1 = spectral.predicted_decay_exponent("essential_point_constant")
    b2 = spectral.predicted_decay_exponent("nondegenerate_min")
    b3 = spectral.predicted_decay_exponent("flat_min", 2)
    bounds_ok = (b1.exponent == -0.5 and b2.exponent == -1.0 and b2.admits(1.01) and not b2.admits(1.0)
                 and abs(b3.tau_min - 1.5) < 1e-15 and abs(b3.exponent + 2 / 3) < 1e-15)
    try:
        spectral.predicted_decay_exponent("flat_min", 1)
        bounds_ok = False
    except ValueError:
        pass
    checks = {"sphere_fit": fit_ok, "synthetic_laws": synth_ok, "predicted_bounds": bounds_ok}
    summary = (f"sphere tip 0 exponent {fit.exponent:.3f} (target -0.5 +- 0.1, residual {fit.residual:.3f}); "
               f"synthetic power {power.exponent:.7f}, exponential {expo.rate:.5f}")
    details = {"fit": fit.to_dict(), "grid": DECAY_GRID, "power": power.to_dict(), "exponential": expo.to_dict(),
               "bounds": [b.__dict__ for b in (b1, b2, b3)], "checks": checks}
    return [Verdict(9, "decay rates", all(checks.values()), summary, details)]


# ------------------------------------------------------ criterion 10

def suite_planar(lab: Lab | None = None, seed: int = 0, n: int = 512) -> list[Verdict]:
    p = LameParams(1.0, 1.0)
    k = kappa0(p)
    eps = 0.02
    outside, at_zero = [], []
    for m in (n // 2, n):
        v = spectral.eigenvalues(planar.assemble_np_2d(planar.make_ellipse(1.0, 1.0, m), p)).values
        far = np.minimum(np.abs(v - k), np.abs(v + k)) > eps
        outside.append(int(far.sum()))
        at_zero.append(int(np.count_nonzero(np.abs(v) <= eps)))
    circle_ok = outside[1] <= outside[0] and at_zero[1] <= at_zero[0] and outside[1] <= 0.05 * 2 * n
    sp = spectral.eigenvalues(planar.assemble_np_2d(planar.make_ellipse(2.0, 1.0, n), p))
    plus = planar.decay_fit_2d(sp, k)
    minus = planar.decay_fit_2d(sp, -k)
    ratio = minus.rate / plus.rate
    checks = {"circle_two_points": circle_ok, "positive_rates": plus.rate > 0 and minus.rate > 0,
              "rate_ratio": abs(ratio - 2.0) <= 0.5}
    summary = (f"circle: {outside[1]} of {2 * n} eigenvalues away from +-1/6; ellipse rates "
               f"+k0 {plus.rate:.3f}, -k0 {minus.rate:.3f}, ratio {ratio:.2f}")
    details = {"circle_outside": outside, "circle_near_zero": at_zero, "plus": plus.to_dict(),
               "minus": minus.to_dict(), "ratio": ratio, "reference_rate": math.log(3.0) / 2, "checks": checks}
    return [Verdict(10, "planar suite", all(checks.values()), summary, details)]


# ------------------------------------------------------ criterion 11

def suite_persistence(lab: Lab | None = None, seed: int = 0, size=(12, 24)) -> list[Verdict]:
    field = modulated_field(**VARIABLE_FIELD)
    grid = build_grid(make_sphere(1.0), *size)
    runs = [assembly.assemble_np(grid, field, workers=w).data for w in (1, 2, 3)]
    srun = [assembly.assemble_single_layer(grid, field, workers=w).data for w in (1, 3)]
    identical = all(np.array_equal(runs[0], r) for r in runs[1:]) and np.array_equal(*srun)
    K = assembly.assemble_np(grid, field)
    errors = {}
    with tempfile.TemporaryDirectory() as tmp:
        path = assembly.cache_store(K, Path(tmp) / "k.npsm")
        back = assembly.cache_load(path, K.build_hash)
        roundtrip = back.data.tobytes() == K.data.tobytes() and back.kind is K.kind
        raw = path.read_bytes()
        cases = {
            "flipped_payload_byte": raw[:100] + bytes([raw[100] ^ 0x01]) + raw[101:],
            "truncated": raw[:-20],
            "version_bump": raw[:4] + struct.pack("<I", assembly.CACHE_VERSION + 1) + raw[8:],
            "bad_magic": b"XXXX" + raw[4:],
        }
        for name, blob in cases.items():
            bad = Path(tmp) / f"{name}.npsm"
            bad.write_bytes(blob)
            try:
                assembly.cache_load(bad)
                errors[name] = None
            except assembly.CacheError as exc:
                errors[name] = str(exc)
        try:
            assembly.cache_load(path, K.build_hash ^ 1)
            errors["hash_mismatch"] = None
        except assembly.CacheError as exc:
            errors["hash_mismatch"] = str(exc)
    rejected = all(v is not None for v in errors.values())
    version_named = errors["version_bump"] is not None and "version" in errors["version_bump"]
    checks = {"workers_bit_identical": identical, "cache_roundtrip": roundtrip,
              "corruption_rejected": rejected, "version_error_explicit": version_named}
    return [Verdict(11, "determinism and persistence", all(checks.values()),
                    f"workers 1/2/3 identical {identical}, round trip {roundtrip}, "
                    f"{sum(v is not None for v in errors.values())}/{len(errors)} corruptions rejected",
                    {"checks": checks, "errors": errors})]


SUITES: dict[str, Callable[..., list[Verdict]]] = {
    "symbol_identities": suite_symbol_identities,
    "kernel_oracles": suite_kernel_oracles,
    "sphere_oracle": suite_sphere_oracle,
    "essential_spectrum": suite_essential_spectrum,
    "decay": suite_decay,
    "planar": suite_planar,
    "persistence": suite_persistence,
}


def run_suite(name: str, lab: Lab | None = None, seed: int = 0) -> list[Verdict]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name](lab, seed=seed)
