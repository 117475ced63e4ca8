"""Closed-form NP eigenvalues of the sphere and a matcher for computed spectra.

For a sphere and constant moduli every degree ``j >= 1`` contributes three
eigenvalues, each of multiplicity ``2j + 1``::

    lambda0 = 3 / (2 (2j + 1))
    lambdaPlus = (3 lam - 2 mu (2j^2 - 2j - 3)) / (2 (lam + 2 mu) (4j^2 - 1))
    lambdaMinus = (-3 lam + 2 mu (2j^2 + 2j - 3)) / (2 (lam + 2 mu) (4j^2 - 1))

``lambdaPlus`` accumulates at ``-kappa0`` and ``lambdaMinus`` at ``+kappa0``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .material import LameParams, kappa0

__all__ = [
    "SphereEigenTriple",
    "BranchMatch",
    "OracleMatch",
    "sphere_eigenvalues",
    "sphere_cluster_sum",
    "branch_limit",
    "oracle_table",
    "match_spectrum_to_oracle",
    "export_oracle_csv",
    "MATCH_TOLERANCE",
]

MATCH_TOLERANCE = 0.05
BRANCHES = ("lambda0", "lambdaPlus", "lambdaMinus")


@dataclass(frozen=True)
class SphereEigenTriple:
    j: int
    lambda0: float
    lambdaPlus: float
    lambdaMinus: float

    @property
    def multiplicity(self) -> int:
        return 2 * self.j + 1

    def branch(self, name: str) -> float:
        return getattr(self, name)


def sphere_eigenvalues(j: int, params: LameParams) -> SphereEigenTriple:
    if int(j) != j or j < 1:
        raise ValueError(f"degree must be a positive integer, got {j}")
    kappa0(params)  # validates
    lam, mu = params.lam, params.mu
    den = 2.0 * (lam + 2.0 * mu) * (4.0 * j * j - 1.0)
    return SphereEigenTriple(
        int(j),
        3.0 / (2.0 * (2 * j + 1)),
        (3.0 * lam - 2.0 * mu * (2.0 * j * j - 2.0 * j - 3.0)) / den,
        (-3.0 * lam + 2.0 * mu * (2.0 * j * j + 2.0 * j - 3.0)) / den,
    )


def sphere_cluster_sum(j: int) -> float:
    """``(2j + 1) lambda0_j``, computed in exact arithmetic."""
    if int(j) != j or j < 1:
        raise ValueError(f"degree must be a positive integer, got {j}")
    return float((2 * j + 1) * Fraction(3, 2 * (2 * j + 1)))


def branch_limit(branch: str, params: LameParams) -> float:
    """Accumulation point of a branch as ``j -> infinity``."""
    k = kappa0(params)
    return {"lambda0": 0.0, "lambdaPlus": -k, "lambdaMinus": k}[branch]


def oracle_table(j_max: int, params: LameParams) -> list[SphereEigenTriple]:
    return [sphere_eigenvalues(j, params) for j in range(1, j_max + 1)]


@dataclass(frozen=True)
class BranchMatch:
    j: int
    branch: str
    oracle: float
    observed: float
    rel_error: float
    multiplicity_expected: int
    multiplicity_observed: int

    @property
    def matched(self) -> bool:
        return self.multiplicity_observed == self.multiplicity_expected

    def to_dict(self) -> dict:
        return {"j": self.j, "branch": self.branch, "oracle": self.oracle, "observed": self.observed,
                "rel_error": self.rel_error, "multiplicity_expected": self.multiplicity_expected,
                "multiplicity_observed": self.multiplicity_observed}


@dataclass
class OracleMatch:
    entries: list[BranchMatch]
    tolerance: float
    unmatched: list[tuple[int, str]]

    @property
    def all_matched(self) -> bool:
        return not self.unmatched

    @property
    def max_rel_error(self) -> float:
        return max(e.rel_error for e in self.entries)

    def entry(self, j: int, branch: str) -> BranchMatch:
        for e in self.entries:
            if e.j == j and e.branch == branch:
                return e
        raise KeyError((j, branch))

    def to_dict(self) -> dict:
        return {"tolerance": self.tolerance, "all_matched": self.all_matched,
                "entries": [e.to_dict() for e in self.entries],
                "unmatched": [list(u) for u in self.unmatched]}


def match_spectrum_to_oracle(spectrum, params: LameParams, j_max: int,
                             tolerance: float = MATCH_TOLERANCE) -> OracleMatch:
    """Greedy assignment of computed eigenvalues to the oracle values.

    Oracle entries are visited by increasing ``j``; each claims up to ``2j+1``
    of the nearest unclaimed eigenvalues lying within ``tolerance``
    (relative).  The number claimed is the observed multiplicity.  Coinciding
    oracle values, such as values equal to ``kappa0``, claim disjoint sets.
    """
    if j_max < 1:
        raise ValueError("j_max must be at least 1")
    values = np.asarray(getattr(spectrum, "values", spectrum), dtype=float)
    free = np.ones(len(values), dtype=bool)
    entries, unmatched = [], []
    for triple in oracle_table(j_max, params):
        for name in BRANCHES:
            target = triple.branch(name)
            m = triple.multiplicity
            idx = np.flatnonzero(free)
            rel = np.abs(values[idx] - target) / abs(target)
            order = np.argsort(rel, kind="stable")
            take = order[:m][rel[order[:m]] <= tolerance]
            if len(take):
                observed = float(values[idx[take]].mean())
                err = float(rel[take].max())
            else:
                observed = float(values[idx[order[0]]]) if len(order) else float("nan")
                err = float(rel[order[0]]) if len(order) else float("inf")
            free[idx[take]] = False
            entries.append(BranchMatch(triple.j, name, target, observed, err, m, len(take)))
            if len(take) != m:
                unmatched.append((triple.j, name))
    return OracleMatch(entries, tolerance, unmatched)


def export_oracle_csv(path, j_max: int, params: LameParams) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "multiplicity", "lambda0", "lambdaPlus", "lambdaMinus"])
        for t in oracle_table(j_max, params):
            w.writerow([t.j, t.multiplicity, repr(t.lambda0), repr(t.lambdaPlus), repr(t.lambdaMinus)])
