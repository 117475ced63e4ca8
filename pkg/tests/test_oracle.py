from fractions import Fraction

import numpy as np
import pytest

from npspect.material import LameParams, kappa0
from npspect.oracle import (branch_limit, export_oracle_csv, match_spectrum_to_oracle, oracle_table,
                            sphere_cluster_sum, sphere_eigenvalues)

UNIT = LameParams(1, 1)


def test_closed_form_examples():
    t = sphere_eigenvalues(1, UNIT)
    assert (t.lambda0, t.lambdaPlus, t.lambdaMinus) == pytest.approx((0.5, 0.5, -1 / 18), rel=1e-15)
    t = sphere_eigenvalues(2, UNIT)
    assert (t.lambda0, t.lambdaPlus, t.lambdaMinus) == pytest.approx((0.3, 1 / 90, 1 / 6), rel=1e-14)
    t = sphere_eigenvalues(3, UNIT)
    assert t.lambda0 == pytest.approx(3 / 14) and t.lambdaMinus == pytest.approx(13 / 70)
    assert t.multiplicity == 7
    with pytest.raises(ValueError):
        sphere_eigenvalues(0, UNIT)


def test_cluster_sum_exact():
    assert all(sphere_cluster_sum(j) == 1.5 for j in range(1, 101))
    assert all((2 * j + 1) * Fraction(3, 2 * (2 * j + 1)) == Fraction(3, 2) for j in range(1, 101))


@pytest.mark.parametrize("p", [UNIT, LameParams(2, 1), LameParams(0, 3)])
def test_branch_limits(p):
    k = kappa0(p)
    for j in (10, 1000, 10**6):
        t = sphere_eigenvalues(j, p)
        assert abs(t.lambdaMinus - k) <= 5.0 / j and abs(t.lambdaPlus + k) <= 5.0 / j
    assert branch_limit("lambdaMinus", p) == k and branch_limit("lambdaPlus", p) == -k
    assert sphere_eigenvalues(5, p).lambda0 == sphere_eigenvalues(5, UNIT).lambda0


def _synthetic(p, j_max, drop=None):
    vals = []
    for t in oracle_table(j_max, p):
        for name in ("lambda0", "lambdaPlus", "lambdaMinus"):
            m = t.multiplicity - (1 if (t.j, name) == drop else 0)
            vals += [t.branch(name) * (1 + 1e-3)] * m
    return np.array(vals)


def test_matcher_on_exact_values():
    rep = match_spectrum_to_oracle(_synthetic(UNIT, 4), UNIT, 4)
    assert rep.all_matched and rep.max_rel_error == pytest.approx(1e-3, rel=1e-6)
    # coinciding oracle values at kappa0 claim disjoint eigenvalue sets
    assert rep.entry(2, "lambdaMinus").multiplicity_observed == 5


def test_matcher_reports_missing_multiplicity():
    rep = match_spectrum_to_oracle(_synthetic(UNIT, 3, drop=(3, "lambda0")), UNIT, 3)
    assert rep.unmatched == [(3, "lambda0")]
    assert rep.entry(3, "lambda0").multiplicity_observed == 6
    with pytest.raises(ValueError):
        match_spectrum_to_oracle([0.1], UNIT, 0)


def test_export_csv(tmp_path):
    path = tmp_path / "oracle.csv"
    export_oracle_csv(path, 3, UNIT)
    rows = path.read_text().splitlines()
    assert rows[0].startswith("j,multiplicity") and len(rows) == 4
