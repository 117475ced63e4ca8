"""Acceptance criteria 1-11, one verdict line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
are produced, or ``python tests/test_acceptance.py`` for the lines alone.
Tolerances live in the suites of :mod:`npspect.verify`.
"""

import sys

import pytest

from npspect import verify

SUITE_OF = {
    1: "symbol_identities",
    2: "kernel_oracles",
    3: "kernel_oracles",
    4: "sphere_oracle",
    5: "essential_spectrum",
    6: "essential_spectrum",
    7: "essential_spectrum",
    8: "essential_spectrum",
    9: "decay",
    10: "planar",
    11: "persistence",
}

VERDICT_LINES = []


@pytest.fixture(scope="session")
def verdicts(lab):
    done = {}

    def get(criterion):
        suite = SUITE_OF[criterion]
        if suite not in done:
            done[suite] = {v.criterion: v for v in verify.run_suite(suite, lab)}
        return done[suite][criterion]
    return get


@pytest.mark.slow
@pytest.mark.parametrize("criterion", sorted(SUITE_OF))
def test_acceptance(criterion, verdicts):
    v = verdicts(criterion)
    line = v.line()
    VERDICT_LINES.append(line)
    print(line)
    assert v.passed, line


if __name__ == "__main__":
    lab = verify.Lab()
    ok = True
    for name in dict.fromkeys(SUITE_OF.values()):
        for v in verify.run_suite(name, lab):
            print(v.line(), flush=True)
            ok &= v.passed
    sys.exit(0 if ok else 1)
