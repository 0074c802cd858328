"""Acceptance gate: one printed pass/fail line per numbered criterion."""

import pytest

CRITERIA = {
    1: "exactly-n reproduction",
    2: "critical amplitude",
    3: "two-square curves",
    4: "convexity",
    5: "circle degeneracy",
    6: "oracle equivalence",
    7: "numerical hygiene",
    8: "locus identities",
}


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=[f"{k}-{v.replace(' ', '-')}" for k, v in sorted(CRITERIA.items())])
def test_criterion(number, suite, capsys):
    result = getattr(suite, f"criterion_{number}")()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.name == CRITERIA[number]
    assert result.passed, result.observed
