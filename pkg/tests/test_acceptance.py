"""Acceptance suite: every criterion at its stated tolerance, one pass/fail
line per criterion (printed through the shared acceptance module)."""

import pytest

from gwp1 import acceptance


@pytest.mark.parametrize("criterion", acceptance.ALL_CRITERIA,
                         ids=[fn.__name__ for fn in acceptance.ALL_CRITERIA])
def test_criterion(criterion):
    result = criterion()
    print(result.line())
    failing = [name for name, ok in result.checks if not ok]
    assert result.passed, f"{result.name}: {result.detail or failing}"


def test_quick_tier_under_thirty_seconds():
    import time

    t0 = time.time()
    results = acceptance.quick_checks()
    elapsed = time.time() - t0
    for r in results:
        print(r.line())
    assert all(r.passed for r in results)
    assert elapsed < 30
