"""One test per acceptance criterion; each prints a single PASS/FAIL line.

The lines are also collected into the pytest terminal summary, so a plain
``pytest`` run lists them; ``oneshot paper-suite`` runs the same checks.
"""

import pytest

from oneshot.suite import CRITERIA


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, record_property):
    fn = CRITERIA[number]
    res = fn(seed=0) if number in (1, 3, 6) else fn()
    record_property("acceptance", res.line())
    print()
    print(res.line())
    for name, ok, detail in res.checks:
        print(f"    [{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert res.passed, res.line()
