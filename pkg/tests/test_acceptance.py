"""One pass/fail line per acceptance criterion."""
import pytest

from holderlab.suite import CHECKS, run_check


@pytest.mark.parametrize("check", CHECKS, ids=[c.__name__ for c in CHECKS])
def test_criterion(check, capsys):
    res = run_check(check)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()
