"""One line per acceptance criterion, at the stated tolerances."""

import pytest

from nbein.verify import CRITERIA


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    crit = CRITERIA[number]()
    with capsys.disabled():
        print(f"\n{crit.line()}")
    failed = [c.line() for c in crit.checks if not c.passed]
    assert crit.passed, "\n".join(failed)
