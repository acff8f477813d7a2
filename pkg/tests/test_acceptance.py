"""The acceptance table, one test per criterion at its stated tolerance."""

import pytest

from conftest import ACCEPTANCE_LINES
from fractal_forms import verify


@pytest.mark.parametrize("criterion", verify.CRITERIA, ids=lambda f: f.__name__)
def test_criterion(criterion):
    check = criterion()
    print(check.line())
    ACCEPTANCE_LINES.append(check.line())
    assert check.passed, check.line()
