"""One test per acceptance criterion; each prints its PASS/FAIL line with the measured values."""
import pytest

from fracks.acceptance import CHECKS


@pytest.mark.slow
@pytest.mark.parametrize("name", list(CHECKS))
def test_criterion(name, acceptance_log):
    result = CHECKS[name]()
    line = result.line()
    acceptance_log.append(line)
    print(line)
    assert result.passed, line
