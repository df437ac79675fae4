import numpy as np
import pytest

from pathloss.data import SurveyDataset
from pathloss.models import fspl_db

F28 = 28e9

_ACCEPTANCE = []


def make_dataset(L, P, frequency_hz=F28, d0_m=1.0, polarization="VV", scenario="LOS", powers=None):
    """Build a dataset whose anchored terms are exactly (L, P): d = d0 10**(L/10)."""
    L = np.asarray(L, dtype=float)
    d = d0_m * 10.0 ** (L / 10.0)
    pl = np.asarray(P, dtype=float) + fspl_db(frequency_hz, d0_m)
    return SurveyDataset(d, pl, frequency_hz, polarization, scenario, powers, d0_m=d0_m)


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def record(criterion, passed, detail):
        _ACCEPTANCE.append((criterion, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}")
