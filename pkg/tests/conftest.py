import time

import pytest

from qshhg.runner.figures import figure_config
from qshhg.runner.pipeline import compute_band_photons

# criterion number -> (passed, one-line detail); filled by test_acceptance
ACCEPTANCE = {}


def _timed(fid):
    t0 = time.perf_counter()
    res = compute_band_photons(figure_config(fid))
    return res, time.perf_counter() - t0


@pytest.fixture(scope="session")
def zno_bands():
    """Full-resolution ZnO band photons at the working point and the seconds it took."""
    return _timed("fig1b")


@pytest.fixture(scope="session")
def hydrogen_bands():
    return _timed("fig1d")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
