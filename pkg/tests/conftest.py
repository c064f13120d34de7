import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from esola.synthetic import speech_like, two_rate_proxy, voiced_proxy, white_noise

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

FS = 16000
N = 320  # frame length at 16 kHz, 20 ms
SS = 160
ALPHAS = (0.5, 0.75, 1.25, 1.5, 2.0)
# tracker band wide enough for half and double of 120 Hz
WIDE_TRACKER = dict(f0_min=45.0, frame_ms=50.0)


@pytest.fixture(scope="session")
def proxy120():
    return voiced_proxy(120.0, 2.0, FS)


@pytest.fixture(scope="session")
def proxy8ms():
    return voiced_proxy(125.0, 2.0, FS)


@pytest.fixture(scope="session")
def two_rate():
    return two_rate_proxy(5.0, 10.0, sample_rate=FS)


@pytest.fixture(scope="session")
def speech():
    return speech_like(3.5, FS)


@pytest.fixture(scope="session")
def noise():
    return white_noise(2.0, FS, seed=1)


# acceptance criteria report: tests append (label, ok, detail); printed after the run
ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    def record(label, ok, detail=""):
        status = "N/A " if ok is None else ("PASS" if ok else "FAIL")
        ACCEPTANCE_LINES.append(f"{status}  {label}: {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
