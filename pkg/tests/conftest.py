import numpy as np
import pytest

from mcsa_decim.signal_model import FaultSignalConfig, MotorParams, synthesize_fault_current

# Filled by tests/test_acceptance.py, printed once at the end of the run.
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, line = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {line}")


@pytest.fixture(scope="session")
def default_motor():
    return MotorParams()


@pytest.fixture(scope="session")
def default_signal():
    """Full-size default record: 5120 Hz, 102.4 s, m=0.02, noise 0.005."""
    return synthesize_fault_current(FaultSignalConfig())


@pytest.fixture(scope="session")
def noiseless_signal():
    return synthesize_fault_current(FaultSignalConfig(noise_std=0.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
