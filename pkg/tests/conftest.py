import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from uclab.rng import stream

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return stream(12345)


def three_sigma(p: float, n: int) -> float:
    return 3 * np.sqrt(p * (1 - p) / n)


# acceptance criterion id -> list of (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE.setdefault(criterion, []).append((bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[c]
        status = "PASS" if all(p for p, _ in parts) else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {c}: " + "; ".join(d for _, d in parts))
