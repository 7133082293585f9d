import pytest

from qfriction import ModelParams

# one PASS/FAIL line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES = {}


def record(criterion, ok, detail):
    ACCEPTANCE_LINES[criterion] = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[criterion])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def caption_params():
    """Particle at w = 0.03 next to a plate at O = 0.01, a = 1 um."""
    return ModelParams(w_tilde=0.03, o_tilde=0.01, a=1e-6)
