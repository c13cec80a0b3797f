import pytest

from hapnet.config import NetworkConfig

# criterion number -> (passed, description); filled by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture
def cfg():
    return NetworkConfig()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        passed, text = ACCEPTANCE[num]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {num}: {text}")
