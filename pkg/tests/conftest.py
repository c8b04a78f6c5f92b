"""Shared pytest wiring: the acceptance suite reports one line per criterion."""

ACCEPTANCE_LINES = []


def record_criterion(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance: end-to-end desk-scale checks (slow)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
