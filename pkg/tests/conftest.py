"""Shared pytest plumbing: collects the acceptance criteria PASS/FAIL lines
and prints them as a summary section at the end of the run."""

CRITERION_LINES = []


def record_criterion(line: str):
    CRITERION_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)
