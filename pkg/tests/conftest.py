"""Shared test configuration.

The acceptance tests register one outcome per criterion; a terminal
summary hook prints a single pass/fail line for each so the full gate is
readable at a glance.
"""

acceptance_results: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    acceptance_results[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(acceptance_results):
        passed, detail = acceptance_results[number]
        word = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {word} - {detail}")
