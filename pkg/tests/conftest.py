"""Shared test plumbing: the acceptance-criterion registry and its
end-of-run summary printout (one line per criterion)."""

ACCEPTANCE_RESULTS = []


def record_criterion(num: int, title: str, passed: bool, detail: str) -> None:
    """Register a criterion outcome for the terminal summary, then assert it."""
    ACCEPTANCE_RESULTS.append((num, title, passed, detail))
    assert passed, f"criterion {num} ({title}): {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(
            f"[{status}] criterion {num:2d} - {title}: {detail}")
