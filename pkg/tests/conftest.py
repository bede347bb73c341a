"""Shared pytest hooks: a one-line pass/fail digest for the acceptance suite."""

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _ACCEPTANCE[name] = report.outcome
    elif report.when == "setup" and report.outcome != "passed":
        _ACCEPTANCE[name] = report.outcome  # errors and skips surface too


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        outcome = _ACCEPTANCE[name]
        tag = "PASS" if outcome == "passed" else outcome.upper()
        label = name.removeprefix("test_")
        number, _, rest = label.partition("_")
        terminalreporter.write_line(
            f"[{tag}] {number.upper()} {rest.replace('_', ' ')}")
