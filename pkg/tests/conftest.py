import _report


def pytest_terminal_summary(terminalreporter):
    if _report.LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in _report.LINES:
            terminalreporter.write_line(line)
