"""Shared pytest plumbing: the acceptance-criteria verdict summary."""

_VERDICTS = []


def record_criterion(label, passed, details=""):
    """Register one acceptance verdict for the terminal summary."""
    line = "criterion %s: %s%s" % (label, "PASS" if passed else "FAIL",
                                   " — " + details if details else "")
    _VERDICTS.append(line)
    return passed


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _VERDICTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for line in _VERDICTS:
        terminalreporter.write_line(line)
