import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def report(request):
    """Attach a one-line detail string to the current acceptance test."""
    details = []
    request.node.acceptance_details = details
    return details.append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    label = getattr(item.function, "criterion", None)
    if label is None or rep.when != "call":
        return
    details = "; ".join(getattr(item, "acceptance_details", []))
    status = "PASS" if rep.passed else "FAIL"
    ACCEPTANCE_LINES.append(f"{status}  {label}  [{rep.duration:.1f}s] {details}".rstrip())


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
