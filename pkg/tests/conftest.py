import pytest

# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = {}


@pytest.fixture
def report(request):
    """Record the verdict of an acceptance criterion: ``report(n, ok, detail)``."""
    seen = []

    def record(n, ok, detail):
        seen.append(n)
        ACCEPTANCE_LINES[n] = "%s criterion %2d: %s" % ("PASS" if ok else "FAIL", n, detail)

    yield record
    rep = getattr(request.node, "rep_call", None)
    if rep is not None and rep.failed and not seen:
        n = request.node.get_closest_marker("criterion").args[0]
        ACCEPTANCE_LINES[n] = "FAIL criterion %2d: %s" % (n, rep.longrepr.reprcrash.message
                                                          if hasattr(rep.longrepr, "reprcrash")
                                                          else "error")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
