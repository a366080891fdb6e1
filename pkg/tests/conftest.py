import pytest

_RESULTS = []


@pytest.fixture
def criterion(request):
    """Record a named acceptance criterion; its outcome is printed in the terminal summary."""
    names = []

    def declare(name):
        names.append(name)

    yield declare
    rep = getattr(request.node, "rep_call", None)
    passed = rep is not None and rep.passed
    for name in names:
        _RESULTS.append((name, passed))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed in _RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}")
