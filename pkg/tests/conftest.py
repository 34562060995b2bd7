import pytest

_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when not in ("setup", "call"):
        return
    label = marker.args[0]
    if rep.failed or rep.when == "call":
        _results[label] = _results.get(label, True) and rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_results, key=lambda s: (int(s.split()[0].rstrip("abc")), s)):
        terminalreporter.write_line(f"ACCEPTANCE {label}: {'PASS' if _results[label] else 'FAIL'}")
