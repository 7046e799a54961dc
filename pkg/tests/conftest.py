"""Per-criterion PASS/FAIL summary for the acceptance suite."""

import collections

_RESULTS = collections.defaultdict(list)
_CRITERION = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    n = _CRITERION.get(report.nodeid)
    if n is not None and (report.when == "call" or report.failed):
        _RESULTS[n].append(report.passed)


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _CRITERION[item.nodeid] = m.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        ok = all(_RESULTS[n])
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}"
                                    f" ({sum(_RESULTS[n])}/{len(_RESULTS[n])} checks)")
