import pytest

# criterion number -> [title, outcomes, details]
_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    rep = (yield).get_result()
    m = item.get_closest_marker("criterion")
    if m is None or (rep.when != "call" and not rep.failed and not rep.skipped):
        return
    n, title = m.args
    entry = _criteria.setdefault(n, [title, [], []])
    entry[1].append(rep.outcome)
    if rep.when == "call":
        entry[2].extend(v for k, v in item.user_properties if k == "detail")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_criteria):
        title, outcomes, details = _criteria[n]
        if "failed" in outcomes:
            verdict = "FAIL"
        elif "passed" in outcomes:
            verdict = "PASS"
        else:
            verdict = "SKIP"
        extra = f" ({'; '.join(details)})" if details else ""
        terminalreporter.write_line(f"criterion {n}: {verdict} - {title}{extra}")
