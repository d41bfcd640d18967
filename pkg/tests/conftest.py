"""Per-criterion summary for tests marked ``@pytest.mark.acceptance("ACn", "title")``."""

_outcomes: dict[str, list] = {}


def pytest_runtest_setup(item):
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        item.user_properties.append(("acceptance", marker.args))


def pytest_runtest_logreport(report):
    for key, args in report.user_properties:
        if key != "acceptance":
            continue
        entry = _outcomes.setdefault(args[0], [args[1] if len(args) > 1 else "", True, 0])
        if report.when == "call":
            entry[2] += 1
        if report.failed or (report.when == "setup" and report.skipped):
            entry[1] = False


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_outcomes, key=lambda k: int(k[2:])):
        title, ok, n = _outcomes[key]
        terminalreporter.write_line("%s %s  %s (%d tests)" % ("PASS" if ok else "FAIL", key, title, n))
