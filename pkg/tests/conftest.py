"""Per-criterion PASS/FAIL summary for the acceptance suite."""

from collections import defaultdict

CRITERIA = {
    1: "Lyapunov exponent vanishes at critical energies",
    2: "Lyapunov exponent positive off the critical set",
    3: "transfer-matrix exactness",
    4: "massless dynamical delocalization",
    5: "dynamical localization contrast",
    6: "mass-perturbation bound",
    7: "nonrelativistic limit",
    8: "zitterbewegung",
    9: "exponentially localized eigenfunctions",
    10: "numerical hygiene",
}

_criterion_of = {}
_outcomes = defaultdict(list)
_measured = defaultdict(list)


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            _criterion_of[item.nodeid] = mark.args[0]


def pytest_runtest_logreport(report):
    n = _criterion_of.get(report.nodeid)
    if n is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes[n].append((report.nodeid.split("::")[-1], report.outcome))
        _measured[n] += [f"{k}={v}" for k, v in report.user_properties]


def pytest_terminal_summary(terminalreporter):
    if not _criterion_of:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    wanted = sorted(set(_criterion_of.values()))
    for n in wanted:
        results = _outcomes.get(n, [])
        if not results:
            status = "NOT RUN"
        elif all(o == "passed" for _, o in results):
            status = "PASS"
        else:
            status = "FAIL"
        ok = sum(o == "passed" for _, o in results)
        tr.write_line(f"criterion {n:2d} {status:7s} {CRITERIA[n]} ({ok}/{len(results)} checks)")
        for name, outcome in results:
            if outcome != "passed":
                tr.write_line(f"    failed: {name}")
        if _measured[n]:
            tr.write_line("    " + "; ".join(_measured[n]))
