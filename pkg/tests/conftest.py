import sys

from hypothesis import strategies as st

from needful.terms import Abs, App, ESub, Var

sys.setrecursionlimit(20_000)


def terms(es=True, max_leaves=10):
    """Random De Bruijn terms; indices past the binders are free variables."""
    steps = [lambda inner: st.builds(App, inner, inner),
             lambda inner: st.builds(Abs, inner)]
    if es:
        steps.append(lambda inner: st.builds(ESub, inner, inner))
    return st.recursive(
        st.integers(0, 2).map(Var),
        lambda inner: st.one_of([f(inner) for f in steps]),
        max_leaves=max_leaves,
    )


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    outcome = {}
    for kind in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(kind, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid:
                continue
            n = int(nodeid.split("test_criterion_")[1].split("_")[0])
            outcome[n] = outcome.get(n, True) and kind == "passed"
    if not outcome:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(outcome):
        terminalreporter.write_line(f"{'PASS' if outcome[n] else 'FAIL'} criterion {n}")
