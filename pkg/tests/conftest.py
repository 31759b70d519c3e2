import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for name in sorted(mod.RESULTS):
            terminalreporter.write_line(mod.RESULTS[name])
