import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not getattr(mod, "SUMMARY", None):
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.SUMMARY):
        terminalreporter.write_line(mod.SUMMARY[num])
