"""Shared pytest hooks: prints the acceptance-criteria summary table."""

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.CRITERIA):
        name = module.CRITERIA[number]
        if number in module.RESULTS:
            _, ok, detail = module.RESULTS[number]
            status = "PASS" if ok else "FAIL"
        else:
            status, detail = "NOT RUN", ""
        suffix = f" [{detail}]" if detail else ""
        terminalreporter.write_line(f"criterion {number} ({name}): {status}{suffix}")
