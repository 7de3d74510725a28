import re

CRITERION = re.compile(r"test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance" not in nodeid:
                continue
            m = CRITERION.search(nodeid)
            if m:
                rows.append((int(m.group(1)), outcome.upper(), nodeid))
    if not rows:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for num, outcome, nodeid in sorted(rows):
        word = "PASS" if outcome == "PASSED" else "FAIL"
        terminalreporter.write_line(f"  criterion {num:2d}: {word}  ({nodeid})")
