"""Shared pytest plumbing: the acceptance-criteria report banner.

Each acceptance test records exactly one line through the ``criterion``
fixture; the hook below replays them after the run so the pass/fail ledger is
visible even when pytest captures stdout.
"""

import pytest

_lines = []


@pytest.fixture(scope="session")
def criterion():
    def record(number, label, failures, detail=""):
        ok = not failures
        line = f"[acceptance] criterion {number:02d} {label}: " \
               f"{'PASS' if ok else 'FAIL'}"
        extra = detail if ok else "; ".join(str(f) for f in failures)
        if extra:
            line += f" ({extra})"
        _lines.append(line)
        print(line, flush=True)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _lines:
        terminalreporter.section("acceptance criteria")
        for line in _lines:
            terminalreporter.write_line(line)
