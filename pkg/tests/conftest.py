from collections import defaultdict

import pytest

_TITLES = {}
_RESULTS = defaultdict(list)


@pytest.fixture(scope="session")
def criterion():
    """Record (criterion, ok, detail); one summary line per criterion is printed at the end."""
    def record(number, title, ok, detail=""):
        _TITLES[number] = title
        _RESULTS[number].append((ok, detail))
        print(f"criterion {number} {title}: {'PASS' if ok else 'FAIL'} {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        rows = _RESULTS[number]
        bad = [d for ok, d in rows if not ok]
        status = "PASS" if not bad else "FAIL"
        detail = f"{len(rows) - len(bad)}/{len(rows)} checks"
        if bad:
            detail += "; failing: " + "; ".join(bad)
        terminalreporter.write_line(f"criterion {number} {_TITLES[number]}: {status} ({detail})")
