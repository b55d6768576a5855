from __future__ import annotations

from functools import lru_cache

import pytest

from polargrass.grassmann import build_graph
from polargrass.polar import build_polar_space


@lru_cache(maxsize=None)
def space(name: str):
    return build_polar_space(name)


@lru_cache(maxsize=None)
def graph(name: str, k: int):
    return build_graph(space(name), k)


@pytest.fixture
def sp42():
    return space("sp:4:2")


@pytest.fixture
def sp62():
    return space("sp:6:2")


@pytest.fixture
def op62():
    return space("o+:6:2")


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion, in order."""
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid or rep.when not in ("call", "setup"):
                continue
            if outcome == "passed" and rep.when != "call":
                continue
            name = nodeid.split("::")[-1][len("test_criterion_"):]
            num, _, label = name.partition("_")
            detail = dict(rep.user_properties).get("detail", "")
            rows.append((int(num), label.replace("_", " "), "PASS" if outcome == "passed" else "FAIL", detail))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num, label, verdict, detail in sorted(rows):
        tail = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"criterion {num:2d} {label}: {verdict}{tail}")
