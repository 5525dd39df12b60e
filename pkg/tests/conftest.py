import random

import pytest

from grraf.graphs import graph_from_edges


def random_graph(
    rng: random.Random,
    node_count: int,
    density: float,
    directed: bool = False,
    weighted: bool = False,
    capacities: bool = False,
    node_weighted: bool = False,
):
    """Small random graph for equivalence sweeps; deterministic per rng."""
    edges = []
    if directed:
        candidates = [
            (u, v)
            for u in range(node_count)
            for v in range(node_count)
            if u != v
        ]
    else:
        candidates = [
            (u, v)
            for u in range(node_count)
            for v in range(u + 1, node_count)
        ]
    for u, v in candidates:
        if rng.random() < density:
            w = rng.randint(1, 9) if weighted else None
            c = rng.randint(1, 9) if capacities else None
            edges.append((u, v, w, c))
    node_weights = (
        [rng.randint(1, 20) for _ in range(node_count)]
        if node_weighted
        else None
    )
    return graph_from_edges(directed, node_count, edges, node_weights)


ACCEPTANCE_PREFIX = "tests/test_acceptance.py"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            if ACCEPTANCE_PREFIX in report.nodeid.replace("\\", "/"):
                name = report.nodeid.split("::")[-1]
                verdict = "PASS" if status == "passed" else "FAIL"
                lines.append(f"{verdict}  {name}")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
