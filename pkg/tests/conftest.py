import random
from fractions import Fraction

from fqap import MeasureTable, PointSet


def pytest_terminal_summary(terminalreporter):
    """Print one pass/fail line per acceptance criterion."""
    lines = []
    for status, verdict in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            if getattr(rep, "when", "call") != "call" and status == "passed":
                continue
            name = nodeid.split("::")[-1].replace("test_", "", 1)
            lines.append(f"criterion {name}: {verdict}")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(set(lines)):
            terminalreporter.write_line(line)


def make_random_measure(
    q: int,
    d: int,
    seed: int,
    atoms: int = 8,
    denom: int = 64,
    mode: str = "exact",
) -> MeasureTable:
    """Random sparse measure with weights k/denom, k >= 1, on `atoms` points."""
    rng = random.Random(seed)
    n = q**d
    support = rng.sample(range(n), min(atoms, n))
    weights = [Fraction(0)] * n
    for i in support:
        weights[i] = Fraction(rng.randint(1, denom), denom)
    if mode == "float":
        return MeasureTable(q, d, tuple(float(w) for w in weights), mode="float")
    return MeasureTable(q, d, tuple(weights), mode="exact")


def make_random_set(q: int, d: int, seed: int, size: int) -> PointSet:
    rng = random.Random(seed)
    n = q**d
    return PointSet(q, d, frozenset(rng.sample(range(n), min(size, n))))
