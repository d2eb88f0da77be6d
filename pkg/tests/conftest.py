import random
from fractions import Fraction

import pytest

from bmquant.lattice import Halfspace, HPolytope


def random_polytope(rng: random.Random, d: int, max_facets: int = 10) -> HPolytope:
    """A box of side <= 6 cut by a few random halfspaces, some strict, some with rational bounds."""
    lo = [rng.randint(-5, 3) for _ in range(d)]
    hi = [a + rng.randint(0, 6) for a in lo]
    hs = list(HPolytope.box(lo, hi).halfspaces)
    for _ in range(rng.randint(0, max_facets - 2 * d)):
        n = tuple(rng.randint(-3, 3) for _ in range(d))
        if not any(n):
            continue
        center = sum(n[i] * (lo[i] + hi[i]) for i in range(d)) // 2
        bound = Fraction(rng.randint(2 * center - 12, 2 * center + 4), rng.choice([1, 2, 3]))
        hs.append(Halfspace(n, bound, rng.random() < 0.7))
    return HPolytope(tuple(hs), d)


def box_of(p: HPolytope):
    """Coordinate box implied by the unit-normal halfspaces of ``random_polytope``."""
    d = p.dim
    lo, hi = [None] * d, [None] * d
    for h in p.halfspaces[: 2 * d]:
        i = next(k for k, x in enumerate(h.normal) if x)
        if h.normal[i] > 0:
            lo[i] = int(h.bound)
        else:
            hi[i] = int(-h.bound)
    return lo, hi


@pytest.fixture
def rng():
    return random.Random(12345)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    name = request.node.name

    def report(ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
