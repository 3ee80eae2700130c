import random

import pytest
from hypothesis import HealthCheck, settings

from approxgrowth.groups import parse_group

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FAMILY_SPECS = [
    "lattice(1)",
    "lattice(2)",
    "lattice(3)",
    "cyclic(12)",
    "cyclic(50)",
    "dihedral(16)",
    "dihedral(30)",
    "heisenberg",
    "free(2)",
    "free(3)",
    "lamplighter",
    "product(lattice(1),cyclic(5))",
    "product(dihedral(6),heisenberg)",
]


def random_word(group, rng: random.Random, max_len: int = 12):
    """Product of random generators and their inverses."""
    gens = list(group.standard_generators())
    gens += [group.inv(g) for g in gens]
    x = group.identity
    for _ in range(rng.randint(0, max_len)):
        x = group.mul(x, rng.choice(gens))
    return x


@pytest.fixture(params=FAMILY_SPECS)
def group(request):
    return parse_group(request.param)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, title, elapsed = RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}  ({elapsed:.1f} s)")
