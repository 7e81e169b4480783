import random
from fractions import Fraction
from math import gcd

import pytest

ACCEPTANCE_LINES: list[str] = []


def random_weights(rng: random.Random, r: int, max_den: int = 12, span: int = 2) -> list[Fraction]:
    """r rationals k/d with one common denominator d <= max_den, |k/d| <= span."""
    d = rng.randint(1, max_den)
    return [Fraction(rng.randint(-span * d, span * d), d) for _ in range(r)]


def random_valid(rng: random.Random, r: int, m: int = 1, max_den: int = 12) -> list[Fraction]:
    """Random member of R_{r,m}: non-increasing with spread at most m."""
    d = rng.randint(1, max_den)
    base = rng.randint(-m * d, m * d)
    return [Fraction(k, d) for k in sorted((rng.randint(base, base + m * d) for _ in range(r)),
                                           reverse=True)]


def galois_closed(rng: random.Random, r: int, max_den: int = 12) -> list[Fraction]:
    """Phases whose exp(2 pi i a) form a union of full Galois orbits (P_a integral)."""
    out: list[Fraction] = []
    while len(out) < r:
        n = rng.randint(1, max_den)
        orbit = [Fraction(k, n) for k in range(n) if gcd(k, n) == 1]
        if len(out) + len(orbit) <= r:
            out += [x + rng.randint(-1, 1) for x in orbit]
    rng.shuffle(out)
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return random.Random(20240517)
