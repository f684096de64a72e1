"""Shared fixtures for the frobthresh test suite."""

import random
import sys
from pathlib import Path

import pytest

# Add the project root to path
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from frobthresh.config import Settings  # noqa: E402
from frobthresh.frobenius import PairDivisor  # noqa: E402
from frobthresh.polycore import Ideal, PolyRing  # noqa: E402


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def settings():
    return Settings()


@pytest.fixture
def f2xy():
    return PolyRing(2, ("x", "y"))


@pytest.fixture
def f3xy():
    return PolyRing(3, ("x", "y"))


@pytest.fixture
def f5xy():
    return PolyRing(5, ("x", "y"))


@pytest.fixture
def f7xy():
    return PolyRing(7, ("x", "y"))


@pytest.fixture
def f2x():
    return PolyRing(2, ("x",))


@pytest.fixture
def trivial():
    """PairDivisor.trivial as a factory: trivial(ring, e=1)."""
    return PairDivisor.trivial


def random_polynomial(rng: random.Random, ring: PolyRing, max_deg: int, max_terms: int):
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        exps = [0] * ring.ngens
        for _ in range(rng.randint(0, max_deg)):
            exps[rng.randrange(ring.ngens)] += 1
        terms[tuple(exps)] = rng.randrange(1, ring.p)
    return ring.from_terms(terms)


def random_ideal(rng: random.Random, ring: PolyRing, max_gens: int = 2, max_deg: int = 6, max_terms: int = 3) -> Ideal:
    gens = []
    while not gens:
        gens = [g for g in (random_polynomial(rng, ring, max_deg, max_terms) for _ in range(rng.randint(1, max_gens))) if g]
    return Ideal(ring, gens)


def random_ideal_in_max(rng: random.Random, ring: PolyRing, max_gens: int = 2, max_deg: int = 4) -> Ideal:
    """Random nonzero ideal inside m: constant terms are dropped."""
    zero = tuple([0] * ring.ngens)
    while True:
        a = random_ideal(rng, ring, max_gens, max_deg)
        gens = [ring.from_terms({m: int(c) for m, c in g.items() if m != zero}) for g in a.gens]
        gens = [g for g in gens if g]
        if gens:
            return Ideal(ring, gens)
