from __future__ import annotations

import itertools
import os
import sys
from fractions import Fraction

import numpy as np
from hypothesis import HealthCheck, settings, strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from xorrep.game import TripartiteDistribution, XorGame  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def labels(k: int) -> tuple[str, ...]:
    return tuple(str(i) for i in range(k))


def random_distribution(rng: np.random.Generator, max_size: int = 3, min_atoms: int = 1,
                        weighted: bool = True) -> TripartiteDistribution:
    """Random distribution that uses every symbol of each alphabet."""
    while True:
        sizes = rng.integers(1, max_size + 1, size=3)
        cube = list(itertools.product(*(range(s) for s in sizes)))
        k = int(rng.integers(max(min_atoms, int(max(sizes))), len(cube) + 1))
        pick = [cube[i] for i in rng.choice(len(cube), size=k, replace=False)]
        if all(len({t[a] for t in pick}) == sizes[a] for a in range(3)):
            break
    w = [int(v) for v in rng.integers(1, 5, size=k)] if weighted else [1] * k
    total = sum(w)
    return TripartiteDistribution(*(labels(int(s)) for s in sizes), tuple(pick),
                                  tuple(Fraction(v, total) for v in w))


def random_game(rng: np.random.Generator, max_size: int = 3, max_modulus: int = 4) -> XorGame:
    dist = random_distribution(rng, max_size)
    m = int(rng.integers(2, max_modulus + 1))
    return XorGame(dist, m, {t: int(rng.integers(0, m)) for t in dist.support})


@st.composite
def distributions(draw, max_size: int = 3):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_distribution(np.random.default_rng(seed), max_size)


@st.composite
def games(draw, max_size: int = 3, max_modulus: int = 4):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_game(np.random.default_rng(seed), max_size, max_modulus)
