"""Deterministic generation of small-rational webs and base assignments.

All randomness comes from a caller-provided seed so that every run of the
test suites and of the command-line sampling commands is reproducible; the
seed is always reported next to the results it produced.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .exactalg import Symbol
from .webcore import LinearWeb3


def small_rational(rng: random.Random, bound: int = 20) -> Fraction:
    return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))


def random_web(order: int, rng: random.Random, bound: int = 20,
               nonflat: bool = True) -> LinearWeb3:
    """A random rational web; resamples until a2 + b2 + c2 is nonzero."""
    while True:
        cols = [
            [small_rational(rng, bound) for _ in range(order - 1)]
            for _ in range(3)
        ]
        web = LinearWeb3.from_coeffs(*cols)
        if not nonflat or web.mu() != 0:
            return web


def base_assignment(max_index: int, rng: random.Random, bound: int = 20):
    """Rational values for every base symbol up to an index, never flat."""
    while True:
        assign = {
            Symbol(fam, r): small_rational(rng, bound)
            for fam in "abc"
            for r in range(2, max_index + 1)
        }
        if sum(assign[Symbol(f, 2)] for f in "abc") != 0:
            return assign
