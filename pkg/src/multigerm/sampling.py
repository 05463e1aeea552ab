"""Seeded generic points: nonzero rationals with small numerators and denominators."""

from __future__ import annotations

import random
from fractions import Fraction

from .jetalgebra import Scalar, as_rational

BOUND = 97


def nonzero_rational(rng: random.Random, bound: int = BOUND) -> Scalar:
    num = rng.randint(1, bound)
    den = rng.randint(1, bound)
    if rng.random() < 0.5:
        num = -num
    return as_rational(Fraction(num, den))


def nonzero_point(rng: random.Random, dim: int, avoid=(), bound: int = BOUND) -> tuple[Scalar, ...]:
    """``dim`` nonzero rationals, none of them in ``avoid``."""
    avoid = {as_rational(a) for a in avoid}
    out = []
    while len(out) < dim:
        x = nonzero_rational(rng, bound)
        if x not in avoid:
            out.append(x)
    return tuple(out)


def make_rng(seed) -> random.Random:
    if isinstance(seed, random.Random):
        return seed
    return random.Random(seed)
