"""Invariant semigroups of a single branch, gaps, invariant pair, determinacy bound."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .germs import ComponentGerm, PullbackCache, monomials, multiplicity
from .jetalgebra import INFINITY, Jet

__all__ = [
    "GapData",
    "IncompleteSemigroupError",
    "InvariantPair",
    "NumericalSemigroup",
    "determinacy_bound",
    "gap_data",
    "invariant_pair",
    "value_semigroup",
]


class IncompleteSemigroupError(ValueError):
    """The conductor was not certified below the order bound."""


@dataclass(frozen=True)
class NumericalSemigroup:
    k: int
    bound: int
    achieved: tuple[int, ...]  # every achieved order <= bound
    conductor: int | None
    complete: bool
    period: int  # consecutive run length used to certify the conductor

    def __contains__(self, e: int) -> bool:
        if self.complete and e >= self.conductor:
            return True
        if e > self.bound:
            raise ValueError(f"order {e} is beyond the certified range")
        return e in self.achieved

    @property
    def smallest_positive(self) -> int | None:
        return next((a for a in self.achieved if a > 0), None)

    def truncated(self, depth: int) -> tuple[int, ...]:
        return tuple(a for a in self.achieved if a <= depth)

    def to_json(self) -> dict:
        g = gap_data(self)
        return {
            "k": self.k,
            "achieved_up_to": self.bound,
            "achieved": list(self.achieved),
            "conductor": self.conductor,
            "gaps": list(g.gaps),
            "largest_gap": g.largest_gap,
            "complete": self.complete,
        }


@dataclass(frozen=True)
class GapData:
    gaps: tuple[int, ...]
    largest_gap: int | None


def _basis_by_order(c: ComponentGerm, k: int, bound: int) -> dict[int, Jet]:
    """Elimination of monomial pullbacks by leading order, lowest collision first."""
    cache = PullbackCache(c.truncate(bound) if c.truncation > bound else c)
    p = multiplicity(c)
    basis: dict[int, Jet] = {}
    for alpha in monomials(c.ambient_dim, k, bound // p):
        o = cache.order(alpha)
        if o == INFINITY or o > bound:
            continue
        h = cache(alpha)
        while not h.is_zero():
            e = h.order()
            b = basis.get(e)
            if b is None:
                basis[e] = h.scale(Fraction(1) / h.leading())
                break
            h = h - b.scale(h.leading())
    return basis


def value_semigroup(c: ComponentGerm, k: int = 0, order_bound: int | None = None) -> NumericalSemigroup:
    """Orders of pullbacks of function germs in the ``k``-th power of the maximal ideal.

    Every such germ is, up to order ``order_bound``, a combination of the
    monomials of degree at least ``k``, so echelonizing their pullbacks by
    leading order finds every achieved value up to the bound.  The conductor
    is certified once ``p`` consecutive values are achieved, ``p`` being the
    multiplicity (adding ``S_1`` maps ``S_k`` into itself).
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    c.require_nondegenerate()
    bound = c.truncation if order_bound is None else order_bound
    if bound > c.truncation:
        raise ValueError(f"order bound {bound} exceeds truncation {c.truncation}")
    p = multiplicity(c)
    achieved = set(_basis_by_order(c, k, bound))
    if k == 0:
        achieved.add(0)
    ach = tuple(sorted(achieved))
    conductor = None
    run = 0
    for e in range(0, bound + 1):
        if e in achieved:
            run += 1
            if run == p:
                conductor = e - p + 1
                break
        else:
            run = 0
    return NumericalSemigroup(k, bound, ach, conductor, conductor is not None, p)


def gap_data(S: NumericalSemigroup) -> GapData:
    top = S.conductor if S.complete else S.bound + 1
    gaps = tuple(e for e in range(1, top) if e not in S.achieved)
    return GapData(gaps, gaps[-1] if gaps else None)


@dataclass(frozen=True)
class InvariantPair:
    p: int
    q: int | None  # None: no value above p that p does not divide

    @property
    def no_q(self) -> bool:
        return self.q is None

    def as_tuple(self) -> tuple:
        return (self.p, self.q if self.q is not None else "NoQ")

    def __str__(self) -> str:
        return f"({self.p}, {self.q})" if self.q is not None else f"({self.p}, NoQ)"


def invariant_pair(c: ComponentGerm, order_bound: int | None = None) -> InvariantPair:
    S = value_semigroup(c, 0, order_bound)
    p = S.smallest_positive
    q = next((a for a in S.achieved if a > p and a % p), None)
    return InvariantPair(p, q)


def determinacy_bound(c: ComponentGerm, k: int, order_bound: int | None = None) -> int:
    """Largest gap ``N_k`` of ``S_k``; the branch is ``L_(k-1)``-determined at this degree.

    This is a statement about left equivalence of order ``k - 1`` for a single
    branch in dimension at least two; it is not an A-determinacy degree.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if c.ambient_dim < 2:
        raise ValueError("the L_(k-1)-determinacy bound needs ambient dimension n >= 2")
    S = value_semigroup(c, k, order_bound)
    if not S.complete:
        raise IncompleteSemigroupError(
            f"conductor of S_{k} not certified up to order {S.bound}; supply a longer jet"
        )
    g = gap_data(S).largest_gap
    return 0 if g is None else g
