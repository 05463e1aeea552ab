"""Exact incremental row echelon forms over the rationals.

Vectors are sparse ``{position: coefficient}`` dicts.  Positions are integers
and *their natural order is the elimination order*: the leading entry of a
vector is its smallest position.  Callers that need a different priority relabel
columns before inserting (see :class:`multigerm.tangent.JetSpaceBasis`).

Rows are stored fraction-free: integer entries, positive pivot, content 1.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping

__all__ = ["Echelon", "integral", "rank_of", "DecompositionError"]


class DecompositionError(ArithmeticError):
    """A vector that was expected to lie in a span does not."""


def integral(vec: Mapping[int, object]) -> dict[int, int]:
    """Primitive integer multiple of ``vec`` (positive leading entry)."""
    items = [(p, v) for p, v in vec.items() if v]
    if not items:
        return {}
    den = 1
    for _, v in items:
        if isinstance(v, Fraction):
            den = lcm(den, v.denominator)
    out = {p: int(v * den) for p, v in items}
    return _primitive(out)


def _primitive(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            break
    lead = row[min(row)]
    if lead < 0:
        g = -g
    if g != 1:
        row = {p: v // g for p, v in row.items()}
    return row


class Echelon:
    """Incremental semi-reduced echelon form.

    Each stored row has its pivot at its smallest position, and no two rows
    share a pivot.  That is enough for rank, membership and the pivot profile;
    :meth:`rref` produces the canonical fully reduced basis on demand.

    With ``track=True`` every row also carries its expression as a rational
    combination of the inserted vectors (by insertion index).
    """

    def __init__(self, track: bool = False):
        self.rows: dict[int, dict[int, int]] = {}
        self.track = track
        self._combo: dict[int, dict[int, Fraction]] = {}
        self._inserted = 0

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def rank(self) -> int:
        return len(self.rows)

    @property
    def pivots(self) -> list[int]:
        return sorted(self.rows)

    def copy(self) -> "Echelon":
        e = Echelon(self.track)
        e.rows = dict(self.rows)
        e._combo = dict(self._combo)
        e._inserted = self._inserted
        return e

    def _reduce_lead(self, v: dict[int, int], combo=None) -> dict[int, int]:
        # eliminate leading entries while they hit pivots; returns the reduced v
        # (empty if v was in the span).  ``combo`` tracks v as a combination of
        # inserted vectors and is updated in place.
        rows = self.rows
        while v:
            lead = min(v)
            r = rows.get(lead)
            if r is None:
                break
            a, p = v[lead], r[lead]
            g = gcd(a, p)
            mv, mr = p // g, a // g
            w = {q: x * mv for q, x in v.items()}
            for q, x in r.items():
                y = w.get(q, 0) - mr * x
                if y:
                    w[q] = y
                else:
                    w.pop(q, None)
            if combo is not None:
                for i in list(combo):
                    combo[i] *= mv
                for i, c in self._combo[lead].items():
                    combo[i] = combo.get(i, 0) - mr * c
            v = w
        return v

    def add(self, vec: Mapping[int, object]) -> bool:
        """Insert ``vec``; return True if it was independent of the current span."""
        v = integral(vec)
        idx = self._inserted
        self._inserted += 1
        combo = None
        if self.track:
            # integral() scaled vec by some s: v = s*vec; record combo of v
            s = _scale_of(vec, v)
            combo = {idx: s}
        v = self._reduce_lead(v, combo)
        if not v:
            return False
        v2 = _primitive(v)
        lead = min(v2)
        if self.track:
            ratio = Fraction(v2[lead], v[lead])
            self._combo[lead] = {i: c * ratio for i, c in combo.items() if c}
        self.rows[lead] = v2
        return True

    def extend(self, vecs: Iterable[Mapping[int, object]]) -> int:
        return sum(self.add(v) for v in vecs)

    def contains(self, vec: Mapping[int, object]) -> bool:
        return not self._reduce_lead(integral(vec))

    def reduce(self, vec: Mapping[int, object]) -> tuple[dict[int, Fraction], dict[int, Fraction]]:
        """Full reduction of ``vec`` against the span.

        Returns ``(remainder, combo)`` with ``vec = remainder + sum combo[i] * inserted[i]``
        (``combo`` is empty unless tracking) and the remainder supported on
        non-pivot positions only.
        """
        rem: dict[int, Fraction] = {p: Fraction(x) for p, x in vec.items() if x}
        combo: dict[int, Fraction] = {}
        for p in sorted(self.rows):
            c = rem.get(p)
            if not c:
                continue
            row = self.rows[p]
            f = c / row[p]
            for q, x in row.items():
                y = rem.get(q, 0) - f * x
                if y:
                    rem[q] = y
                else:
                    rem.pop(q, None)
            if self.track:
                for i, cc in self._combo[p].items():
                    combo[i] = combo.get(i, 0) + f * cc
        return rem, {i: c for i, c in combo.items() if c}

    def rref(self) -> list[dict[int, Fraction]]:
        """Canonical reduced basis: pivot entry 1, zeros above and below pivots."""
        out: dict[int, dict[int, Fraction]] = {}
        for p in sorted(self.rows, reverse=True):
            row = self.rows[p]
            inv = Fraction(1, row[p])
            r = {q: x * inv for q, x in row.items()}
            for q in sorted(r):
                if q != p and q in out and r.get(q):
                    f = r[q]
                    for s, y in out[q].items():
                        z = r.get(s, 0) - f * y
                        if z:
                            r[s] = z
                        else:
                            r.pop(s, None)
            out[p] = r
        return [out[p] for p in sorted(out)]


def _scale_of(vec: Mapping[int, object], v: Mapping[int, int]) -> Fraction:
    if not v:
        return Fraction(1)
    p = min(v)
    return Fraction(v[p]) / Fraction(vec[p])


def rank_of(vecs: Iterable[Mapping[int, object]]) -> int:
    e = Echelon()
    return e.extend(vecs)
