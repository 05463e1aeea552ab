"""Complete transversals and one-level jet reduction."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .germs import Multigerm, jet_of
from .linalg import DecompositionError, Echelon
from .tangent import GroupFilter, JetSpaceBasis, TangentSpace, Vector, _generators, tangent_space

__all__ = [
    "ReductionStep",
    "Transversal",
    "complete_transversal",
    "reduce_step",
    "transversal_profile",
    "transversal_scan",
]


@dataclass
class Transversal:
    """Coordinate complement of the orbit tangent image in the degree-``level`` slice."""

    level: int
    basis_space: JetSpaceBasis
    basis: list[Vector]
    tangent_rank: int
    slice_rank: int

    @property
    def slice_dim(self) -> int:
        return self.basis_space.slice_dim

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def is_trivial(self) -> bool:
        return not self.basis

    def vectors(self) -> list[Multigerm]:
        return [self.basis_space.decode_vector(v) for v in self.basis]

    def spans(self, vecs) -> bool:
        """Whether ``vecs`` (Multigerm-shaped) span the same space as the basis."""
        enc = [v if isinstance(v, dict) else self.basis_space.encode(v) for v in vecs]
        a, b = Echelon(), Echelon()
        a.extend(self.basis)
        b.extend(enc)
        return a.rank == b.rank and all(a.contains(v) for v in enc)

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "trivial": self.is_trivial,
            "basis": [self.basis_space.format(v) for v in self.basis],
            "tangent_rank": self.tangent_rank,
            "slice_dim": self.slice_dim,
            "slice_rank": self.slice_rank,
        }


def _prepare(F: Multigerm, top: int) -> Multigerm:
    F.require_nondegenerate()
    if F.truncation < top - 1:
        raise ValueError(
            f"a transversal at level {top} needs the {top - 1}-jet, input is known to order {F.truncation}"
        )
    return F.truncate(top) if F.truncation >= top else F.pad(top)


def _from_space(T: TangentSpace, level: int) -> Transversal:
    B = T.basis_space
    Bl = JetSpaceBasis(level, B.k, B.n)
    block = B.block(level)
    rows = T.echelon.rows
    free = [p for p in block if p not in rows]
    return Transversal(
        level=level,
        basis_space=Bl,
        basis=[{p: 1} for p in free],
        tangent_rank=T.rank_at(level),
        slice_rank=len(block) - len(free),
    )


def complete_transversal(F: Multigerm, m: int, r: int = 1) -> Transversal:
    """Complete transversal at level ``m + 1`` for the ``m``-jet of ``F``.

    Terms of ``F`` above order ``m`` are ignored: the subgroup tangent at
    level ``m + 1`` depends only on the ``m``-jet.
    """
    if m < 1:
        raise ValueError("level must be >= 1")
    G = jet_of(F, m).pad(m + 1) if F.truncation >= m else _prepare(F, m + 1)
    T = tangent_space(G, m + 1, GroupFilter.a_r(r))
    return _from_space(T, m + 1)


def transversal_profile(F: Multigerm, top: int, r: int = 1) -> tuple[TangentSpace, list[Transversal]]:
    """Transversals at levels ``2..top`` for the successive jets of ``F`` (one elimination)."""
    G = _prepare(F, top)
    T = tangent_space(G, top, GroupFilter.a_r(r))
    return T, [_from_space(T, L) for L in range(2, top + 1)]


def transversal_scan(F: Multigerm, start: int, stop: int, r: int = 1) -> list[Transversal]:
    """Transversals at target levels ``start..stop`` for the fixed germ ``F``.

    The transversal at level ``L`` is the one for ``j^(L-1) F``; terms of
    ``F`` are never reduced here.
    """
    if start < 2 or stop < start:
        raise ValueError("need 2 <= start <= stop")
    _, trs = transversal_profile(F, stop, r)
    return trs[start - 2:]


@dataclass
class ReductionStep:
    level: int
    t: Multigerm
    residual: Vector
    certificate: dict[int, Fraction] = field(default_factory=dict)
    transversal: Transversal | None = None

    @property
    def is_zero(self) -> bool:
        return not self.residual


def reduce_step(G: Multigerm, F: Multigerm, r: int = 1) -> ReductionStep:
    """Split ``G - F`` into a tangent image part plus an element of the transversal.

    ``G`` is an ``(m+1)``-jet and ``F`` its ``m``-jet.  The certificate gives
    the combination of subgroup generators (by generator index) accounting
    for the tangent part.
    """
    m = F.truncation
    if G.truncation < m + 1:
        raise ValueError("G must be known to order m+1")
    G = G.truncate(m + 1)
    if jet_of(G, m).components != F.components:
        raise ValueError("F is not the m-jet of G")
    base = F.pad(m + 1)
    T = tangent_space(base, m + 1, GroupFilter.a_r(r), track=True)
    B = T.basis_space
    h = {}
    gv, fv = B.encode(G), B.encode(base)
    for p in set(gv) | set(fv):
        d = gv.get(p, 0) - fv.get(p, 0)
        if d:
            h[p] = d
    rem, combo = T.echelon.reduce(h)
    # rebuild the generators and check the decomposition exactly
    gens = _generators(base, m + 1, GroupFilter.a_r(r))
    check = dict(rem)
    for idx, c in combo.items():
        for p, x in gens[idx].items():
            check[p] = check.get(p, 0) + c * x
    check = {p: x for p, x in check.items() if x}
    if check != h:
        raise DecompositionError("tangent decomposition does not reproduce G - F")
    tr = _from_space(T, m + 1)
    free = {q for v in tr.basis for q in v}
    if any(p not in free for p in rem):
        raise DecompositionError("residual escapes the transversal")
    return ReductionStep(m + 1, B.decode_vector(rem), rem, combo, tr)
