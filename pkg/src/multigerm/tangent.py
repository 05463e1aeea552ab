"""Orbit tangent spaces of multigerms inside finite jet spaces.

Vectors of the jet space are sparse dicts keyed by an *elimination position*
that orders basis elements by power first and then by (component, coordinate).
Echelon pivots are smallest positions, so after elimination the rows with pivot
in the power-``e`` block span the intersection of the space with the
homogeneous part of degree ``e`` and higher.  This single ordering gives ranks
at every lower level and homogeneous slices from one echelon form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .germs import (
    ComponentGerm,
    Multigerm,
    PullbackCache,
    monomials,
)
from .jetalgebra import INFINITY, Jet, as_rational, format_terms
from .linalg import Echelon
from .sampling import make_rng, nonzero_point

__all__ = [
    "AffineFamily",
    "DeficiencyReport",
    "GroupFilter",
    "JetSpaceBasis",
    "TangentSpace",
    "family_deficiency",
    "left_generators",
    "orbit_dim_sequence",
    "rank_profile",
    "right_generators",
    "tangent_space",
]

Vector = dict  # elimination position -> coefficient


@dataclass(frozen=True)
class JetSpaceBasis:
    """Basis ``(i, j, e)`` of the ``m``-jet space of ``k``-component multigerms in ``C^n``."""

    level: int
    k: int
    n: int

    def __post_init__(self):
        if self.level < 1 or self.k < 1 or self.n < 1:
            raise ValueError("jet space needs positive level, k and n")

    @property
    def dim(self) -> int:
        return self.k * self.n * self.level

    @property
    def slice_dim(self) -> int:
        return self.k * self.n

    def index(self, i: int, j: int, e: int) -> int:
        """Canonical lexicographic index in ``(i, j, e)``."""
        return (i * self.n + j) * self.level + e - 1

    def position(self, i: int, j: int, e: int) -> int:
        return (e - 1) * self.k * self.n + i * self.n + j

    def decode(self, pos: int) -> tuple[int, int, int]:
        e, r = divmod(pos, self.k * self.n)
        i, j = divmod(r, self.n)
        return i, j, e + 1

    def degree_of(self, pos: int) -> int:
        return pos // (self.k * self.n) + 1

    def block(self, e: int) -> range:
        """Positions of the homogeneous power-``e`` slice."""
        w = self.k * self.n
        return range((e - 1) * w, e * w)

    def encode(self, F: Multigerm) -> Vector:
        if F.k != self.k or F.ambient_dim != self.n:
            raise ValueError(
                f"vector shape (k={F.k}, n={F.ambient_dim}) does not match jet space "
                f"(k={self.k}, n={self.n})"
            )
        if F.truncation < self.level:
            raise ValueError(f"vector known only to order {F.truncation} < level {self.level}")
        out = {}
        for i, comp in enumerate(F.components):
            for j, x in enumerate(comp.coords):
                for e, c in x.items():
                    if e <= self.level:
                        out[self.position(i, j, e)] = c
        return out

    def decode_vector(self, vec: Vector) -> Multigerm:
        coeffs = [[{} for _ in range(self.n)] for _ in range(self.k)]
        for pos, c in vec.items():
            i, j, e = self.decode(pos)
            coeffs[i][j][e] = c
        return Multigerm(tuple(
            ComponentGerm(tuple(Jet(cs, self.level) for cs in comp)) for comp in coeffs
        ))

    def format(self, vec: Vector) -> str:
        """Readable form, e.g. ``(t^4, 0, 0)_2 + (0, 0, t^4)_2``."""
        if not vec:
            return "0"
        parts = []
        per_comp: dict[int, list[dict]] = {}
        for pos, c in vec.items():
            i, j, e = self.decode(pos)
            per_comp.setdefault(i, [{} for _ in range(self.n)])[j][e] = c
        for i in sorted(per_comp):
            coords = ", ".join(format_terms(cs) for cs in per_comp[i])
            parts.append(f"({coords})_{i + 1}")
        return " + ".join(parts)

    def canonical(self, vec: Vector) -> list:
        """Dense coefficient list in the canonical (component, coordinate, power) order."""
        out = [0] * self.dim
        for pos, c in vec.items():
            out[self.index(*self.decode(pos))] = as_rational(c)
        return out


@dataclass(frozen=True)
class GroupFilter:
    """Which generators of the orbit tangent space to use.

    ``right_min``/``left_min`` are the smallest power of ``t`` multiplying
    ``F'`` and the smallest monomial degree; ``None`` switches that side off.
    """

    variant: str
    param: int = 0

    def __post_init__(self):
        if self.variant not in ("FullA", "A_r", "LeftOnly", "RightOnly",
                                "LeftOnlyDegreeMin", "RightOnlyDegreeMin"):
            raise ValueError(f"unknown filter {self.variant!r}")
        if self.variant == "A_r" and self.param < 0:
            raise ValueError("r must be >= 0")
        if self.variant.endswith("DegreeMin") and self.param < 1:
            raise ValueError("d must be >= 1")

    @classmethod
    def full(cls) -> "GroupFilter":
        return cls("FullA")

    @classmethod
    def a_r(cls, r: int) -> "GroupFilter":
        return cls("A_r", r)

    @classmethod
    def left(cls, d: int | None = None) -> "GroupFilter":
        return cls("LeftOnly") if d is None else cls("LeftOnlyDegreeMin", d)

    @classmethod
    def right(cls, d: int | None = None) -> "GroupFilter":
        return cls("RightOnly") if d is None else cls("RightOnlyDegreeMin", d)

    @classmethod
    def parse(cls, text: str) -> "GroupFilter":
        """``A``, ``A_1``, ``L``, ``R``, ``L>=3``, ``R>=2`` and the long variant names."""
        s = text.strip()
        table = {"A": cls.full(), "FullA": cls.full(), "L": cls.left(), "LeftOnly": cls.left(),
                 "R": cls.right(), "RightOnly": cls.right()}
        if s in table:
            return table[s]
        for prefix, make in (("A_", cls.a_r), ("L>=", cls.left), ("R>=", cls.right),
                             ("LeftOnlyDegreeMin", cls.left), ("RightOnlyDegreeMin", cls.right)):
            if s.startswith(prefix):
                arg = s[len(prefix):].strip("()")
                if arg.isdigit():
                    return make(int(arg))
        raise ValueError(f"unknown group filter {text!r}")

    @property
    def right_min(self) -> int | None:
        v = self.variant
        if v == "FullA" or v == "RightOnly":
            return 1
        if v == "A_r":
            return self.param + 1
        if v == "RightOnlyDegreeMin":
            return self.param
        return None

    @property
    def left_min(self) -> int | None:
        v = self.variant
        if v == "FullA" or v == "LeftOnly":
            return 1
        if v == "A_r":
            return self.param + 1
        if v == "LeftOnlyDegreeMin":
            return self.param
        return None

    def __str__(self) -> str:
        if self.variant == "A_r":
            return f"A_{self.param}"
        if self.variant.endswith("DegreeMin"):
            return f"{self.variant}({self.param})"
        return self.variant


# -- generators ----------------------------------------------------------

def _check_level(F: Multigerm, m: int) -> None:
    if m < 1:
        raise ValueError("level must be >= 1")
    if m > F.truncation:
        raise ValueError(f"level {m} exceeds truncation {F.truncation}")


def right_generators(F: Multigerm, m: int, min_power: int = 1) -> list[Vector]:
    """``t^s F_i'`` in component ``i`` for ``min_power <= s <= m``."""
    if min_power < 1:
        raise ValueError("min_power must be >= 1")
    _check_level(F, m)
    F.require_nondegenerate()
    B = JetSpaceBasis(m, F.k, F.ambient_dim)
    out = []
    for i, comp in enumerate(F.components):
        derivs = [x.derivative() for x in comp.coords]
        for s in range(min_power, m + 1):
            vec = {}
            for j, d in enumerate(derivs):
                for e, c in d.items():
                    if e + s <= m:
                        vec[B.position(i, j, e + s)] = c
            out.append(vec)
    return out


def _left_monomials(caches: Sequence[PullbackCache], n: int, m: int, min_degree: int):
    # monomials of degree >= min_degree whose pullback survives truncation on some component
    min_ord = [min((o for o in c.orders if o != INFINITY), default=INFINITY) for c in caches]
    top = m // min(min_ord) if min(min_ord) != INFINITY else 0
    for alpha in monomials(n, max(min_degree, 1), min(m, top)):
        if any(c.order(alpha) <= m for c in caches):
            yield alpha


def left_generators(F: Multigerm, m: int, min_degree: int = 1) -> list[Vector]:
    """``x^alpha e_j`` composed with every component at once."""
    if min_degree < 1:
        raise ValueError("min_degree must be >= 1")
    _check_level(F, m)
    F.require_nondegenerate()
    n = F.ambient_dim
    B = JetSpaceBasis(m, F.k, n)
    caches = [PullbackCache(c) for c in F.components]
    out = []
    for alpha in _left_monomials(caches, n, m, min_degree):
        pulls = []
        for i, c in enumerate(caches):
            if c.order(alpha) <= m:
                pulls.append((i, [(e, v) for e, v in c(alpha).items() if e <= m]))
        for j in range(n):
            vec = {}
            for i, terms in pulls:
                for e, v in terms:
                    vec[B.position(i, j, e)] = v
            if vec:
                out.append(vec)
    return out


def _generators(F: Multigerm, m: int, filt: GroupFilter) -> list[Vector]:
    gens = []
    if filt.right_min is not None and filt.right_min <= m:
        gens.extend(right_generators(F, m, filt.right_min))
    if filt.left_min is not None and filt.left_min <= m:
        gens.extend(left_generators(F, m, filt.left_min))
    return gens


# -- tangent spaces --------------------------------------------------------

class TangentSpace:
    """Span of orbit generators at a fixed level, in echelon form."""

    def __init__(self, basis: JetSpaceBasis, filt: GroupFilter, echelon: Echelon,
                 generator_count: int):
        self.basis_space = basis
        self.filter = filt
        self.echelon = echelon
        self.generator_count = generator_count

    @property
    def level(self) -> int:
        return self.basis_space.level

    @property
    def rank(self) -> int:
        return self.echelon.rank

    @property
    def dim_ambient(self) -> int:
        return self.basis_space.dim

    def _vec(self, v) -> Vector:
        if isinstance(v, Multigerm):
            return self.basis_space.encode(v)
        if isinstance(v, dict):
            return v
        raise TypeError("expected a Multigerm-shaped vector or a position dict")

    def contains(self, v) -> bool:
        return self.echelon.contains(self._vec(v))

    def rank_at(self, m: int) -> int:
        """Rank of the projection to level ``m`` (same generators, truncated)."""
        bound = m * self.basis_space.slice_dim
        return sum(1 for p in self.echelon.rows if p < bound)

    def basis(self) -> list[Vector]:
        """Reduced echelon basis (canonical)."""
        return self.echelon.rref()

    def report(self, with_basis: bool = False) -> dict:
        out = {
            "level": self.level,
            "filter": str(self.filter),
            "rank": self.rank,
            "dim_ambient": self.dim_ambient,
        }
        if with_basis:
            out["basis"] = [self.basis_space.format(v) for v in self.basis()]
        return out


def tangent_space(F: Multigerm, m: int, filt: GroupFilter | None = None,
                  track: bool = False) -> TangentSpace:
    filt = filt or GroupFilter.full()
    _check_level(F, m)
    F.require_nondegenerate()
    F = F.truncate(m) if F.truncation > m else F
    B = JetSpaceBasis(m, F.k, F.ambient_dim)
    gens = _generators(F, m, filt)
    ech = Echelon(track=track)
    ech.extend(gens)
    return TangentSpace(B, filt, ech, len(gens))


def rank_profile(F: Multigerm, m_max: int, filt: GroupFilter | None = None) -> list[int]:
    """Tangent ranks at levels ``1..m_max`` from a single echelon form."""
    T = tangent_space(F, m_max, filt)
    return [T.rank_at(m) for m in range(1, m_max + 1)]


def orbit_dim_sequence(F: Multigerm, m_max: int) -> list[int]:
    return rank_profile(F, m_max, GroupFilter.full())


# -- families ----------------------------------------------------------------

@dataclass(frozen=True)
class AffineFamily:
    """``base + sum lambda_i * directions[i]`` over a parameter domain.

    ``nonzero`` restricts sampling to parameters with all coordinates nonzero,
    ``excluded`` lists further forbidden values of every parameter and
    ``points`` pins explicit sample points (used instead of random draws).
    """

    base: Multigerm
    directions: tuple[Multigerm, ...] = ()
    name: str = ""
    level: int | None = None
    nonzero: bool = True
    excluded: tuple = ()
    points: tuple = ()
    domain_note: str = ""
    extra: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "directions", tuple(self.directions))
        object.__setattr__(self, "excluded", tuple(as_rational(x) for x in self.excluded))
        object.__setattr__(self, "points", tuple(tuple(as_rational(x) for x in p) for p in self.points))
        for d in self.directions:
            if d.k != self.base.k or d.ambient_dim != self.base.ambient_dim:
                raise ValueError("directions must share the shape of the base")
        for p in self.points:
            if len(p) != len(self.directions):
                raise ValueError("sample point arity differs from the number of directions")

    @property
    def dim(self) -> int:
        return len(self.directions)

    def point(self, params: Sequence) -> Multigerm:
        if len(params) != self.dim:
            raise ValueError("wrong number of parameters")
        comps = []
        for i, comp in enumerate(self.base.components):
            coords = []
            for j, x in enumerate(comp.coords):
                for lam, d in zip(params, self.directions):
                    lam = as_rational(lam)
                    if lam:
                        x = x + d.components[i].coords[j].scale(lam)
                coords.append(x)
            comps.append(ComponentGerm(tuple(coords)))
        return Multigerm(tuple(comps))

    def direction_vectors(self, m: int) -> list[Vector]:
        B = JetSpaceBasis(m, self.base.k, self.base.ambient_dim)
        return [B.encode(d) for d in self.directions]

    def check_independent(self, m: int) -> None:
        ech = Echelon()
        if ech.extend(self.direction_vectors(m)) != self.dim:
            raise ValueError("family directions are linearly dependent")

    def sample_points(self, count: int, rng) -> list[tuple]:
        if self.points:
            return [tuple(p) for p in self.points]
        avoid = self.excluded + ((0,) if self.nonzero else ())
        return [nonzero_point(rng, self.dim, avoid) for _ in range(count)]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "base": self.base.to_json(),
            "directions": [d.to_json() for d in self.directions],
            "level": self.level,
            "nonzero": self.nonzero,
            "excluded": [str(x) for x in self.excluded],
            "points": [[str(x) for x in p] for p in self.points],
            "domain_note": self.domain_note,
        }

    @classmethod
    def from_json(cls, data: dict) -> "AffineFamily":
        base = Multigerm.from_json(data["base"])
        dirs = []
        for d in data.get("directions", []):
            d = dict(d)
            d.setdefault("truncation", base.truncation)
            d.setdefault("ambient_dim", base.ambient_dim)
            dirs.append(Multigerm.from_json(d))
        return cls(
            base,
            tuple(dirs),
            name=data.get("name", ""),
            level=data.get("level"),
            nonzero=data.get("nonzero", True),
            excluded=tuple(as_rational(x) for x in data.get("excluded", [])),
            points=tuple(tuple(as_rational(x) for x in p) for p in data.get("points", [])),
            domain_note=data.get("domain_note", ""),
        )


@dataclass
class DeficiencyReport:
    dim_x: int
    intersections: list[int]
    orbit_ranks: list[int]
    level: int
    filter: str
    retries: int = 0
    points: list = field(default_factory=list)

    @property
    def max_intersection(self) -> int:
        return max(self.intersections) if self.intersections else 0

    @property
    def verdict(self) -> str:
        if self.intersections and all(x < self.dim_x for x in self.intersections):
            return "NotSimpleEvidence"
        return "NoEvidence"

    def to_json(self) -> dict:
        return {
            "dim_x": self.dim_x,
            "intersection": self.max_intersection,
            "intersections": self.intersections,
            "orbit_ranks": self.orbit_ranks,
            "level": self.level,
            "filter": self.filter,
            "verdict": self.verdict,
            "retries": self.retries,
            "points": [[str(x) for x in p] for p in self.points],
        }


def intersection_dim(T: TangentSpace, vecs: Iterable[Vector]) -> int:
    """``dim(span(vecs) ∩ T)`` as ``dim span + rank T - rank of the union``."""
    vecs = list(vecs)
    d = Echelon().extend(vecs)
    union = T.echelon.copy()
    added = union.extend(vecs)
    return d - added


def family_deficiency(X: AffineFamily, m: int, filt: GroupFilter | None = None,
                      samples: int = 3, seed=42, max_retries: int = 3) -> DeficiencyReport:
    """Compare the family's dimension with its intersection with orbit tangents.

    At each sample point ``x`` the orbit tangent ``T_x`` is built at level
    ``m``; a sample whose orbit rank falls below the best seen so far is
    treated as non-generic and redrawn, up to ``max_retries`` times.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    filt = filt or GroupFilter.full()
    rng = make_rng(seed)
    if X.dim:
        X.check_independent(m)
    dirs = X.direction_vectors(m) if X.dim else []
    report = DeficiencyReport(X.dim, [], [], m, str(filt))
    pts = X.sample_points(samples, rng)
    best = -1
    results = []
    for p in pts:
        for attempt in range(max_retries + 1):
            T = tangent_space(X.point(p), m, filt)
            if T.rank >= best or X.points or attempt == max_retries:
                break
            report.retries += 1
            p = X.sample_points(1, rng)[0]
        best = max(best, T.rank)
        results.append((p, T.rank, intersection_dim(T, dirs)))
    for p, r, x in results:
        report.points.append(p)
        report.orbit_ranks.append(r)
        report.intersections.append(x)
    return report
