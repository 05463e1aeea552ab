"""Parametrized curve germs and multigerms, pullbacks, stabilization, A-changes."""

from __future__ import annotations

import itertools
import json
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .jetalgebra import INFINITY, Jet, JetSyntaxError, Scalar
from .linalg import Echelon

__all__ = [
    "ComponentGerm",
    "DegenerateComponentError",
    "GermParseError",
    "Monomial",
    "Multigerm",
    "SeparationResult",
    "apply_left",
    "apply_right",
    "jet_of",
    "monomials",
    "multiplicity",
    "pullback",
    "random_a_change",
    "separate_images_check",
    "essential_stabilize",
    "stabilize",
]

Monomial = tuple  # multi-index of exponents, one per ambient coordinate


class DegenerateComponentError(ValueError):
    """An identically-zero component reached an analytic operation."""


class GermParseError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class ComponentGerm:
    """One branch ``t -> (f_1(t), ..., f_n(t))`` given by jets of a common order."""

    coords: tuple[Jet, ...]

    def __post_init__(self):
        coords = tuple(self.coords)
        object.__setattr__(self, "coords", coords)
        if not coords:
            raise ValueError("a component needs at least one coordinate")
        n = coords[0].truncation
        for c in coords:
            if c.truncation != n:
                raise ValueError("coordinates of a component must share the truncation order")
            if c.coeffs.get(0):
                raise ValueError("component coordinates must vanish at 0")

    @classmethod
    def from_strings(cls, coords: Sequence[str], truncation: int) -> "ComponentGerm":
        return cls(tuple(Jet.parse(s, truncation) for s in coords))

    @property
    def ambient_dim(self) -> int:
        return len(self.coords)

    @property
    def truncation(self) -> int:
        return self.coords[0].truncation

    @property
    def degenerate(self) -> bool:
        return all(c.is_zero() for c in self.coords)

    def require_nondegenerate(self) -> None:
        if self.degenerate:
            raise DegenerateComponentError("component is identically zero up to truncation")

    @property
    def multiplicity(self) -> int:
        return multiplicity(self)

    def truncate(self, m: int) -> "ComponentGerm":
        return ComponentGerm(tuple(c.truncate(m) for c in self.coords))

    def pad(self, n: int) -> "ComponentGerm":
        return ComponentGerm(tuple(c.pad(n) for c in self.coords))

    def embed(self, n: int) -> "ComponentGerm":
        """Append zero coordinates up to ambient dimension ``n``."""
        extra = n - self.ambient_dim
        if extra < 0:
            raise ValueError("cannot embed into a smaller space")
        return ComponentGerm(self.coords + (Jet.zero(self.truncation),) * extra)

    def tangent_direction(self) -> tuple[Scalar, ...]:
        """Coefficient vector of the lowest-order terms."""
        p = multiplicity(self)
        return tuple(c.coeffs.get(p, 0) for c in self.coords)

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


@dataclass(frozen=True)
class Multigerm:
    """Ordered tuple of components in a common ``C^n`` at a common truncation."""

    components: tuple[ComponentGerm, ...]
    separation: str = field(default="unverified", compare=False)

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("a multigerm has at least one component")
        n, N = comps[0].ambient_dim, comps[0].truncation
        for c in comps:
            if c.ambient_dim != n:
                raise ValueError("components must share the ambient dimension")
            if c.truncation != N:
                raise ValueError("components must share the truncation order")

    # -- construction ----------------------------------------------------
    @classmethod
    def from_strings(cls, comps: Sequence[Sequence[str]], truncation: int) -> "Multigerm":
        n = max(len(c) for c in comps)
        out = []
        for c in comps:
            c = list(c) + ["0"] * (n - len(c))
            out.append(ComponentGerm.from_strings(c, truncation))
        return cls(tuple(out))

    @classmethod
    def parse(cls, text: str, truncation: int) -> "Multigerm":
        """Parse ``"((t,0),(t^2,t^3))"``; short components are zero-padded."""
        s = text.strip()
        if not (s.startswith("(") and s.endswith(")")):
            raise GermParseError("expected '((...),(...))'", 1, 1)
        inner = s[1:-1].strip()
        comps = re.findall(r"\(([^()]*)\)", inner)
        if not comps or re.sub(r"\(([^()]*)\)", "", inner).replace(",", "").strip():
            raise GermParseError("expected a parenthesised list of components", 1, 2)
        try:
            return cls.from_strings([[x.strip() for x in c.split(",")] for c in comps], truncation)
        except JetSyntaxError as exc:
            raise GermParseError(str(exc)) from exc

    @classmethod
    def from_json(cls, data) -> "Multigerm":
        text = None
        if isinstance(data, (str, bytes)):
            text = data.decode() if isinstance(data, bytes) else data
            try:
                data = json.loads(data)
            except json.JSONDecodeError as exc:
                raise GermParseError(exc.msg, exc.lineno, exc.colno) from exc
        if not isinstance(data, dict):
            raise GermParseError("multigerm JSON must be an object")
        for key in ("truncation", "components"):
            if key not in data:
                raise GermParseError(f"missing key {key!r}")
        N = data["truncation"]
        if not isinstance(N, int) or N < 1:
            raise GermParseError("truncation must be a positive integer")
        comps = data["components"]
        if not isinstance(comps, list) or not comps or not all(isinstance(c, list) and c for c in comps):
            raise GermParseError("components must be a nonempty list of nonempty lists")
        n = data.get("ambient_dim", max(len(c) for c in comps))
        if any(len(c) > n for c in comps):
            raise GermParseError("component longer than ambient_dim")
        out = []
        # coordinate strings appear in document order, so a moving cursor locates them
        cursor = text.find('"components"') if text else -1
        for i, c in enumerate(comps):
            coords = []
            for j, s in enumerate(list(c) + ["0"] * (n - len(c))):
                if not isinstance(s, str):
                    raise GermParseError(f"component {i + 1}, coordinate {j + 1}: expected a string")
                at = text.find(json.dumps(s), cursor) if text and j < len(c) else -1
                if at >= 0:
                    cursor = at + 1
                try:
                    coords.append(Jet.parse(s, N))
                except JetSyntaxError as exc:
                    line, col = 1, exc.column
                    if at >= 0:
                        line = text.count("\n", 0, at) + 1
                        col = at - (text.rfind("\n", 0, at) + 1) + 1 + exc.column
                    raise GermParseError(
                        f"component {i + 1}, coordinate {j + 1}: {exc.message}", line, col
                    ) from exc
            out.append(ComponentGerm(tuple(coords)))
        return cls(tuple(out))

    def to_json(self) -> dict:
        return {
            "ambient_dim": self.ambient_dim,
            "truncation": self.truncation,
            "components": [[str(c) for c in comp.coords] for comp in self.components],
        }

    # -- accessors -------------------------------------------------------
    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def ambient_dim(self) -> int:
        return self.components[0].ambient_dim

    @property
    def truncation(self) -> int:
        return self.components[0].truncation

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i: int) -> ComponentGerm:
        return self.components[i]

    def __len__(self) -> int:
        return len(self.components)

    def require_nondegenerate(self) -> None:
        for i, c in enumerate(self.components):
            if c.degenerate:
                raise DegenerateComponentError(f"component {i + 1} is identically zero")

    def truncate(self, m: int) -> "Multigerm":
        return jet_of(self, m)

    def pad(self, n: int) -> "Multigerm":
        return Multigerm(tuple(c.pad(n) for c in self.components))

    def embed(self, n: int) -> "Multigerm":
        return Multigerm(tuple(c.embed(n) for c in self.components))

    def permute(self, order: Sequence[int]) -> "Multigerm":
        return Multigerm(tuple(self.components[i] for i in order))

    def with_separation(self, status: str) -> "Multigerm":
        return Multigerm(self.components, status)

    @cached_property
    def max_exponent(self) -> int:
        return max((c.degree() for comp in self.components for c in comp.coords), default=0)

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.components) + ")"


# -- invariants ----------------------------------------------------------

def multiplicity(c: ComponentGerm) -> int:
    c.require_nondegenerate()
    return min(x.order() for x in c.coords)


def monomials(n: int, min_degree: int, max_degree: int) -> Iterable[Monomial]:
    for d in range(max(min_degree, 0), max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), d):
            alpha = [0] * n
            for j in combo:
                alpha[j] += 1
            yield tuple(alpha)


def pullback(c: ComponentGerm, alpha: Monomial) -> Jet:
    """``x^alpha`` composed with the component, as a jet."""
    if len(alpha) != c.ambient_dim:
        raise ValueError("monomial arity does not match ambient dimension")
    N = c.truncation
    out = Jet({0: 1}, N, allow_constant=True)
    for x, a in zip(c.coords, alpha):
        if a:
            out = out * x ** a
    return out


class PullbackCache:
    """Memoised monomial pullbacks for one component (built multiplicatively)."""

    def __init__(self, c: ComponentGerm):
        self.c = c
        self.orders = tuple(x.order() for x in c.coords)
        self._cache: dict[Monomial, Jet] = {(0,) * c.ambient_dim: Jet({0: 1}, c.truncation, allow_constant=True)}

    def order(self, alpha: Monomial):
        total = 0
        for o, a in zip(self.orders, alpha):
            if a:
                if o == INFINITY:
                    return INFINITY
                total += o * a
        return total

    def __call__(self, alpha: Monomial) -> Jet:
        got = self._cache.get(alpha)
        if got is not None:
            return got
        j = next(i for i, a in enumerate(alpha) if a)
        prev = list(alpha)
        prev[j] -= 1
        out = self(tuple(prev)) * self.c.coords[j]
        self._cache[alpha] = out
        return out


# -- jets and stabilization ---------------------------------------------

def jet_of(F: Multigerm, m: int) -> Multigerm:
    if m > F.truncation:
        raise ValueError(f"jet level {m} exceeds truncation {F.truncation}")
    if m < 1:
        raise ValueError("jet level must be positive")
    return Multigerm(tuple(c.truncate(m) for c in F.components), F.separation)


def _coefficient_rows(F: Multigerm) -> list[dict[int, Scalar]]:
    N = F.truncation
    rows = []
    for j in range(F.ambient_dim):
        row = {}
        for i, comp in enumerate(F.components):
            for e, v in comp.coords[j].items():
                row[i * N + e - 1] = v
        rows.append(row)
    return rows


def stabilize(F: Multigerm) -> tuple[Multigerm, list[list[Fraction]]]:
    """Reduce to the minimal ambient dimension by a linear left change.

    Coordinates are replaced by the reduced row echelon form of the coefficient
    matrix (rows = coordinates, columns = (component, power) pairs); zero rows
    are dropped.  Returns the new multigerm and the matrix ``A`` of the change,
    new coordinate ``i`` being ``sum_j A[i][j] x_j``.
    """
    rows = _coefficient_rows(F)
    n = F.ambient_dim
    # augmented rows carry the change matrix in trailing columns
    width = F.k * F.truncation
    ech = Echelon()
    aug = []
    for j, row in enumerate(rows):
        r = dict(row)
        r[width + j] = 1
        aug.append(r)
    ech.extend(aug)
    basis = [r for r in ech.rref() if min(r) < width]
    N = F.truncation
    comps = []
    for i in range(F.k):
        coords = []
        for r in basis:
            coords.append(Jet({e: r.get(i * N + e - 1, 0) for e in range(1, N + 1)}, N))
        comps.append(ComponentGerm(tuple(coords)))
    change = [[Fraction(r.get(width + j, 0)) for j in range(n)] for r in basis]
    if not comps[0].coords:
        # every coordinate vanished; keep one zero coordinate so the shape stays valid
        comps = [ComponentGerm((Jet.zero(N),)) for _ in range(F.k)]
        change = [[Fraction(0)] * n]
    return Multigerm(tuple(comps), F.separation), change


def essential_stabilize(F: Multigerm) -> tuple[Multigerm, list[list[Fraction]]]:
    """Like :func:`stabilize`, but also drops coordinates lying on a smooth hypersurface.

    A linear form ``l`` is removable when ``l(F)`` agrees, to the known order,
    with the pullback of a function of order at least two: then ``l`` minus
    that function is a coordinate vanishing on every branch.  The germ is
    projected onto coordinates whose residuals stay independent; the rows of
    the returned matrix give those coordinates in terms of the input ones
    (valid modulo the dropped nonlinear relations).
    """
    G, change = stabilize(F)
    N, n = G.truncation, G.ambient_dim
    if n <= 1:
        return G, change
    caches = [PullbackCache(c) for c in G.components]

    def vec(jets) -> dict[int, Scalar]:
        out = {}
        for i, j in enumerate(jets):
            for e, x in j.items():
                if 1 <= e <= N:
                    out[i * N + e - 1] = x
        return out

    ech = Echelon()
    for alpha in monomials(n, 2, N):
        if all(pc.order(alpha) > N for pc in caches):
            continue
        v = vec([pc(alpha) if pc.order(alpha) <= N else Jet.zero(N) for pc in caches])
        if v:
            ech.add(v)
    keep, res = [], Echelon()
    for j in range(n):
        rem, _ = ech.reduce(vec([c.coords[j] for c in G.components]))
        if res.add(rem):
            keep.append(j)
    if len(keep) == n:
        return G, change
    comps = tuple(ComponentGerm(tuple(c.coords[j] for j in keep)) for c in G.components)
    return Multigerm(comps, G.separation), [change[j] for j in keep]


@dataclass(frozen=True)
class SeparationResult:
    verified: bool
    pair: tuple[int, int] | None = None
    reasons: tuple[str, ...] = ()

    def __str__(self) -> str:
        return "verified" if self.verified else f"unverified{self.pair}"


def _parallel(u: Sequence[Scalar], v: Sequence[Scalar]) -> bool:
    n = len(u)
    return all(u[a] * v[b] == u[b] * v[a] for a in range(n) for b in range(a + 1, n))


def _separating_function(F: Multigerm, i: int, j: int, max_degree: int = 3) -> str | None:
    """Look for a polynomial vanishing on branch ``i`` to the visible order but not on ``j``.

    If the images coincided, ``ord(f_j^* phi) >= ord(f_i^* phi) * mult_j / mult_i``
    for every ``phi``; exhibiting ``phi`` that violates this certifies distinct images.
    """
    ci, cj = F.components[i], F.components[j]
    N = F.truncation
    mi, mj = multiplicity(ci), multiplicity(cj)
    pi, pj = PullbackCache(ci), PullbackCache(cj)
    mons = list(monomials(F.ambient_dim, 1, max_degree))
    # kernel of phi -> f_i^* phi (mod t^(N+1)): every dependent monomial gives one element
    ech = Echelon(track=True)
    for idx, a in enumerate(mons):
        v = dict(pi(a).items())
        if not ech.add(v):
            rem, combo = ech.reduce(v)
            # v - sum combo * inserted = 0, so phi = x^a_idx - sum combo[k] x^a_k vanishes
            phi = {idx: Fraction(1)}
            for kk, c in combo.items():
                phi[kk] = phi.get(kk, 0) - c
            img = Jet.zero(N)
            for kk, c in phi.items():
                img = img + pj(mons[kk]).scale(c)
            if not img.is_zero() and img.order() * mi <= N * mj:
                return "function " + _format_poly(phi, mons)
    return None


def _format_poly(phi: dict[int, Fraction], mons: list[Monomial]) -> str:
    parts = []
    for k, c in sorted(phi.items()):
        mono = "*".join(f"x{j + 1}" + (f"^{a}" if a > 1 else "") for j, a in enumerate(mons[k]) if a)
        parts.append(f"{c}*{mono}")
    return " + ".join(parts)


def separate_images_check(F: Multigerm) -> SeparationResult:
    """Best-effort certificate that distinct components have distinct images.

    A pair is certified when the tangent directions differ, or when a
    polynomial vanishing on one branch (as far as the jets show) has too small
    an order on the other.  Anything else is reported as unverified.
    """
    F.require_nondegenerate()
    reasons = []
    for i, j in itertools.combinations(range(F.k), 2):
        ui = F.components[i].tangent_direction()
        uj = F.components[j].tangent_direction()
        if not _parallel(ui, uj):
            reasons.append(f"{i + 1},{j + 1}: tangent directions differ")
            continue
        why = _separating_function(F, i, j) or _separating_function(F, j, i)
        if why is None:
            return SeparationResult(False, (i + 1, j + 1), tuple(reasons))
        reasons.append(f"{i + 1},{j + 1}: {why}")
    return SeparationResult(True, None, tuple(reasons))


# -- A-changes -------------------------------------------------------------

Poly = dict  # Monomial -> coefficient; a function germ on C^n


def apply_left(F: Multigerm, polys: Sequence[Poly]) -> Multigerm:
    """Compose with the target map ``x -> (p_1(x), ..., p_r(x))``."""
    comps = []
    for comp in F.components:
        cache = PullbackCache(comp)
        coords = []
        for p in polys:
            acc = Jet.zero(comp.truncation)
            for alpha, c in p.items():
                if any(alpha):
                    acc = acc + cache(tuple(alpha)).scale(c)
            coords.append(acc)
        comps.append(ComponentGerm(tuple(coords)))
    return Multigerm(tuple(comps), F.separation)


def apply_right(F: Multigerm, reparams: Sequence[Jet]) -> Multigerm:
    """Substitute ``t -> h_i(t)`` in component ``i``; each ``h_i`` must be a unit."""
    if len(reparams) != F.k:
        raise ValueError("one reparametrization per component")
    comps = []
    for comp, h in zip(F.components, reparams):
        if h.order() != 1:
            raise ValueError("reparametrization must have order exactly 1")
        comps.append(ComponentGerm(tuple(x.compose(h.pad(comp.truncation)) for x in comp.coords)))
    return Multigerm(tuple(comps), F.separation)


def _rand_nonzero(rng: random.Random, bound: int = 5) -> Fraction:
    num = rng.randint(1, bound) * rng.choice((-1, 1))
    return Fraction(num, rng.randint(1, bound))


def random_a_change(F: Multigerm, rng: random.Random, degree: int = 2,
                    sparsity: float = 0.5) -> Multigerm:
    """Apply a random invertible left change and random unit reparametrizations.

    The linear part is a random invertible matrix with small rational entries,
    higher terms are added with probability ``sparsity`` up to ``degree``.
    """
    n, N = F.ambient_dim, F.truncation
    while True:
        A = [[Fraction(rng.randint(-2, 2)) for _ in range(n)] for _ in range(n)]
        if _det(A) != 0:
            break
    polys = []
    for i in range(n):
        p: Poly = {}
        for j in range(n):
            if A[i][j]:
                alpha = [0] * n
                alpha[j] = 1
                p[tuple(alpha)] = A[i][j]
        for alpha in monomials(n, 2, degree):
            if rng.random() < sparsity:
                p[alpha] = p.get(alpha, 0) + _rand_nonzero(rng)
        polys.append(p)
    G = apply_left(F, polys)
    hs = []
    for _ in range(F.k):
        c = {1: _rand_nonzero(rng)}
        for e in range(2, min(N, degree + 1) + 1):
            if rng.random() < sparsity:
                c[e] = _rand_nonzero(rng)
        hs.append(Jet(c, N))
    return apply_right(G, hs)


def _det(A: list[list[Fraction]]) -> Fraction:
    M = [row[:] for row in A]
    n = len(M)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            if f:
                for k in range(c, n):
                    M[r][k] -= f * M[c][k]
    return det
