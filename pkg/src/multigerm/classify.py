"""Recognition of multigerms against the catalog, with non-simplicity evidence."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping

from .catalog import (
    Catalog,
    CatalogError,
    CatalogInstance,
    Fingerprint,
    branch_invariants,
    default_catalog,
    fingerprint,
)
from .germs import Multigerm, essential_stabilize, jet_of, multiplicity, separate_images_check
from .linalg import Echelon
from .mather import mather_check
from .semigroup import value_semigroup
from .tangent import AffineFamily, GroupFilter, JetSpaceBasis, family_deficiency
from .transversal import complete_transversal, reduce_step, transversal_profile

__all__ = [
    "ClassificationReport",
    "DeterminacyEvidence",
    "LibraryFamily",
    "Verdict",
    "classify",
    "nonsimple_library",
    "rule_screens",
    "verify_determinacy",
]


@dataclass
class Verdict:
    kind: str  # Simple | NotSimpleEvidence | Unknown
    entry_id: str | None = None
    params: dict | None = None
    witness: dict | None = None
    reason: str = ""

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "Simple":
            out["entry"] = self.entry_id
            out["params"] = self.params
        if self.witness is not None:
            out["witness"] = self.witness
        if self.reason:
            out["reason"] = self.reason
        return out

    def __str__(self) -> str:
        if self.kind == "Simple":
            ps = ", ".join(f"{k}={v}" for k, v in (self.params or {}).items())
            return f"Simple({self.entry_id}{', ' + ps if ps else ''})"
        if self.kind == "NotSimpleEvidence":
            return f"NotSimpleEvidence({(self.witness or {}).get('rule', '')})"
        return f"Unknown({self.reason})"


@dataclass
class ClassificationReport:
    verdict: Verdict
    trail: list = field(default_factory=list)
    effort: dict = field(default_factory=dict)
    stabilized: Multigerm | None = None
    change: list | None = None
    fingerprint: Fingerprint | None = None
    ties: list = field(default_factory=list)
    citations: list = field(default_factory=list)
    seed: int = 42

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.to_json(),
            "stabilized": self.stabilized.to_json() if self.stabilized else None,
            "linear_change": [[str(x) for x in row] for row in self.change] if self.change else None,
            "fingerprint": self.fingerprint.to_json() if self.fingerprint else None,
            "trail": self.trail,
            "ties": self.ties,
            "citations": self.citations,
            "effort": self.effort,
            "seed": self.seed,
            "status": "evidence",
        }


# -- rule screens ----------------------------------------------------------------

def _parallel(u, v) -> bool:
    return all(u[a] * v[b] == u[b] * v[a] for a in range(len(u)) for b in range(a + 1, len(u)))


def _distinct_lines(dirs: list) -> int:
    reps: list = []
    for d in dirs:
        if not any(_parallel(d, r) for r in reps):
            reps.append(d)
    return len(reps)


def rule_screens(F: Multigerm) -> Verdict | None:
    """Cheap sufficient conditions for non-simplicity (``F`` already stabilized)."""
    F.require_nondegenerate()
    mults = [multiplicity(c) for c in F.components]
    singular = [i + 1 for i, p in enumerate(mults) if p >= 2]
    if len(singular) >= 3:
        return Verdict("NotSimpleEvidence", witness={
            "rule": "three-singular-components",
            "detail": f"components {singular} have multiplicity >= 2",
        })
    n = F.ambient_dim
    regular = [c.tangent_direction() for c, p in zip(F.components, mults) if p == 1]
    lines = _distinct_lines(regular)
    if n == 2 and lines >= 4:
        return Verdict("NotSimpleEvidence", witness={
            "rule": "cross-ratio",
            "detail": f"{lines} regular branches with distinct tangents in the plane",
        })
    if n >= 2 and lines > n + 1:
        return Verdict("NotSimpleEvidence", witness={
            "rule": "too-many-transverse-regular-branches",
            "detail": f"{lines} distinct tangent lines exceed n+1 = {n + 1}",
        })
    return None


def _non_reduced(F: Multigerm, depth: int) -> Verdict | None:
    # a branch whose achieved orders share a common factor is a multiple cover as far as the jet shows
    for i, c in enumerate(F.components):
        c = c.truncate(depth)
        S = value_semigroup(c, 0, depth)
        g = 0
        for a in S.achieved:
            g = math.gcd(g, a)
        if g > 1:
            return Verdict("NotSimpleEvidence", witness={
                "rule": "non-primitive-branch",
                "detail": f"component {i + 1}: all pullback orders up to {depth} are multiples of {g}",
            })
    return None


# -- obstruction families ------------------------------------------------------------

@dataclass(frozen=True)
class LibraryFamily:
    name: str
    family: AffineFamily
    level: int
    stated_dim: int
    bound: int  # maximal intersection allowed by the argument (dim - 1 for a modulus)
    kind: str  # "deficiency" or "modulus"


def _mg(comps, N) -> Multigerm:
    n = max(len(c) for c in comps)
    return Multigerm.from_strings([list(c) + ["0"] * (n - len(c)) for c in comps], N)


def _monomial_directions(k: int, n: int, N: int, slots) -> tuple[Multigerm, ...]:
    """One direction per (component, coordinate, power) slot."""
    out = []
    for i, j, e in slots:
        comps = [["0"] * n for _ in range(k)]
        comps[i][j] = f"t^{e}"
        out.append(_mg(comps, N))
    return tuple(out)


def _axes(n: int, ambient: int) -> list[list[str]]:
    return [["0"] * j + ["t"] + ["0"] * (ambient - j - 1) for j in range(n)]


def axes_quadratic_family(n: int) -> LibraryFamily:
    N = 3
    base = _mg(_axes(n, n) + [["0"] * n], N)
    slots = [(n, j, e) for j in range(n) for e in (2, 3)]
    fam = AffineFamily(base, _monomial_directions(n + 1, n, N, slots), name=f"F3_2.3 (n={n})", level=N)
    return LibraryFamily(fam.name, fam, N, 2 * n, n + 2, "deficiency")


def axes_cubic_family(n: int) -> LibraryFamily:
    N = 5
    base = _mg(_axes(n, n + 1) + [["0"] * (n + 1)], N)
    slots = [(n, j, e) for j in range(n + 1) for e in (3, 4, 5)]
    fam = AffineFamily(base, _monomial_directions(n + 1, n + 1, N, slots), name=f"F3_2.6 (n={n})", level=N)
    return LibraryFamily(fam.name, fam, N, 3 * n + 3, 2 * n + 4, "deficiency")


def nonsimple_library() -> list[LibraryFamily]:
    """The fixed list of obstruction families used as non-simplicity witnesses."""
    lib = []

    N = 8
    slots = [(1, 0, e) for e in range(3, 9)] + [(1, 1, e) for e in (6, 7, 8)] + [(1, 2, e) for e in (7, 8)]
    fam = AffineFamily(_mg([["t", "0", "0"], ["0", "0", "0"]], N), _monomial_directions(2, 3, N, slots),
                       name="F1.4", level=N)
    lib.append(LibraryFamily("F1.4", fam, N, 11, 10, "deficiency"))

    N = 7
    slots = [(1, j, e) for j in range(3) for e in range(4, 8)]
    fam = AffineFamily(_mg([["t", "0", "0"], ["0", "0", "0"]], N), _monomial_directions(2, 3, N, slots),
                       name="F1.8", level=N)
    lib.append(LibraryFamily("F1.8", fam, N, 12, 11, "deficiency"))

    N = 9
    slots = ([(1, 0, e) for e in (8, 9)] + [(1, 1, e) for e in range(5, 10)]
             + [(1, 2, e) for e in range(6, 10)] + [(1, 3, e) for e in range(7, 10)])
    fam = AffineFamily(_mg([["t", "0", "0", "0"], ["0", "0", "0", "0"]], N), _monomial_directions(2, 4, N, slots),
                       name="F1.10", level=N)
    lib.append(LibraryFamily("F1.10", fam, N, 14, 13, "deficiency"))

    N = 3
    fam = AffineFamily(_mg([["t^2", "t^3"], ["t^2", "0"]], N), (_mg([["0", "0"], ["0", "t^3"]], N),),
                       name="F2.1", level=N, excluded=(0, 1), domain_note="alpha != 0, 1")
    lib.append(LibraryFamily("F2.1", fam, N, 1, 0, "modulus"))

    N = 5
    fam = AffineFamily(_mg([["t^2", "t^3", "0"], ["t^5", "t^4", "t^3"]], N),
                       (_mg([["0", "0", "0"], ["0", "t^5", "0"]], N),),
                       name="F2.5", level=N, domain_note="alpha arbitrary")
    lib.append(LibraryFamily("F2.5", fam, N, 1, 0, "modulus"))

    N = 2
    fam = AffineFamily(_mg([["t", "0"], ["t", "t^2"], ["t", "0"]], N), (_mg([["0", "0"], ["0", "0"], ["0", "t^2"]], N),),
                       name="F3_0.2", level=N, excluded=(0, 1), domain_note="alpha != 0, 1")
    lib.append(LibraryFamily("F3_0.2", fam, N, 1, 0, "modulus"))

    lib.append(axes_quadratic_family(3))
    lib.append(axes_cubic_family(2))

    N = 7
    slots = [(2, j, e) for j in range(4) for e in range(4, 8)]
    fam = AffineFamily(_mg(_axes(2, 4) + [["0"] * 4], N), _monomial_directions(3, 4, N, slots),
                       name="F3_2.9", level=N)
    lib.append(LibraryFamily("F3_2.9", fam, N, 16, 14, "deficiency"))

    N = 3
    slots = [(i, j, e) for i in (1, 2) for j in range(3) for e in (2, 3)]
    fam = AffineFamily(_mg([["t", "0", "0"], ["0"] * 3, ["0"] * 3], N), _monomial_directions(3, 3, N, slots),
                       name="F3_3.1", level=N)
    lib.append(LibraryFamily("F3_3.1", fam, N, 12, 11, "deficiency"))
    return lib


def library_family(name: str) -> LibraryFamily:
    for f in nonsimple_library():
        if f.name == name:
            return f
    raise KeyError(f"no library family named {name!r}")


def _family_member(F: Multigerm, lf: LibraryFamily) -> tuple | None:
    """Parameters if the ``level``-jet of ``F`` is a member with admissible parameters."""
    fam = lf.family
    L = lf.level
    if F.k != fam.base.k or F.ambient_dim != fam.base.ambient_dim or F.truncation < L:
        return None
    B = JetSpaceBasis(L, F.k, F.ambient_dim)
    diff = B.encode(F.truncate(L))
    for p, c in B.encode(fam.base).items():
        diff[p] = diff.get(p, 0) - c
        if not diff[p]:
            del diff[p]
    ech = Echelon(track=True)
    ech.extend(fam.direction_vectors(L))
    rem, combo = ech.reduce(diff)
    if rem:
        return None
    lam = tuple(combo.get(i, 0) for i in range(fam.dim))
    if fam.nonzero and any(x == 0 for x in lam):
        return None
    if any(x in fam.excluded for x in lam):
        return None
    return lam


# -- determinacy -----------------------------------------------------------------

@dataclass
class DeterminacyEvidence:
    claimed: int
    scan_to: int
    necessary_ok: bool
    levels: list
    failure: dict | None = None

    def to_json(self) -> dict:
        return {
            "claimed": self.claimed,
            "necessary_ok": self.necessary_ok,
            "levels": self.levels,
            "failure": self.failure,
            "note": f"verified through level {self.scan_to}",
        }


def verify_determinacy(F: Multigerm, d: int, scan_to: int) -> DeterminacyEvidence:
    """Transversals of ``j^d F`` at levels ``d+1..scan_to`` must all be trivial."""
    if scan_to <= d:
        raise ValueError("scan_to must exceed the claimed degree")
    if F.truncation < scan_to + 1:
        raise ValueError(f"scanning to level {scan_to} needs truncation >= {scan_to + 1} (got {F.truncation})")
    J = jet_of(F, d).pad(scan_to)
    _, trs = transversal_profile(J, scan_to)
    ev = DeterminacyEvidence(d, scan_to, True, [])
    for tr in trs[d - 1:]:
        ev.levels.append({"level": tr.level, "slice_rank": tr.slice_rank, "slice_dim": tr.slice_dim,
                          "trivial": tr.is_trivial})
        if not tr.is_trivial and ev.necessary_ok:
            ev.necessary_ok = False
            ev.failure = tr.to_json()
    return ev


# -- catalog search --------------------------------------------------------------------

_CAND_CACHE: dict = {}
_FP_CACHE: dict = {}
_BRANCH_CACHE: dict = {}


def _admissible_upto(catalog: Catalog, cap: int, depth: int, k: int) -> list[CatalogInstance]:
    """Instances with ``k`` branches, parameters at most ``cap`` and exponents at most ``depth``."""
    key = (id(catalog), cap, depth, k)
    got = _CAND_CACHE.get(key)
    if got is not None:
        return got
    out = []
    for entry in catalog:
        names = entry.param_names
        ranges = [range(lo, max(cap, lo) + 1) for _, lo in entry.params]
        for values in itertools.product(*ranges):
            env = dict(zip(names, values))
            if not entry.admissible(env):
                continue
            try:
                comps, _ = entry.layout(env)
                if len(comps) != k or entry.max_exponent(env) > depth:
                    continue
                out.append(catalog.instantiate(entry.id, env))
            except CatalogError:
                continue
    _CAND_CACHE[key] = out
    return out


def _instance_fingerprint(inst: CatalogInstance, depth: int) -> Fingerprint:
    key = (inst.id, tuple(sorted(inst.params.items())), depth)
    fp = _FP_CACHE.get(key)
    if fp is None:
        G = inst.germ.pad(max(depth, inst.germ.truncation))
        fp = fingerprint(G, depth)
        _FP_CACHE[key] = fp
    return fp


def _instance_branches(inst: CatalogInstance, depth: int) -> tuple:
    key = (inst.id, tuple(sorted(inst.params.items())), depth)
    b = _BRANCH_CACHE.get(key)
    if b is None:
        b = branch_invariants(inst.germ.pad(max(depth, inst.germ.truncation)), depth)
        _BRANCH_CACHE[key] = b
    return b


def _search(catalog: Catalog, G: Multigerm, fp: Fingerprint, depth: int) -> list[CatalogInstance]:
    cap = max(depth, G.k, G.ambient_dim) + 1
    matches = []
    for inst in _admissible_upto(catalog, cap, depth, G.k):
        if inst.germ.ambient_dim < G.ambient_dim or _instance_branches(inst, depth) != fp.branches:
            continue
        other = _instance_fingerprint(inst, depth)
        if other.cheap != fp.cheap:
            continue
        if other == fp:
            matches.append(inst)
    matches.sort(key=lambda i: (i.entry.key, tuple(sorted(i.params.items()))))
    return matches


def _trail(G: Multigerm, depth: int, fp: Fingerprint, other: Fingerprint | None, seed) -> list:
    steps = []
    kn = G.k * G.ambient_dim
    for L in range(2, depth + 1):
        step = {
            "level": L,
            "orbit_rank": fp.orbit[L - 1],
            "transversal_dim": kn - (fp.unipotent[L - 1] - fp.unipotent[L - 2]),
        }
        if other is not None:
            step["candidate_orbit_rank"] = other.orbit[L - 1]
            step["candidate_transversal_dim"] = kn - (other.unipotent[L - 1] - other.unipotent[L - 2])
        if any(c.degenerate for c in jet_of(G, L - 1).components):
            step["residual"] = None  # the lower jet still has a vanishing branch
            steps.append(step)
            continue
        red = reduce_step(jet_of(G, L), jet_of(G, L - 1))
        step["residual"] = not red.is_zero
        if not red.is_zero:
            base = jet_of(G, L - 1).pad(L)
            fam = AffineFamily(base, (red.t,), points=((0,), (1,)))
            rep = mather_check(fam, L, GroupFilter.full(), samples=2, seed=seed)
            step["residual_removable"] = rep.single_orbit
        steps.append(step)
    return steps


def _own_family_deficiency(G: Multigerm, depth: int, seed, samples: int) -> dict | None:
    for m in range(1, depth):
        if any(c.degenerate for c in jet_of(G, m).components):
            continue
        tr = complete_transversal(G, m)
        if tr.is_trivial:
            continue
        base = jet_of(G, m + 1)
        fam = AffineFamily(base, tuple(tr.vectors()), name=f"own jet family at level {m + 1}", nonzero=False)
        rep = family_deficiency(fam, m + 1, GroupFilter.full(), samples=samples, seed=seed)
        if rep.verdict == "NotSimpleEvidence":
            return {"rule": "jet-family-deficiency", "level": m + 1, "report": rep.to_json()}
    return None


def classify(F: Multigerm, max_level: int | None = None, seed=42, catalog: Catalog | None = None,
             samples: int = 3, with_trail: bool = True) -> ClassificationReport:
    """Stabilize, screen, fingerprint and match ``F`` against the catalog.

    ``max_level`` (default ``truncation - 1``) is the deepest jet used; any
    candidate whose recognition needs a longer jet yields an ``Unknown``.
    """
    catalog = catalog or default_catalog()
    F.require_nondegenerate()
    depth = F.truncation - 1 if max_level is None else max_level
    if depth < 1 or depth + 1 > F.truncation:
        raise ValueError(f"max_level must satisfy 1 <= max_level <= truncation - 1 (got {depth})")
    report = ClassificationReport(Verdict("Unknown"), seed=seed if isinstance(seed, int) else 42)
    report.effort = {"levels_scanned": 0, "samples": 0, "candidates": 0}

    sep = separate_images_check(F)
    if not sep.verified:
        report.verdict = Verdict("Unknown", reason=f"image separation unverified for components {sep.pair}")
        return report

    G, change = essential_stabilize(F.truncate(depth))
    report.stabilized, report.change = G, change

    screen = rule_screens(G)
    if screen is not None:
        report.verdict = screen
        report.citations.append(screen.witness["rule"])
        return report
    nr = _non_reduced(G, depth)
    if nr is not None:
        report.verdict = nr
        report.citations.append(nr.witness["rule"])
        return report
    for lf in nonsimple_library():
        lam = _family_member(G, lf)
        if lam is not None:
            report.verdict = Verdict("NotSimpleEvidence", witness={
                "rule": "library-family", "family": lf.name, "parameters": [str(x) for x in lam],
            })
            report.citations.append(lf.name)
            return report

    fp = fingerprint(G, depth, stabilized=True)
    report.fingerprint = fp
    matches = _search(catalog, G, fp, depth)
    report.effort["candidates"] = len(matches)
    report.effort["levels_scanned"] = depth
    if matches:
        best = matches[0]
        report.ties = [m.label() for m in matches[1:]]
        if best.requirement > depth:
            report.verdict = Verdict("Unknown", reason=(
                f"candidate {best.label()} needs the {best.requirement}-jet, only {depth} available"))
            return report
        if with_trail:
            report.trail = _trail(G, depth, fp, _instance_fingerprint(best, depth), seed)
        report.verdict = Verdict("Simple", best.id, dict(best.params))
        report.citations.append(best.id)
        return report

    wit = _own_family_deficiency(G, depth, seed, samples)
    report.effort["samples"] = samples
    if wit is not None:
        report.verdict = Verdict("NotSimpleEvidence", witness=wit)
        report.citations.append(wit["rule"])
        return report
    report.verdict = Verdict("Unknown", reason=f"no catalog match up to level {depth}")
    return report


# -- catalog verification ----------------------------------------------------------

def round_trip(entry_id: str, params: Mapping[str, int], catalog: Catalog | None = None,
               max_extension: int = 4, seed=42) -> tuple[ClassificationReport, int]:
    """Classify an instance; if candidates tie, compare just those on longer jets.

    The instance is an exact polynomial germ, so padding it is legitimate.
    Returns the report and how many extra levels were needed.
    """
    catalog = catalog or default_catalog()
    inst = catalog.instantiate(entry_id, params)
    N = inst.germ.truncation
    rep = classify(inst.germ.pad(N), seed=seed, catalog=catalog)
    if not rep.ties or rep.verdict.kind != "Simple":
        return rep, 0
    depth = N - 1
    tied = set(rep.ties)
    pool = [catalog.instantiate(rep.verdict.entry_id, rep.verdict.params)]
    pool += [i for i in _admissible_upto(catalog, max(depth, inst.germ.k, inst.germ.ambient_dim) + 1, depth,
                                      inst.germ.k) if i.label() in tied]
    for ext in range(1, max_extension + 1):
        d = depth + ext
        G, _ = essential_stabilize(inst.germ.pad(d + 1).truncate(d))
        fp = fingerprint(G, d, stabilized=True)
        pool = [i for i in pool if _instance_fingerprint(i, d) == fp]
        if len(pool) <= 1:
            break
    if pool:
        best = pool[0]
        rep.verdict = Verdict("Simple", best.id, dict(best.params))
        rep.citations = [best.id]
    rep.ties = [i.label() for i in pool[1:]]
    rep.effort["levels_scanned"] = d
    return rep, ext


@dataclass
class DistinctnessResult:
    part: str
    count: int
    depth: int
    ties: list  # groups of instance labels still sharing a fingerprint
    resolved: list  # (labels, depth at which they separated)

    @property
    def ok(self) -> bool:
        return not self.ties

    def to_json(self) -> dict:
        return {"part": self.part, "instances": self.count, "depth": self.depth, "ok": self.ok,
                "ties": self.ties, "resolved": [{"instances": g, "depth": d} for g, d in self.resolved]}


def _groups(insts, depth):
    by: dict = {}
    for inst in insts:
        by.setdefault(_instance_fingerprint(inst, depth), []).append(inst)
    return [g for g in by.values() if len(g) > 1]


def fingerprint_distinctness(catalog: Catalog, part: str, weight_bound: int = 9,
                             max_extension: int = 4) -> DistinctnessResult:
    insts = [i for e in catalog if e.part == part for i in catalog.enumerate(e.id, weight_bound)]
    depth = max((i.requirement for i in insts), default=1)
    res = DistinctnessResult(part, len(insts), depth, [], [])
    for group in _groups(insts, depth):
        pending, d = group, depth
        while pending and d < depth + max_extension:
            d += 1
            still = _groups(pending, d)
            left = {id(i) for g in still for i in g}
            split = [i.label() for i in pending if id(i) not in left]
            if split:
                res.resolved.append((split, d))
            pending = [i for g in still for i in g]
        if pending:
            res.ties.append([i.label() for i in pending])
    return res
