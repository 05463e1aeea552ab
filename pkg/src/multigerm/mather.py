"""Orbit membership of affine jet families by tangent containment and constant rank."""

from __future__ import annotations

from dataclasses import dataclass

from .germs import Multigerm
from .sampling import make_rng
from .tangent import AffineFamily, GroupFilter, JetSpaceBasis, tangent_space

__all__ = ["AffineFamily", "MatherReport", "MergeResult", "mather_check", "merge_parameter"]


@dataclass
class MatherReport:
    contained: bool
    constant_rank: bool
    ranks: list[int]
    points: list[tuple]
    level: int
    filter: str
    witness_vector: str | None = None
    witness_point: tuple | None = None
    domain_note: str = ""

    @property
    def single_orbit(self) -> bool:
        return self.contained and self.constant_rank

    def to_json(self) -> dict:
        out = {
            "contained": self.contained,
            "constant_rank": self.constant_rank,
            "ranks": self.ranks,
            "points": [[str(x) for x in p] for p in self.points],
            "level": self.level,
            "filter": self.filter,
            "status": "evidence",
            "domain_note": self.domain_note,
        }
        if self.witness_vector is not None:
            out["witness_vector"] = self.witness_vector
            out["witness_point"] = [str(x) for x in self.witness_point]
        return out


def mather_check(X: AffineFamily, m: int, filt: GroupFilter | None = None,
                 samples: int = 5, seed=42) -> MatherReport:
    """Test both orbit conditions at sampled points of ``X``.

    Every direction must lie in the orbit tangent space at every sample, and
    the orbit dimension must agree across samples.  Sampling stands in for the
    generic-point argument, so a positive answer is evidence only.
    """
    if samples < 2 and not X.points:
        raise ValueError("need at least 2 samples")
    filt = filt or GroupFilter.full()
    if X.dim:
        X.check_independent(m)
    rng = make_rng(seed)
    dirs = X.direction_vectors(m) if X.dim else []
    B = JetSpaceBasis(m, X.base.k, X.base.ambient_dim)
    rep = MatherReport(True, True, [], [], m, str(filt), domain_note=X.domain_note)
    pts = X.sample_points(samples, rng) if X.dim else [()] * max(samples, 1)
    for p in pts:
        T = tangent_space(X.point(p), m, filt)
        rep.points.append(p)
        rep.ranks.append(T.rank)
        for d in dirs:
            if not T.contains(d):
                if rep.contained:
                    rep.witness_vector = B.format(d)
                    rep.witness_point = p
                rep.contained = False
    rep.constant_rank = len(set(rep.ranks)) <= 1
    return rep


@dataclass
class MergeResult:
    merged: Multigerm | None
    report: MatherReport
    parameter: int | None = None
    reason: str = ""

    @property
    def refused(self) -> bool:
        return self.merged is None

    def to_json(self) -> dict:
        out = {"merged": str(self.merged) if self.merged else None,
               "parameter": self.parameter, "report": self.report.to_json()}
        if self.refused:
            out["reason"] = self.reason
        return out


def merge_parameter(X: AffineFamily, m: int, filt: GroupFilter | None = None,
                    samples: int = 5, seed=42, exclude_zero: bool | None = None) -> MergeResult:
    """Collapse a one-parameter family to a representative value.

    Returns the member at parameter 0, or at 1 when 0 is excluded from the
    domain, if the family passes :func:`mather_check`; otherwise a refusal
    carrying the failing direction.
    """
    if X.dim != 1:
        raise ValueError("merge_parameter expects exactly one direction")
    rep = mather_check(X, m, filt, samples, seed)
    if not rep.single_orbit:
        why = "direction not tangent to the orbit" if not rep.contained else "orbit dimension varies"
        return MergeResult(None, rep, reason=why)
    if exclude_zero is None:
        exclude_zero = 0 in X.excluded
    value = 1 if exclude_zero else 0
    return MergeResult(X.point((value,)).truncate(m), rep, value)
