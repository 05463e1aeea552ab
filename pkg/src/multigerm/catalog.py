"""The table of stably simple normal forms as data: loading, instantiation, enumeration, fingerprints."""

from __future__ import annotations

import ast
import itertools
import json
import os
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Mapping

import jsonschema

from .germs import Multigerm, essential_stabilize
from .semigroup import invariant_pair, value_semigroup
from .tangent import GroupFilter, rank_profile

__all__ = [
    "CATALOG_ENV",
    "Catalog",
    "CatalogError",
    "CatalogInstance",
    "ConstraintViolation",
    "Fingerprint",
    "NormalFormEntry",
    "default_catalog",
    "enumerate_instances",
    "fingerprint",
    "instantiate",
    "load_catalog",
    "safe_eval",
]

CATALOG_ENV = "MULTIGERM_CATALOG"


class CatalogError(ValueError):
    pass


class ConstraintViolation(CatalogError):
    def __init__(self, entry_id: str, constraint: str, params: Mapping[str, int], exclusion=False,
                 duplicate_of: str | None = None):
        shown = ", ".join(f"{k}={v}" for k, v in params.items())
        if duplicate_of:
            msg = f"{entry_id}: {shown} lists the same orbit as {duplicate_of} (case '{constraint}')"
        elif exclusion:
            msg = f"{entry_id}: {shown} falls in the excluded case '{constraint}'"
        else:
            msg = f"{entry_id}: constraint '{constraint}' violated by {shown}"
        super().__init__(msg)
        self.constraint = constraint
        self.exclusion = exclusion
        self.duplicate_of = duplicate_of


# -- expressions ---------------------------------------------------------------

_ALLOWED = (
    ast.Expression, ast.BoolOp, ast.And, ast.Or, ast.UnaryOp, ast.USub, ast.UAdd, ast.Not,
    ast.BinOp, ast.Add, ast.Sub, ast.Mult, ast.FloorDiv, ast.Mod, ast.Compare, ast.Lt,
    ast.LtE, ast.Gt, ast.GtE, ast.Eq, ast.NotEq, ast.Name, ast.Load, ast.Constant,
)


def _implicit_products(text: str) -> str:
    text = text.replace("−", "-").replace("≤", "<=").replace("≥", ">=").replace("≠", "!=")
    text = re.sub(r"(?<![=<>!])=(?!=)", "==", text)
    text = re.sub(r"(\d)\s*([A-Za-z(])", r"\1*\2", text)
    text = re.sub(r"\)\s*([A-Za-z0-9(])", r")*\1", text)
    return text


@lru_cache(maxsize=4096)
def _compile(text: str):
    tree = ast.parse(_implicit_products(text), mode="eval")
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED):
            raise CatalogError(f"disallowed syntax in expression {text!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, int):
            raise CatalogError(f"only integer literals allowed in {text!r}")
    return compile(tree, "<catalog>", "eval")


def safe_eval(text: str, env: Mapping[str, int]):
    """Evaluate an integer expression or constraint such as ``m < n <= 2m``."""
    code = _compile(str(text))
    missing = [n for n in code.co_names if n not in env]
    if missing:
        raise CatalogError(f"unknown parameter(s) {missing} in {text!r}")
    return eval(code, {"__builtins__": {}}, dict(env))


_EXP = re.compile(r"t\^\{([^}]*)\}")


def _expand_coord(text: str, env: Mapping[str, int]) -> str:
    return _EXP.sub(lambda m: f"t^{safe_eval(m.group(1), env)}", text)


def _exponents(text: str) -> list[int]:
    out = []
    for term in text.replace("-", "+").split("+"):
        term = term.strip()
        if not term or term == "0":
            continue
        m = re.search(r"t(?:\^(\d+))?$", term)
        out.append(int(m.group(1) or 1) if m else 0)
    return out


# -- entries -------------------------------------------------------------------

@dataclass(frozen=True)
class NormalFormEntry:
    id: str
    part: str
    header: str
    params: tuple[tuple[str, int], ...]  # (name, lower bound) in enumeration order
    components: tuple
    constraints: tuple[str, ...]
    exclusions: tuple[str, ...]
    determinacy: object = None
    duplicates: tuple[tuple[str, str], ...] = ()  # (condition, id of the entry listing the same orbit)
    header_layout: Mapping = field(default_factory=dict, compare=False, hash=False)

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(p for p, _ in self.params)

    @property
    def key(self) -> tuple:
        return tuple(int(x) for x in self.id.split("."))

    def _violation(self, params: Mapping[str, int], allow_duplicates: bool) -> tuple | None:
        """First failed condition as ``(text, kind, other)``, or None."""
        for p, lo in self.params:
            if params[p] < lo:
                return f"{p} >= {lo}", "constraint", None
        for c in self.constraints:
            if not safe_eval(c, params):
                return c, "constraint", None
        for c in self.exclusions:
            if safe_eval(c, params):
                return c, "exclusion", None
        if not allow_duplicates:
            for c, other in self.duplicates:
                if safe_eval(c, params):
                    return c, "duplicate", other
        return None

    def check(self, params: Mapping[str, int], allow_duplicates: bool = False) -> None:
        names = set(self.param_names)
        if set(params) != names:
            raise CatalogError(
                f"{self.id}: expected parameters {sorted(names)}, got {sorted(params)}"
            )
        for p, _ in self.params:
            v = params[p]
            if not isinstance(v, int) or isinstance(v, bool):
                raise CatalogError(f"{self.id}: parameter {p} must be an integer")
        bad = self._violation(params, allow_duplicates)
        if bad is not None:
            text, kind, other = bad
            raise ConstraintViolation(self.id, text, params, exclusion=kind == "exclusion", duplicate_of=other)

    def duplicate_of(self, params: Mapping[str, int]) -> str | None:
        for c, other in self.duplicates:
            if safe_eval(c, params):
                return other
        return None

    def admissible(self, params: Mapping[str, int], allow_duplicates: bool = False) -> bool:
        if set(params) != set(self.param_names):
            return False
        return self._violation(params, allow_duplicates) is None

    def stated_determinacy(self, params: Mapping[str, int]) -> int | None:
        d = self.determinacy
        if d is None:
            return None
        if isinstance(d, list):
            for case in d:
                if safe_eval(case["when"], params):
                    return safe_eval(case["value"], params)
            return None
        return safe_eval(d, params)

    def _expand(self, comp: list, env: Mapping[str, int]) -> list[str]:
        out = []
        for item in comp:
            if isinstance(item, dict):
                count = safe_eval(item["repeat"], env)
                if count < 0:
                    raise CatalogError(f"{self.id}: negative repeat count {item['repeat']!r}")
                out.extend([_expand_coord(item["coord"], env)] * count)
            else:
                out.append(_expand_coord(item, env))
        return out

    def max_exponent(self, params: Mapping[str, int]) -> int:
        comps, _ = self.layout(params)
        return max(e for c in comps for x in c for e in _exponents(x))

    def layout(self, params: Mapping[str, int]) -> tuple[list[list[str]], list[list[str]]]:
        """Header components and written components as coordinate strings."""
        h = self.header_layout
        before, after = [], []
        if "axes" in h:
            n = safe_eval(h["axes"], params)
            before = [["0"] * j + ["t"] + ["0"] * (n - j - 1) for j in range(n)]
        before += [self._expand(c, params) for c in h.get("before", [])]
        after = [self._expand(c, params) for c in h.get("after", [])]
        written = [self._expand(c, params) for c in self.components]
        return before + written + after, before + after

    def header_is_fixed(self) -> bool:
        """Headers without parameters do not count towards the weight."""
        h = self.header_layout
        if "axes" in h and not str(h["axes"]).isdigit():
            return False
        return "{" not in json.dumps([h.get("before", []), h.get("after", [])])

    def weight(self, params: Mapping[str, int]) -> int:
        comps, header = self.layout(params)
        total = sum(e for c in comps for x in c for e in _exponents(x))
        if self.header_is_fixed():
            total -= sum(e for c in header for x in c for e in _exponents(x))
        return total


@dataclass
class CatalogInstance:
    entry: NormalFormEntry
    params: dict[str, int]
    germ: Multigerm
    weight: int
    determinacy: int | None
    max_exponent: int

    @property
    def id(self) -> str:
        return self.entry.id

    @property
    def requirement(self) -> int:
        """Jet order needed to recognise this instance."""
        return max(self.determinacy or 0, self.max_exponent)

    def label(self) -> str:
        if not self.params:
            return self.id
        return self.id + "(" + ", ".join(f"{k}={v}" for k, v in self.params.items()) + ")"

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "params": self.params,
            "weight": self.weight,
            "stated_determinacy": self.determinacy,
            "multigerm": self.germ.to_json(),
        }


# -- catalog -------------------------------------------------------------------

_SCHEMA = {
    "type": "object",
    "required": ["format", "version", "headers", "entries"],
    "properties": {
        "format": {"const": "multigerm-catalog"},
        "version": {"type": "integer", "minimum": 1},
        "headers": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "properties": {
                    "axes": {"type": "string"},
                    "before": {"$ref": "#/$defs/components"},
                    "after": {"$ref": "#/$defs/components"},
                },
                "additionalProperties": False,
            },
        },
        "entries": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "part", "header", "params", "components", "constraints", "exclusions"],
                "properties": {
                    "id": {"type": "string", "pattern": r"^\d+(\.\d+){1,2}$"},
                    "part": {"type": "string"},
                    "header": {"type": "string"},
                    "params": {
                        "type": "object",
                        "propertyNames": {"enum": ["m", "n", "k", "l", "s", "r"]},
                        "additionalProperties": {"type": "integer", "minimum": 0},
                    },
                    "components": {"$ref": "#/$defs/components"},
                    "constraints": {"type": "array", "items": {"type": "string"}},
                    "exclusions": {"type": "array", "items": {"type": "string"}},
                    "determinacy": {
                        "oneOf": [
                            {"type": "string"},
                            {"type": "array", "items": {
                                "type": "object", "required": ["when", "value"],
                                "properties": {"when": {"type": "string"}, "value": {"type": "string"}},
                                "additionalProperties": False,
                            }},
                        ]
                    },
                    "duplicates": {"type": "array", "items": {
                        "type": "object", "required": ["when", "of"],
                        "properties": {"when": {"type": "string"}, "of": {"type": "string"}},
                        "additionalProperties": False,
                    }},
                    "note": {"type": "string"},
                },
                "additionalProperties": False,
            },
        },
    },
    "$defs": {
        "components": {
            "type": "array",
            "items": {
                "type": "array",
                "items": {
                    "oneOf": [
                        {"type": "string"},
                        {"type": "object", "required": ["repeat", "coord"],
                         "properties": {"repeat": {"type": "string"}, "coord": {"type": "string"}},
                         "additionalProperties": False},
                    ]
                },
            },
        }
    },
}


class Catalog:
    def __init__(self, data: dict, source: str = "<memory>"):
        try:
            jsonschema.validate(data, _SCHEMA)
        except jsonschema.ValidationError as exc:
            path = "/".join(str(p) for p in exc.absolute_path)
            raise CatalogError(f"{source}: schema violation at {path or '<root>'}: {exc.message}") from exc
        self.version = data["version"]
        self.source = source
        self.headers = data["headers"]
        self.entries: dict[str, NormalFormEntry] = {}
        for e in data["entries"]:
            if e["id"] in self.entries:
                raise CatalogError(f"duplicate entry id {e['id']}")
            if e["header"] not in self.headers:
                raise CatalogError(f"{e['id']}: unknown header {e['header']!r}")
            self.entries[e["id"]] = NormalFormEntry(
                id=e["id"],
                part=e["part"],
                header=e["header"],
                params=tuple(e["params"].items()),
                components=tuple(e["components"]),
                constraints=tuple(e["constraints"]),
                exclusions=tuple(e["exclusions"]),
                determinacy=e.get("determinacy"),
                duplicates=tuple((d["when"], d["of"]) for d in e.get("duplicates", ())),
                header_layout=self.headers[e["header"]],
            )
        self._fp_cache: dict = {}

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(sorted(self.entries.values(), key=lambda e: e.key))

    def __getitem__(self, entry_id: str) -> NormalFormEntry:
        try:
            return self.entries[entry_id]
        except KeyError:
            raise CatalogError(f"unknown catalog entry {entry_id!r}") from None

    def parts(self) -> dict[str, list[NormalFormEntry]]:
        out: dict[str, list[NormalFormEntry]] = {}
        for e in self:
            out.setdefault(e.part, []).append(e)
        return out

    def instantiate(self, entry_id: str, params: Mapping[str, int] | None = None,
                    truncation: int | None = None, allow_duplicates: bool = False) -> CatalogInstance:
        entry = self[entry_id]
        params = dict(params or {})
        entry.check(params, allow_duplicates)
        comps, _ = entry.layout(params)
        n = max(len(c) for c in comps)
        max_exp = max(e for c in comps for x in c for e in _exponents(x))
        det = entry.stated_determinacy(params)
        need = max(det or 0, max_exp)
        N = truncation if truncation is not None else need + 1
        germ = Multigerm.from_strings([c + ["0"] * (n - len(c)) for c in comps], N)
        return CatalogInstance(entry, params, germ, entry.weight(params), det, max_exp)

    def _shell(self, entry: NormalFormEntry, v: int):
        """Admissible ``(weight, values, env)`` whose largest parameter equals ``v``."""
        names = entry.param_names
        ranges = [range(lo, max(lo, v) + 1) for _, lo in entry.params]
        for values in itertools.product(*ranges):
            if max(values) != v:
                continue
            env = dict(zip(names, values))
            if not entry.admissible(env):
                continue
            try:
                yield entry.weight(env), values, env
            except CatalogError:
                continue

    def assignments(self, entry_id: str, weight_bound: int) -> list[dict[str, int]]:
        """All admissible parameter assignments of weight at most ``weight_bound``."""
        entry = self[entry_id]
        if not entry.params:
            return [{}] if entry.weight({}) <= weight_bound else []
        # each parameter enters some exponent or a repeat count, so it never exceeds the weight
        out = []
        for v in range(min(lo for _, lo in entry.params), weight_bound + 1):
            out.extend(x for x in self._shell(entry, v) if x[0] <= weight_bound)
        out.sort(key=lambda x: (x[0], x[1]))
        return [env for _, _, env in out]

    def enumerate(self, entry_id: str, weight_bound: int, truncation: int | None = None) -> list[CatalogInstance]:
        return [self.instantiate(entry_id, p, truncation) for p in self.assignments(entry_id, weight_bound)]

    def smallest(self, entry_id: str, count: int = 2, limit: int = 64) -> list[dict[str, int]]:
        """The ``count`` admissible assignments of least weight (ties by parameter tuple)."""
        entry = self[entry_id]
        if not entry.params:
            return [{}][:count]
        found = []
        for v in range(min(lo for _, lo in entry.params), limit + 1):
            found.extend(self._shell(entry, v))
            found.sort(key=lambda x: (x[0], x[1]))
            # anything not yet seen has a parameter above v, hence weight above v
            if len(found) >= count and found[count - 1][0] <= v:
                break
        return [env for _, _, env in found[:count]]


def load_catalog(path: str | os.PathLike | None = None) -> Catalog:
    if path is None:
        path = os.environ.get(CATALOG_ENV) or None
    if path is None:
        text = resources.files("multigerm").joinpath("data/catalog.json").read_text()
        source = "builtin catalog"
    else:
        with open(path) as fh:
            text = fh.read()
        source = str(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"{source}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return Catalog(data, source)


_DEFAULT: Catalog | None = None


def default_catalog() -> Catalog:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_catalog()
    return _DEFAULT


def instantiate(entry_id: str, params: Mapping[str, int] | None = None, truncation: int | None = None,
                catalog: Catalog | None = None, allow_duplicates: bool = False) -> CatalogInstance:
    return (catalog or default_catalog()).instantiate(entry_id, params, truncation, allow_duplicates)


def enumerate_instances(entry_id: str, weight_bound: int, catalog: Catalog | None = None) -> list[CatalogInstance]:
    return (catalog or default_catalog()).enumerate(entry_id, weight_bound)


# -- fingerprints --------------------------------------------------------------

@dataclass(frozen=True)
class Fingerprint:
    """A-invariant summary of a multigerm at a fixed jet depth."""

    depth: int
    k: int
    ambient_dim: int
    branches: tuple  # sorted (multiplicity, invariant pair, S_0 up to depth)
    orbit: tuple[int, ...]
    unipotent: tuple[int, ...]  # ranks for the subgroup A_1
    left: tuple[int, ...]
    right: tuple[int, ...]
    parts: tuple = ()  # sorted (size, essential dim, orbit ranks) over sub-multigerms

    @property
    def cheap(self) -> tuple:
        return (self.k, self.ambient_dim, self.branches)

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "k": self.k,
            "ambient_dim": self.ambient_dim,
            "branches": [
                {"multiplicity": b[0], "pair": list(b[1]), "S0": list(b[2])} for b in self.branches
            ],
            "orbit_dims": list(self.orbit),
            "A1_ranks": list(self.unipotent),
            "L_ranks": list(self.left),
            "R_ranks": list(self.right),
            "subgerms": [
                {"size": a, "essential_dim": d, "orbit_dims": list(r)} for a, d, r in self.parts
            ],
        }


def branch_invariants(F: Multigerm, depth: int) -> tuple:
    out = []
    for c in F.components:
        c = c.truncate(depth)
        S = value_semigroup(c, 0, depth)
        out.append((S.period, invariant_pair(c, depth).as_tuple(), S.achieved))
    return tuple(sorted(out, key=repr))


def _subsets(k: int):
    sizes = range(2, k) if k <= 4 else (2, k - 1)
    for size in sizes:
        yield from itertools.combinations(range(k), size)


def subgerm_invariants(G: Multigerm, depth: int) -> tuple:
    out = []
    for idx in _subsets(G.k):
        sub = Multigerm(tuple(G.components[i] for i in idx))
        ess = essential_stabilize(sub)[0].ambient_dim
        out.append((len(idx), ess, tuple(rank_profile(sub, depth, GroupFilter.full()))))
    return tuple(sorted(out))


def fingerprint(F: Multigerm, depth: int, stabilized: bool = False) -> Fingerprint:
    """Invariants of ``j^depth F``; ``F`` is reduced to its essential dimension unless told otherwise."""
    if depth > F.truncation:
        raise ValueError(f"fingerprint depth {depth} exceeds truncation {F.truncation}")
    F.require_nondegenerate()
    G = F.truncate(depth)
    if not stabilized:
        G, _ = essential_stabilize(G)
    return Fingerprint(
        depth=depth,
        k=G.k,
        ambient_dim=G.ambient_dim,
        branches=branch_invariants(G, depth),
        orbit=tuple(rank_profile(G, depth, GroupFilter.full())),
        unipotent=tuple(rank_profile(G, depth, GroupFilter.a_r(1))),
        left=tuple(rank_profile(G, depth, GroupFilter.left())),
        right=tuple(rank_profile(G, depth, GroupFilter.right())),
        parts=subgerm_invariants(G, depth),
    )
