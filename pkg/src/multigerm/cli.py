"""Command-line front end: ``multigerm <command> --input ...``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

from . import __version__
from .catalog import CATALOG_ENV, CatalogError, fingerprint, load_catalog
from .classify import (
    classify,
    fingerprint_distinctness,
    library_family,
    nonsimple_library,
    round_trip,
    verify_determinacy,
)
from .germs import DegenerateComponentError, GermParseError, Multigerm, multiplicity
from .jetalgebra import JetSyntaxError
from .mather import mather_check
from .semigroup import invariant_pair, value_semigroup
from .tangent import AffineFamily, GroupFilter, family_deficiency, tangent_space
from .transversal import complete_transversal

EXIT_OK, EXIT_REFUSAL, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


class InputError(ValueError):
    pass


class Refusal(Exception):
    """Carries a finished report whose verdict is an analytic refusal."""

    def __init__(self, payload: dict):
        super().__init__("refusal")
        self.payload = payload


# -- input handling --------------------------------------------------------------

def _read_source(src: str) -> str:
    if src == "-":
        return sys.stdin.read()
    s = src.strip()
    if s.startswith("{") or s.startswith("("):
        return s
    try:
        with open(src, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {src!r}: {exc.strerror}") from exc


def load_germ(src: str, truncation: int | None) -> Multigerm:
    text = _read_source(src).strip()
    if text.startswith("("):
        if truncation is None:
            raise InputError("inline multigerm text needs --truncation")
        return Multigerm.parse(text, truncation)
    F = Multigerm.from_json(text)
    if truncation is not None:
        if truncation > F.truncation:
            raise InputError(f"--truncation {truncation} exceeds the declared truncation {F.truncation}")
        F = F.truncate(truncation)
    return F


def load_family(src: str) -> AffineFamily:
    text = _read_source(src)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GermParseError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(data, dict) or "base" not in data:
        raise InputError("family JSON needs a 'base' multigerm")
    try:
        return AffineFamily.from_json(data)
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed family JSON: {exc}") from exc


def _level(args) -> int:
    m = args.level
    if m is None:
        raise InputError("--level is required")
    if m < 1:
        raise InputError("--level must be >= 1")
    return m


# -- commands ------------------------------------------------------------------------

def cmd_invariants(args, src: str) -> dict:
    F = load_germ(src, args.truncation)
    F.require_nondegenerate()
    comps = []
    for i, c in enumerate(F.components):
        S0 = value_semigroup(c, 0)
        S1 = value_semigroup(c, 1)
        comps.append({
            "component": i + 1,
            "multiplicity": multiplicity(c),
            "invariant_pair": list(invariant_pair(c).as_tuple()),
            "S0": S0.to_json(),
            "S1": S1.to_json(),
        })
    depth = args.level or F.truncation
    return {"components": comps, "fingerprint": fingerprint(F, depth).to_json()}


def cmd_tangent(args, src: str) -> dict:
    F = load_germ(src, args.truncation)
    m = _level(args)
    filt = GroupFilter.parse(args.filter)
    T = tangent_space(F, m, filt)
    return T.report(with_basis=args.basis)


def cmd_transversal(args, src: str) -> dict:
    F = load_germ(src, args.truncation)
    m = _level(args)
    return complete_transversal(F, m, args.r).to_json()


def cmd_mather(args, src: str) -> dict:
    X = load_family(src)
    m = args.level or X.level
    if m is None:
        raise InputError("--level is required (or a 'level' key in the family)")
    rep = mather_check(X, m, GroupFilter.parse(args.filter), args.samples, args.seed)
    out = rep.to_json()
    if not rep.single_orbit:
        raise Refusal(out)
    return out


def cmd_modality(args, src: str) -> dict:
    if src in {f.name for f in nonsimple_library()}:
        lf = library_family(src)
        X, m, bound = lf.family, args.level or lf.level, lf.bound
    else:
        X = load_family(src)
        m, bound = args.level or X.level, None
        if m is None:
            raise InputError("--level is required (or a 'level' key in the family)")
    rep = family_deficiency(X, m, GroupFilter.parse(args.filter), args.samples, args.seed)
    out = rep.to_json()
    out["family"] = X.name
    if bound is not None:
        out["stated_bound"] = bound
    return out


def cmd_classify(args, src: str) -> dict:
    F = load_germ(src, args.truncation)
    rep = classify(F, args.level, args.seed, _catalog(args), args.samples)
    out = rep.to_json()
    kind = rep.verdict.kind
    if kind == "Unknown" or (args.expect_simple and kind != "Simple"):
        raise Refusal(out)
    return out


def cmd_determinacy(args, src: str) -> dict:
    F = load_germ(src, args.truncation)
    if args.degree is None:
        raise InputError("--degree is required")
    scan_to = args.scan_to or args.degree + 4
    ev = verify_determinacy(F, args.degree, scan_to)
    out = ev.to_json()
    if not ev.necessary_ok:
        raise Refusal(out)
    return out


def cmd_catalog_verify(args, _src=None) -> dict:
    C = _catalog(args)
    wb = args.weight_bound
    entries, failures = [], 0
    counts: dict[str, int] = {}
    for e in C:
        for inst in C.enumerate(e.id, wb):
            counts[e.part] = counts.get(e.part, 0) + 1
            rep, ext = round_trip(e.id, inst.params, C, seed=args.seed)
            v = rep.verdict
            ok = v.kind == "Simple" and v.entry_id == e.id and v.params == inst.params
            row = {"entry": inst.label(), "round_trip": ok, "verdict": str(v), "extension": ext}
            det = inst.determinacy
            if det:
                G = inst.germ.pad(det + 5)
                ev = verify_determinacy(G, det, det + 4)
                row["determinacy"] = {"claimed": det, "necessary_ok": ev.necessary_ok}
                ok = ok and ev.necessary_ok
            row["ok"] = ok
            failures += not ok
            entries.append(row)
    parts = []
    for part in C.parts():
        r = fingerprint_distinctness(C, part, wb)
        failures += not r.ok
        parts.append(r.to_json())
    out = {"weight_bound": wb, "counts": counts, "entries": entries, "distinctness": parts,
           "failures": failures, "ok": failures == 0}
    if failures:
        raise Refusal(out)
    return out


COMMANDS: dict[str, Callable] = {
    "invariants": cmd_invariants,
    "tangent": cmd_tangent,
    "transversal": cmd_transversal,
    "mather": cmd_mather,
    "modality": cmd_modality,
    "classify": cmd_classify,
    "determinacy": cmd_determinacy,
    "catalog-verify": cmd_catalog_verify,
}


def _catalog(args):
    path = args.catalog or os.environ.get(CATALOG_ENV)
    return load_catalog(path)


# -- running -------------------------------------------------------------------

def _run_one(args, src) -> tuple[int, dict]:
    meta = {"command": args.command, "seed": args.seed, "version": __version__}
    if src is not None:
        meta["input"] = src
    try:
        report = COMMANDS[args.command](args, src)
        return EXIT_OK, {**meta, "ok": True, "report": report}
    except Refusal as r:
        return EXIT_REFUSAL, {**meta, "ok": False, "report": r.payload}
    except GermParseError as exc:
        return EXIT_INPUT, {**meta, "ok": False, "error": {
            "kind": "parse", "message": str(exc), "line": exc.line, "column": exc.column}}
    except JetSyntaxError as exc:
        return EXIT_INPUT, {**meta, "ok": False, "error": {
            "kind": "parse", "message": str(exc), "column": exc.column}}
    except (InputError, DegenerateComponentError, CatalogError, ValueError) as exc:
        return EXIT_INPUT, {**meta, "ok": False, "error": {"kind": "input", "message": str(exc)}}
    except Exception as exc:  # anything else is a broken invariant, not bad input
        return EXIT_INTERNAL, {**meta, "ok": False, "error": {
            "kind": "internal", "message": f"{type(exc).__name__}: {exc}"}}


def _task(payload):
    args, src = payload
    return _run_one(args, src)


def render_text(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {json.dumps(v)}")
    elif isinstance(obj, list):
        if all(not isinstance(x, (dict, list)) for x in obj):
            lines.append(pad + ", ".join(str(x) for x in obj))
        else:
            for x in obj:
                lines.append(f"{pad}-")
                lines.extend(render_text(x, indent + 1))
    else:
        lines.append(pad + str(obj))
    return lines


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="multigerm", description="Jet-level tools for curve multigerms.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_input=True):
        if needs_input:
            sp.add_argument("--input", action="append", required=True,
                            help="JSON file, '-' for stdin, inline JSON, or inline text like '((t,0),(t^2,t^3))'")
        sp.add_argument("--truncation", type=int, help="truncation for inline text, or a lower cut for JSON")
        sp.add_argument("--level", type=int)
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--samples", type=int, default=3)
        sp.add_argument("--format", choices=("json", "text"), default="json")
        sp.add_argument("--catalog", help=f"catalog file (default: ${CATALOG_ENV} or the bundled one)")
        sp.add_argument("--jobs", type=int, default=None, help="worker processes for several inputs")
        return sp

    common(sub.add_parser("invariants", help="multiplicities, semigroups, fingerprint"))
    sp = common(sub.add_parser("tangent", help="orbit tangent space at a level"))
    sp.add_argument("--filter", default="A", help="A, A_r, L, R, L>=d, R>=d")
    sp.add_argument("--basis", action="store_true")
    sp = common(sub.add_parser("transversal", help="complete transversal for the m-jet"))
    sp.add_argument("--r", type=int, default=1)
    sp = common(sub.add_parser("mather", help="single-orbit test for an affine family"))
    sp.add_argument("--filter", default="A")
    sp = common(sub.add_parser("modality", help="deficiency test for a family or a named library family"))
    sp.add_argument("--filter", default="A")
    sp = common(sub.add_parser("classify", help="match against the catalog"))
    sp.add_argument("--expect-simple", action="store_true")
    sp = common(sub.add_parser("determinacy", help="transversal scan past a claimed degree"))
    sp.add_argument("--degree", type=int)
    sp.add_argument("--scan-to", type=int)
    sp = common(sub.add_parser("catalog-verify", help="round trip, determinacy and distinctness"), needs_input=False)
    sp.add_argument("--weight-bound", type=int, default=9)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.truncation is not None and args.truncation < 2:
        print("error: --truncation must be >= 2", file=sys.stderr)
        return EXIT_INPUT
    sources = getattr(args, "input", None) or [None]
    if len(sources) > 1 and (args.jobs is None or args.jobs > 1):
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_task, [(args, s) for s in sources]))
    else:
        results = [_run_one(args, s) for s in sources]
    code = max(c for c, _ in results)
    docs = [d for _, d in results]
    if args.format == "json":
        out = docs[0] if len(docs) == 1 else docs
        sys.stdout.write(json.dumps(out, indent=2, sort_keys=True) + "\n")
    else:
        for d in docs:
            sys.stdout.write("\n".join(render_text(d)) + "\n")
    for d in docs:
        if "error" in d:
            print(f"error: {d['error']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
