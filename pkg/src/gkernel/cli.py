"""Command-line front end.

Exit codes: 0 success, 1 a mathematical hypothesis failed (or a suite check
failed), 2 a descriptor or argument could not be parsed.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Optional

from .abgroup import ParseError, parse_module
from .cohom import (MAX_DEGREE, cohomology_group, connecting_map, induced_map_group_hom, integral_homology,
                    long_exact_sequence_check, uct_decompose, wang_sequence)
from .groupcat import GroupHom, SemidirectZ, parse_group
from .ksharp import SplittingUnavailable, coefficient_sequences, k_sharp, parse_algebra, psi_splitting
from .obstruct import obstruction_report
from .suite import SUITES, run_suite

SCHEMA_VERSION = 1

GRAMMAR = """descriptor grammar:
  group    Z^n | Z/m | (Z/m)^k | G x H | sd(Z^r,[[..],..]) | sd(Z/m,[[a]])
  module   atoms joined by '+': Z  Z/m  Z[p,..]  Q  Pr{p,..}  Q/Z  Q/Z[p,..]  0
  algebra  O2 | O(k) | Oinf | UHF{p,..} | UHFoo{p,..} | JS | Custom(<atom>,<unit>[,trace])
"""


class HypothesisFailure(Exception):
    pass


class Outcome:
    def __init__(self, result: dict, certificates: Optional[list] = None, citations: Optional[list] = None,
                 warnings: Optional[list] = None):
        self.result = result
        self.certificates = certificates or []
        self.citations = citations or []
        self.warnings = warnings or []


def _degree(k: int) -> int:
    if not 0 <= k <= MAX_DEGREE:
        raise HypothesisFailure(f"degree must lie in 0..{MAX_DEGREE}")
    return k


def _map_structure(f) -> dict:
    out = {}
    for what in ("kernel", "image", "cokernel"):
        try:
            out[what] = str(getattr(f, what)())
        except NotImplementedError:
            out[what] = "not computed"
    return out


# -- verbs ----------------------------------------------------------------------------------------

def run_homology(args) -> Outcome:
    G = parse_group(args.group)
    k = _degree(args.degree)
    return Outcome({"group": str(G), "degree": k, "value": str(integral_homology(G, k))})


def run_cohomology(args) -> Outcome:
    G, M = parse_group(args.group), parse_module(args.module)
    k = _degree(args.degree)
    H = cohomology_group(G, M, k)
    result = {"group": str(G), "module": str(M), "degree": k, "value": str(H.value), "cells": H.class_basis()}
    certs = []
    if not isinstance(G, SemidirectZ):
        hom, ext = uct_decompose(G, M, k)
        result["uct"] = {"hom": str(hom), "ext": str(ext)}
        certs.append({"check": "value = Hom(H_k) + Ext(H_{k-1})", "ok": H.value == hom + ext})
    return Outcome(result, certs)


def run_induced(args) -> Outcome:
    src, tgt = parse_group(args.source), parse_group(args.target)
    M = parse_module(args.module)
    try:
        matrix = json.loads(args.matrix)
    except json.JSONDecodeError as exc:
        raise ParseError(args.matrix, exc.pos, "a JSON integer matrix") from None
    f = GroupHom(src, tgt, tuple(tuple(r) for r in matrix))
    fstar = induced_map_group_hom(f, M, _degree(args.degree))
    result = {"map": "f*", "from": str(fstar.source.value), "to": str(fstar.target.value),
              "multipliers": fstar.describe()["multipliers"]}
    result.update(_map_structure(fstar))
    return Outcome(result)


def run_connecting(args) -> Outcome:
    G = parse_group(args.group)
    k = _degree(args.degree)
    if args.sequence == "ZTR":
        from .ksharp import ztr_sequence
        ses = ztr_sequence()
    else:
        if not args.algebra:
            raise HypothesisFailure(f"--algebra is required for the {args.sequence} sequence")
        A = parse_algebra(args.algebra)
        ses = coefficient_sequences(A, include_trace=args.sequence == "CSES")[args.sequence]
    d = connecting_map(ses, G, k)
    result = {"sequence": args.sequence, "group": str(G), "degree": k, "from": str(d.source.value),
              "to": str(d.target.value), "zero": d.is_zero(), "multipliers": d.describe()["multipliers"]}
    result.update(_map_structure(d))
    certs = [c.as_dict() for c in long_exact_sequence_check(ses, G, k)]
    return Outcome(result, certs)


def run_wang(args) -> Outcome:
    G = parse_group(args.group)
    if not isinstance(G, SemidirectZ):
        raise HypothesisFailure("the Wang sequence needs a group of the form sd(N, phi)")
    M = parse_module(args.module)
    w = wang_sequence(G, M, _degree(args.degree))
    result = {"group": str(G), "module": str(M), "degree": args.degree,
              "coker(1-xi*)": str(w.term1), "H^k(G)": str(w.term2), "ker(1-xi*)": str(w.term3), "exact": w.exact}
    return Outcome(result, [c.as_dict() for c in w.certificate])


def run_ksharp(args) -> Outcome:
    A = parse_algebra(args.algebra)
    K = k_sharp(A)
    result = K.describe()
    warnings = ["formal: the custom entry cannot confirm pi_1(U(A)) = K0(A)"] if A.is_formal else []
    certs = [{"check": "0 -> K0 -> K0# -> Q/Z -> 0 exact", "ok": True}]
    if args.splitting:
        try:
            psi = psi_splitting(A)
        except SplittingUnavailable as exc:
            raise HypothesisFailure(str(exc)) from None
        import random
        ok = psi.verify(random.Random(0), samples=20)
        result["splitting"] = {"reducedK0": str(psi.reduced), "rho([1]0)": "1",
                               "ev1": "(y - rho(lift of x)) mod Z on (x, y) in K0~ x Q"}
        certs.append({"check": "ev1 formula on 20 samples", "ok": ok})
    return Outcome(result, certs, warnings=warnings)


def run_report(args) -> Outcome:
    G, A = parse_group(args.group), parse_algebra(args.algebra)
    r = obstruction_report(G, A)
    d = r.as_dict()
    citations = d.pop("theoremCitations")
    warnings = d.pop("warnings")
    checks = d.pop("checks")
    certs = [{"check": name, "ok": ok} for name, ok in sorted(checks.items())]
    return Outcome(d, certs, citations, warnings)


VERBS = {"homology": run_homology, "cohomology": run_cohomology, "induced": run_induced,
         "connecting": run_connecting, "wang": run_wang, "ksharp": run_ksharp, "report": run_report}


# -- output ---------------------------------------------------------------------------------------

def _text_value(v) -> str:
    if isinstance(v, str):
        return v
    return json.dumps(v, sort_keys=True)


def _table(rows: list[tuple[str, str]]) -> str:
    if not rows:
        return ""
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def emit(out: Outcome, query: dict, as_json: bool) -> str:
    if as_json:
        payload = {"schemaVersion": SCHEMA_VERSION, "query": query, "result": out.result,
                   "certificates": out.certificates, "citations": out.citations, "warnings": out.warnings}
        return json.dumps(payload, sort_keys=True, indent=2)
    rows = [(k, _text_value(v)) for k, v in out.result.items()]
    text = _table(rows)
    if out.certificates:
        text += "\n\ncertificates\n" + _table([(_cert_name(c), "ok" if _cert_ok(c) else "FAILED")
                                                for c in out.certificates])
    if out.citations:
        text += "\n\ncitations\n" + _table([(c["theorem"], "applies" if c["applies"] else "hypotheses not met")
                                             for c in out.citations])
    for w in out.warnings:
        text += f"\nwarning: {w}"
    return text


def _cert_name(c: dict) -> str:
    return c.get("check") or c.get("spot", "")


def _cert_ok(c: dict) -> bool:
    return bool(c.get("ok", c.get("exact", False)))


# -- parser ---------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gkernel", description="Group cohomology and K0# obstruction calculator.",
                                     epilog=GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="verb", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the versioned JSON schema")

    p = sub.add_parser("homology", parents=[common], help="integral homology H_k(G)")
    p.add_argument("--group", required=True)
    p.add_argument("--degree", type=int, required=True)

    p = sub.add_parser("cohomology", parents=[common], help="H^k(G, M) with trivial action")
    p.add_argument("--group", required=True)
    p.add_argument("--module", required=True)
    p.add_argument("--degree", type=int, required=True)

    p = sub.add_parser("induced", parents=[common], help="f*: H^k(target, M) -> H^k(source, M)")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--matrix", required=True, help="JSON matrix, columns are generator images")
    p.add_argument("--module", required=True)
    p.add_argument("--degree", type=int, required=True)

    p = sub.add_parser("connecting", parents=[common], help="connecting map of a coefficient sequence")
    p.add_argument("--group", required=True)
    p.add_argument("--sequence", choices=["ZTR", "exse", "CSES"], required=True)
    p.add_argument("--algebra")
    p.add_argument("--degree", type=int, required=True)

    p = sub.add_parser("wang", parents=[common], help="the Wang sequence around H^k(N x| Z, M)")
    p.add_argument("--group", required=True)
    p.add_argument("--module", required=True)
    p.add_argument("--degree", type=int, default=3)

    p = sub.add_parser("ksharp", parents=[common], help="K0#(A) with jA and ev1")
    p.add_argument("--algebra", required=True)
    p.add_argument("--splitting", action="store_true", help="also require the (K0~, Q) splitting")

    p = sub.add_parser("report", parents=[common], help="obstruction report for a group and an algebra")
    p.add_argument("--group", required=True)
    p.add_argument("--algebra", required=True)

    p = sub.add_parser("verify-suite", parents=[common], help="run a verification suite: paper or properties")
    p.add_argument("suite")
    return parser


def _query(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "json" and v is not None}


def run_verify_suite(args, stdout) -> int:
    if args.suite not in SUITES:
        print(f"unknown suite {args.suite!r}; choose from {', '.join(sorted(SUITES))}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    lines = []

    def show(r):
        if not args.json:
            print(f"[{'PASS' if r.ok else 'FAIL'}] {r.index:2d} {r.name} ({r.seconds:.2f}s): {r.detail}",
                  file=stdout, flush=True)

    results = run_suite(args.suite, show)
    total = time.perf_counter() - t0
    passed = sum(r.ok for r in results)
    if args.json:
        lines = [{"index": r.index, "name": r.name, "ok": r.ok, "detail": r.detail, "seconds": round(r.seconds, 3)}
                 for r in results]
        payload = {"schemaVersion": SCHEMA_VERSION, "query": _query(args),
                   "result": {"passed": passed, "total": len(results), "seconds": round(total, 3)},
                   "certificates": lines, "citations": [], "warnings": []}
        print(json.dumps(payload, sort_keys=True, indent=2), file=stdout)
    else:
        print(f"{passed}/{len(results)} checks passed in {total:.2f}s", file=stdout)
    return 0 if passed == len(results) else 1


def main(argv: Optional[list] = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    if args.verb == "verify-suite":
        return run_verify_suite(args, stdout)
    query = {"verb": args.verb, **_query(args)}
    try:
        out = VERBS[args.verb](args)
    except ParseError as exc:
        _report_error(args, query, "parse", exc, stdout, pos=exc.pos, expected=exc.expected, text=exc.text)
        return 2
    except (HypothesisFailure, SplittingUnavailable, ValueError, NotImplementedError) as exc:
        _report_error(args, query, "hypothesis", exc, stdout)
        return 1
    print(emit(out, query, args.json), file=stdout)
    return 0


def _report_error(args, query, kind, exc, stdout, **extra) -> None:
    if args.json:
        payload = {"schemaVersion": SCHEMA_VERSION, "query": query,
                   "error": {"kind": kind, "message": str(exc), **extra}}
        print(json.dumps(payload, sort_keys=True, indent=2), file=stdout)
        return
    if kind == "parse":
        print(f"parse error at position {extra['pos']}: expected {extra['expected']}", file=sys.stderr)
        print(f"  {extra['text']}\n  {' ' * extra['pos']}^", file=sys.stderr)
    else:
        print(f"error: {exc}", file=sys.stderr)


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
