"""Command line interface: ``d4lab <subcommand> ...``.

Exit codes: 0 ok, 1 claim violated or invalid input tuple, 2 usage or parse
error, 3 precision exhausted.  JSON output carries ``"schema": "d4lab/1"`` and
writes integers as decimal strings.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from mpmath import mp, mpf

from . import SCHEMA, bounds, pell, reduction, search, tuples
from .arith import PRECISION_ENV, PrecisionExhausted
from .tuples import NotATuple

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE, EXIT_PRECISION = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _jsonable(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return obj
    if isinstance(obj, (mpf, Fraction)):
        return str(obj) if isinstance(obj, Fraction) else mp.nstr(obj, 15)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return str(obj)


def _ints(values, name="elements") -> list[int]:
    try:
        return tuples.parse_tuple_literal(values)
    except ValueError as exc:
        raise UsageError(f"{name}: {exc}") from None


def _triple(values):
    elems = _ints(values)
    if len(elems) != 3:
        raise UsageError("expected three integers a b c")
    return tuples.make_triple(*elems)


# ---------------------------------------------------------------- commands
# each returns (payload, rows, exit_code); rows feed csv/text output

def cmd_verify(args):
    elems = _ints(args.elements)
    ok = tuples.verify_tuple(elems)
    payload = {"input": elems, "is_d4_tuple": ok, "size": len(elems)}
    if ok and len(elems) == 4:
        payload["regularity"] = tuples.classify_quadruple(tuples.make_quadruple(*elems)).value
    if ok and len(elems) == 3:
        t = tuples.make_triple(*elems)
        payload["d_plus"] = tuples.d_plus(t)
        payload["d_minus"] = tuples.d_minus(t)
        payload["regular"] = t.c == tuples.regular_triple_c(t.pair)
    return payload, [{"input": " ".join(map(str, elems)), "is_d4_tuple": ok}], EXIT_OK if ok else EXIT_VIOLATED


def _bigint(text: str) -> int:
    """Integer flag value; accepts ``1e9`` style when it is an exact integer."""
    try:
        return int(text)
    except ValueError:
        pass
    try:
        val = Fraction(Decimal(text))
    except (InvalidOperation, ValueError):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if val.denominator != 1:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(val)


def cmd_extend(args):
    t = _triple(args.elements)
    res = pell.find_intersections(t, args.zmax)
    rows = []
    for sol in res.solutions:
        q = tuples.make_quadruple(*t.elements(), sol.d)
        rows.append({"m": sol.m, "n": sol.n, "z": sol.z, "d": sol.d,
                     "case": pell.classify_case(sol.class_a, sol.class_b, t).case_tag,
                     "regularity": tuples.classify_quadruple(q).value})
    payload = {"triple": t.elements(), "zmax": args.zmax, "extensions": rows}
    irregular = any(r["regularity"] == "irregular" for r in rows)
    if args.certify:
        camp = reduction.bd_campaign(t, workers=args.threads)
        missed = sorted(set(camp.extensions) - {r["d"] for r in rows})
        payload["certified"] = camp.certified and not missed
        payload["index_bound"] = camp.final_bound
        payload["missed_by_zmax"] = missed
        irregular = irregular or bool(camp.irregular)
    return payload, rows, EXIT_VIOLATED if irregular else EXIT_OK


def cmd_fundamentals(args):
    t = _triple(args.elements)
    ca, cb = pell.enumerate_classes_A(t), pell.enumerate_classes_B(t)
    rows = [{"equation": "A", "z": k.z0, "x": k.x0, "in_range": k.in_range} for k in ca]
    rows += [{"equation": "B", "z": k.z1, "x": k.y1, "in_range": k.in_range} for k in cb]
    cases = []
    for ka in ca:
        for kb in cb:
            cc = pell.classify_case(ka, kb, t)
            if cc.tags:
                cases.append({"class_a": [ka.z0, ka.x0], "class_b": [kb.z1, kb.y1],
                              "tags": list(cc.tags), "coincidence": cc.coincidence, "note": cc.note})
    payload = {"triple": t.elements(), "r_s_t": [t.r, t.s, t.t], "half_gap": t.half_gap,
               "classes_A": rows[: len(ca)], "classes_B": rows[len(ca):], "cases": cases}
    return payload, rows, EXIT_OK


def cmd_intersect(args):
    t = _triple(args.elements)
    res = pell.find_intersections(t, args.z_max)

    def row(s):
        return {"m": s.m, "n": s.n, "z": s.z, "d": s.d, "class_a": [s.class_a.z0, s.class_a.x0],
                "class_b": [s.class_b.z1, s.class_b.y1], "index_relation": pell.index_relation_holds(s.m, s.n)}

    rows = [row(s) for s in res.solutions]
    payload = {"triple": t.elements(), "z_max": args.z_max, "solutions": rows,
               "small": [row(s) for s in res.small], "d_values": res.d_values(),
               "non_integral": [list(x) for x in res.non_integral]}
    bad = any(not r["index_relation"] for r in rows)
    return payload, rows, EXIT_VIOLATED if bad else EXIT_OK


def cmd_bounds(args):
    if args.catalog or args.case:
        ids = [args.case] if args.case else list(bounds.CATALOG)
        if args.case and args.case not in bounds.CATALOG:
            raise UsageError(f"unknown case {args.case!r}; known: {', '.join(bounds.CATALOG)}")
        rows = [bounds.threshold_solve(cid).to_json() for cid in ids]
        payload = {"catalog": rows, "all_pass": all(r["pass"] for r in rows)}
        return payload, rows, EXIT_OK if payload["all_pass"] else EXIT_VIOLATED
    if args.rickert or args.rickert2:
        a, b, c = _ints(args.rickert or args.rickert2)
        rep = (bounds.rickert_bound if args.rickert else bounds.rickert2_bound)(a, b, c)
        return rep.to_json(), [rep.to_json()], EXIT_OK
    if args.matveev is not None:
        val = bounds.matveev_C(args.matveev)
        payload = {"D": args.matveev, "C": mp.nstr(val, 15)}
        return payload, [payload], EXIT_OK
    if args.m_bound:
        t = _triple(args.m_bound)
        payload = {"triple": t.elements(), "m_bound": bounds.matveev_m_bound(t)}
        return payload, [payload], EXIT_OK
    if args.laurent:
        rep = bounds.laurent_apply(scenario=args.laurent)
        return rep.to_json(), [rep.to_json()], EXIT_OK
    if args.pade:
        a, b, c, z = _ints(args.pade)
        rep = bounds.pade_lambda(a, b, c, z)
        return rep.to_json(), [rep.to_json()], EXIT_OK
    if args.gap_n2 is not None:
        val = bounds.gap_n2_bound(args.gap_n2, args.variant)
        payload = {"n1": args.gap_n2, "variant": args.variant, "n2_bound": mp.nstr(val, 15),
                   "ratio": mp.nstr(val / args.gap_n2, 15)}
        return payload, [payload], EXIT_OK
    if args.alpha:
        a0, b0, c0 = _ints(args.alpha[:3])
        rho, L = args.alpha[3], args.alpha[4]
        val = bounds.alpha_gap(a0, b0, c0, rho, L)
        payload = {"a0": a0, "b0": b0, "c0": c0, "rho": rho, "L": L, "alpha": mp.nstr(val, 15)}
        return payload, [payload], EXIT_OK
    raise UsageError("bounds: choose one of --catalog, --case, --rickert, --rickert2, --matveev, "
                     "--m-bound, --laurent, --pade, --gap-n2, --alpha")


def cmd_reduce(args):
    t = _triple(args.elements)
    res = reduction.bd_campaign(t, M0=args.M0, checkpoint=args.checkpoint, workers=args.threads)
    payload = res.to_json()
    rows = [{"class": " ".join(map(str, o.key())), "final_M": o.final_M, "m_valid": o.m_valid,
             "status": o.status} for o in res.classes]
    return payload, rows, EXIT_VIOLATED if res.irregular else EXIT_OK


def cmd_search(args):
    kind = args.kind
    if kind == "pairs":
        rows = [{"a": p.a, "b": p.b, "r": p.r} for p in search.enumerate_pairs(args.b_max)]
        return {"kind": kind, "b_max": args.b_max, "count": len(rows), "pairs": rows}, rows, EXIT_OK
    if kind == "triples":
        rows = [{"a": t.a, "b": t.b, "c": t.c} for t in search.enumerate_triples(args.c_max, args.threads)]
        return {"kind": kind, "c_max": args.c_max, "count": len(rows), "triples": rows}, rows, EXIT_OK
    if kind == "claims":
        rng = search.SearchRange(c_max=args.c_max, d_max=args.d_max)
        rep = search.verify_theorem_claims(rng, intersect_c_max=args.intersect_c_max, workers=args.threads)
        rep.pop("elapsed", None)
        rows = [{"check": k, "violations": len(v)} for k, v in rep.items() if isinstance(v, list)]
        return {"kind": kind, **rep}, rows, EXIT_OK if rep["pass"] else EXIT_VIOLATED
    if kind == "case-check-mn9":
        rep = search.case_check_prop_mn9_k0((args.a_min, args.a_max)).to_json()
        rep.pop("elapsed", None)
        rows = [{"a": s[0], "b": s[1], "c": s[2]} for s in rep["survivors"]]
        return {"kind": kind, **rep}, rows, EXIT_OK if rep["pass"] else EXIT_VIOLATED
    raise UsageError(f"unknown search kind {kind!r}")


def cmd_family(args):
    a, b = _ints(args.pair, "pair")
    pair = tuples.make_pair(a, b)
    rows = []
    for tau in (1, -1):
        for nu in range(args.nu_max + 1):
            c = tuples.c_family(pair, nu, tau)
            rows.append({"nu": nu, "tau": tau, "c": c,
                         "is_triple": c > 0 and c not in (a, b) and tuples.verify_tuple((a, b, c))})
    payload = {"pair": [a, b], "family": rows}
    code = EXIT_OK
    if args.cmax:
        check = search.pair_family_check(pair, args.cmax)
        payload["family_check"] = check
        payload["all_family"] = not check["non_family"]
        code = EXIT_OK if check["pass"] else EXIT_VIOLATED
    return payload, rows, code


def cmd_report(args):
    cat = [bounds.threshold_solve(cid).to_json() for cid in bounds.CATALOG]
    gaps = {f"{v}@{n}": mp.nstr(bounds.gap_n2_bound(n, v) / n, 10)
            for n, v in ((8, "general"), (9, "general"), (9, "ts_class"))}
    laurent = {s: bounds.laurent_apply(scenario=s).to_json() for s in bounds.LAURENT_SCENARIOS}
    mn9 = search.case_check_prop_mn9_k0().to_json()
    mn9.pop("elapsed", None)
    claims = search.verify_theorem_claims(search.SearchRange(c_max=args.c_max, d_max=args.d_max),
                                          workers=args.threads)
    claims.pop("elapsed", None)
    payload = {"catalog": cat, "gap_ratios": gaps, "laurent": laurent, "case_check_mn9": mn9, "claims": claims}
    rows = [{"item": r["case_id"], "stated": r["paper_value"], "computed": r["computed_value"], "pass": r["pass"]}
            for r in cat]
    rows.append({"item": "case_check_mn9", "stated": "0", "computed": str(len(mn9["survivors"])), "pass": mn9["pass"]})
    rows.append({"item": "claims", "stated": "-", "computed": "-", "pass": claims["pass"]})
    return payload, rows, EXIT_OK


# ---------------------------------------------------------------- plumbing

def _emit(payload, rows, fmt, out):
    if fmt == "json":
        doc = {"schema": SCHEMA, **_jsonable(payload)}
        out.write(json.dumps(doc, indent=2, sort_keys=False) + "\n")
        return
    rows = _jsonable(rows or [])
    if not rows:
        rows = [{k: v for k, v in _jsonable(payload).items() if not isinstance(v, (list, dict))}]
    keys = list(dict.fromkeys(k for r in rows for k in r))
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
        out.write(buf.getvalue())
    else:
        for r in rows:
            out.write("  ".join(f"{k}={r.get(k)}" for k in keys) + "\n")


def build_parser() -> argparse.ArgumentParser:
    # global options are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default=argparse.SUPPRESS)
    common.add_argument("--precision", type=int, default=argparse.SUPPRESS,
                        help=f"working precision in bits (default: ${PRECISION_ENV} or 256)")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker processes; never changes the output")
    p = argparse.ArgumentParser(prog="d4lab", description="Exact computations with D(4)-tuples.",
                                parents=[common])
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    s = sub.add_parser("verify", help="check that integers form a D(4)-tuple")
    s.add_argument("elements", nargs="+")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("extend", help="extensions d > c found from v_m = w_n with |z| <= zmax")
    s.add_argument("elements", nargs=3)
    s.add_argument("--zmax", "--z-max", dest="zmax", type=_bigint, default=10**12)
    s.add_argument("--certify", action="store_true", help="run a reduction campaign to prove completeness")
    s.set_defaults(func=cmd_extend)

    s = sub.add_parser("fundamentals", help="solution classes of the two Pell equations")
    s.add_argument("elements", nargs=3)
    s.set_defaults(func=cmd_fundamentals)

    s = sub.add_parser("intersect", help="solutions of v_m = w_n up to z_max")
    s.add_argument("elements", nargs=3)
    s.add_argument("--zmax", "--z-max", dest="z_max", type=_bigint, default=10**12)
    s.set_defaults(func=cmd_intersect)

    s = sub.add_parser("bounds", help="explicit bounds and the threshold catalog")
    s.add_argument("--catalog", action="store_true")
    s.add_argument("--case")
    s.add_argument("--rickert", nargs=3, metavar=("A", "B", "C"))
    s.add_argument("--rickert2", nargs=3, metavar=("A", "B", "C"))
    s.add_argument("--matveev", type=int, metavar="D")
    s.add_argument("--m-bound", nargs=3, metavar=("A", "B", "C"))
    s.add_argument("--laurent", choices=tuple(bounds.LAURENT_SCENARIOS))
    s.add_argument("--pade", nargs=4, metavar=("A", "B", "C", "Z"))
    s.add_argument("--gap-n2", type=int, metavar="N1")
    s.add_argument("--variant", choices=("general", "ts_class"), default="general")
    s.add_argument("--alpha", nargs=5, metavar=("A0", "B0", "C0", "RHO", "L"))
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("reduce", help="Baker-Davenport campaign for a triple")
    s.add_argument("elements", nargs=3)
    s.add_argument("--M0", type=_bigint, default=None)
    s.add_argument("--checkpoint")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("search", help="enumerations and finite checks")
    s.add_argument("kind", choices=("pairs", "triples", "claims", "case-check-mn9"))
    s.add_argument("--b-max", type=_bigint, default=100)
    s.add_argument("--c-max", type=_bigint, default=1000)
    s.add_argument("--d-max", type=_bigint, default=10**6)
    s.add_argument("--intersect-c-max", type=_bigint, default=None)
    s.add_argument("--a-min", type=int, default=4)
    s.add_argument("--a-max", type=int, default=12)
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("family", help="the c_nu^tau family of a pair")
    s.add_argument("pair", nargs=2)
    s.add_argument("--nu-max", type=int, default=5)
    s.add_argument("--cmax", "--c-max", dest="cmax", type=_bigint, default=None)
    s.set_defaults(func=cmd_family)

    s = sub.add_parser("report", help="summary of the reproducible computations")
    s.add_argument("--c-max", type=_bigint, default=2000)
    s.add_argument("--d-max", type=_bigint, default=10**6)
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    for name, default in (("format", "json"), ("precision", None), ("threads", 1)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        if args.precision is not None:
            if args.precision < 64:
                raise UsageError("--precision must be >= 64")
            os.environ[PRECISION_ENV] = str(args.precision)
        else:
            raw = os.environ.get(PRECISION_ENV)
            if raw and (not raw.isdigit() or int(raw) < 64):
                raise UsageError(f"{PRECISION_ENV} must be an integer >= 64")
        payload, rows, code = args.func(args)
    except UsageError as exc:
        print(f"d4lab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotATuple as exc:
        print(f"d4lab: not a D(4)-tuple: {exc}", file=sys.stderr)
        return EXIT_VIOLATED
    except PrecisionExhausted as exc:
        print(f"d4lab: precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except ValueError as exc:
        print(f"d4lab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(payload, rows, args.format, sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
