"""Command-line front end.

Every subcommand writes CSV or JSON to stdout or ``--out``.  Exit codes:
0 success, 2 precondition violation, 3 certification failure, 64 unknown
subcommand, 65 malformed or unreadable input, 1 internal check failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from mpmath import iv, mp

from . import _numeric
from ._numeric import certified_digits, format_interval, workprec
from .errors import CertificationError, MalformedInputError, PreconditionError, VerificationError

EXIT_OK, EXIT_INTERNAL, EXIT_PRECONDITION, EXIT_CERTIFICATION = 0, 1, 2, 3
EXIT_USAGE, EXIT_DATAERR = 64, 65

COMMANDS = ("spectrum", "gaps", "congruence", "quaternion", "classnum", "graph", "bouquet")
GRAPH_ACTIONS = ("zeta", "geodesics", "product", "degenerate", "converge")
BOUQUET_ACTIONS = ("scan", "construct", "verify")


class UsageError(Exception):
    pass


# -- formatting ----------------------------------------------------------------


def _interval_field(x, digits: int = 20) -> dict:
    return {"value": format_interval(x, digits), "digits": min(certified_digits(x), digits)}


def _stable(fn, digits: int = 20) -> tuple[object, int]:
    """Evaluate ``fn`` at the working precision and at double it.

    The number of leading digits on which the two agree is reported with the
    value; it is a stability estimate, not a rigorous bound.
    """
    bits = _numeric.get_precision()
    with workprec(bits):
        z1 = mp.mpc(fn())
    with workprec(2 * bits):
        z2 = mp.mpc(fn())
        diff = abs(z2 - z1)
        mag = abs(z2)
        if diff == 0:
            agree = digits
        elif mag == 0:
            agree = 0
        else:
            agree = max(0, min(digits, int(mp.floor(-mp.log10(diff / mag)))))
    return z2, agree


def _complex_field(fn, digits: int = 20) -> dict:
    z, d = _stable(fn, digits)
    n = max(d, 1)
    with workprec():
        return {"re": mp.nstr(z.real, n), "im": mp.nstr(z.imag, n), "digits": d}


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _complex_arg(text: str):
    parts = text.split(",")
    if len(parts) not in (1, 2):
        raise PreconditionError(f"--s expects RE or RE,IM, got {text!r}")
    try:
        re = Fraction(parts[0].strip())
        im = Fraction(parts[1].strip()) if len(parts) == 2 else Fraction(0)
    except ValueError as exc:
        raise PreconditionError(f"--s expects decimal numbers, got {text!r}") from exc
    return mp.mpc(mp.mpf(re.numerator) / re.denominator, mp.mpf(im.numerator) / im.denominator)


def _need(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise PreconditionError("missing required option(s): " + ", ".join("--" + n for n in missing))


# -- subcommands ---------------------------------------------------------------


def _gap_rows(report):
    return {(lo, hi): g for lo, hi, g, _ in report.rows()}


def cmd_spectrum(args) -> int:
    from .modular import gap_scan, spectrum

    _need(args, "max-trace")
    entries = spectrum(args.max_trace, multiplicity=not args.no_multiplicity, jobs=args.jobs)
    gaps = gap_scan(entries).gaps if len(entries) > 1 else []
    with workprec():
        vals = [e.interval() for e in entries]
        if args.format == "csv":
            rows = []
            for i, e in enumerate(entries):
                gap = format_interval(gaps[i], 20) if i < len(gaps) else ""
                rows.append([e.trace, e.b, e.D0, format_interval(vals[i], 20), gap, e.multiplicity or ""])
            _emit(args, _csv(["trace", "b", "D", "value", "gap_to_next", "multiplicity"], rows))
        else:
            doc = {
                "precisionBits": _numeric.get_precision(),
                "maxTrace": args.max_trace,
                "entries": [
                    {
                        "trace": e.trace,
                        "b": e.b,
                        "D": e.D0,
                        "value": _interval_field(vals[i]),
                        "gapToNext": _interval_field(gaps[i]) if i < len(gaps) else None,
                        "multiplicity": e.multiplicity,
                    }
                    for i, e in enumerate(entries)
                ],
            }
            _emit(args, _json(doc))
    return EXIT_OK


def _source_sequence(args):
    from .sequences import AscendingSequence, ExpValue

    src = args.source
    if src == "modular":
        from .modular import spectrum

        _need(args, "max-trace")
        es = spectrum(args.max_trace, multiplicity=False)
        return AscendingSequence.of([e.unit for e in es], tags=[f"trace={e.trace}" for e in es])
    if src == "congruence":
        from .arithmetic import congruence_sequence

        _need(args, "level", "c-max")
        es = congruence_sequence(args.level, args.c_max)
        return AscendingSequence.of([e.unit for e in es], tags=[f"trace={e.trace}" for e in es])
    if src == "quaternion":
        from .arithmetic import admissible_c, quaternion_sequence

        _need(args, "primes", "c-max")
        S = _primes(args.primes)
        cs = admissible_c(S, args.c_max)
        es = quaternion_sequence(S, cs)
        return AscendingSequence.of([e.unit for e in es], tags=[f"c={c}" for c in cs])
    if src == "graph":
        from .graphs import enumerate_geodesics, load_graph

        _need(args, "input", "max-length")
        mg = _load(args.input, load_graph)
        cutoff = Fraction(args.max_length)
        short = min(mg.lengths)
        n_max = int(cutoff / short) if isinstance(short, Fraction) else int(float(cutoff) / float(short))
        if n_max < 1:
            raise PreconditionError("no geodesic fits under --max-length")
        by_len: dict = {}
        for c in enumerate_geodesics(mg, n_max):
            if c.is_primitive and c.length <= cutoff:
                by_len.setdefault(c.length, []).append(c.label(mg.graph))
        if not all(isinstance(l, Fraction) for l in by_len):
            raise PreconditionError("graph source needs rational edge lengths")
        keys = sorted(by_len)
        return AscendingSequence([ExpValue(l) for l in keys], [by_len[l] for l in keys])
    raise PreconditionError(f"unknown --source {src!r}")


def cmd_gaps(args) -> int:
    from .sequences import limit_gap_report, report_json, to_csv

    _need(args, "source")
    seq = _source_sequence(args)
    if args.format == "csv":
        _emit(args, to_csv(seq))
    else:
        rep = limit_gap_report(seq, args.windows)
        _emit(args, report_json(rep, source=args.source, precisionBits=_numeric.get_precision()) + "\n")
    return EXIT_OK


def cmd_congruence(args) -> int:
    from .arithmetic import congruence_gap_scan, gamma_n_witness

    _need(args, "level", "c-max")
    if args.c_max < 1:
        raise PreconditionError("--c-max must be >= 1")
    ws = [gamma_n_witness(args.level, c) for c in range(1, args.c_max + 1)]
    with workprec():
        gaps = congruence_gap_scan(args.level, args.c_max).gaps if args.c_max >= 2 else []
        if args.format == "csv":
            rows = [
                [w.N, c, w.a, w.b, w.D, *w.matrix[0], *w.matrix[1], format_interval(gaps[i], 20) if i < len(gaps) else ""]
                for i, (c, w) in enumerate(zip(range(1, args.c_max + 1), ws))
            ]
            _emit(args, _csv(["N", "c", "a", "b", "D", "m11", "m12", "m21", "m22", "gap_to_next"], rows))
        else:
            doc = {
                "level": args.level,
                "witnesses": [
                    {
                        "c": c,
                        "a": w.a,
                        "b": w.b,
                        "D": w.D,
                        "matrix": [list(w.matrix[0]), list(w.matrix[1])],
                        "gapToNext": _interval_field(gaps[i]) if i < len(gaps) else None,
                    }
                    for i, (c, w) in enumerate(zip(range(1, args.c_max + 1), ws))
                ],
            }
            _emit(args, _json(doc))
    return EXIT_OK


def _primes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError as exc:
        raise PreconditionError(f"--primes expects comma-separated integers, got {text!r}") from exc


def cmd_quaternion(args) -> int:
    from .arithmetic import admissible_c, quaternion_gap_scan, quaternion_witness

    _need(args, "primes", "c-max")
    S = _primes(args.primes)
    cs = admissible_c(S, args.c_max)
    if not cs:
        raise PreconditionError("no admissible c up to --c-max")
    reports = [quaternion_witness(S, c) for c in cs]
    with workprec():
        gaps = quaternion_gap_scan(S, c_values=cs).gaps if len(cs) > 1 else []
        if args.format == "csv":
            rows = []
            for r in reports:
                for pc in r.per_prime:
                    rows.append([r.c, r.a, r.disc, r.conductor, pc.p, pc.ramified, pc.exact_divisor, pc.conductor_maximal, pc.discrepancy])
            header = ["c", "a", "disc", "conductor", "p", "ramified", "exactDivisor", "conductorMaximal", "discrepancy"]
            _emit(args, _csv(header, rows))
        else:
            doc = {
                "S": list(reports[0].S),
                "reports": [r.as_dict() for r in reports],
                "gaps": [_interval_field(g) for g in gaps],
                "discrepancies": [{"c": r.c, "primes": r.discrepancies} for r in reports if r.discrepancies],
            }
            _emit(args, _json(doc))
    return EXIT_OK


def cmd_classnum(args) -> int:
    from .quadratic import class_number, form_classes, fundamental_unit

    _need(args, "disc")
    D = args.disc
    h = class_number(D)
    u = fundamental_unit(D).unit
    with workprec():
        val = _interval_field(u.interval())
    if args.format == "csv":
        _emit(args, _csv(["D", "class_number", "unit_a", "unit_b", "unit_value"], [[D, h, u.a, u.b, val["value"]]]))
    else:
        doc = {
            "D": D,
            "classNumber": h,
            "forms": [[f.A, f.B, f.C] for f in form_classes(D)],
            "fundamentalUnit": {"a": u.a, "b": u.b, "D": u.D, "value": val},
        }
        _emit(args, _json(doc))
    return EXIT_OK


def _load(path, loader):
    try:
        return loader(path)
    except OSError as exc:
        raise MalformedInputError(f"cannot read {path}: {exc}") from exc


def _directives(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise PreconditionError(f"--set expects EDGE=contract|delete|keep, got {item!r}")
        e, d = item.split("=", 1)
        out[e] = d
    return out


def cmd_graph(args) -> int:
    from . import graphs as g

    if args.action not in GRAPH_ACTIONS:
        raise UsageError(f"unknown graph action {args.action!r}")
    _need(args, "input")
    mg = _load(args.input, g.load_graph)
    s_list = [_complex_arg(t) for t in (args.s or [])]

    if args.action == "degenerate":
        lim = g.degenerate(mg, _directives(args.set))
        _emit(args, _json(g.graph_to_dict(lim)))
        return EXIT_OK

    if args.action == "geodesics":
        _need(args, "n-max")
        rows = [
            [c.combinatorial_length, str(c.length), c.period, c.label(mg.graph)]
            for c in g.enumerate_geodesics(mg.limit(), args.n_max)
        ]
        if args.format == "csv":
            _emit(args, _csv(["combinatorial_length", "length", "period", "word"], rows))
        else:
            keys = ("combinatorialLength", "length", "period", "word")
            _emit(args, _json({"geodesics": [dict(zip(keys, r)) for r in rows]}))
        return EXIT_OK

    if args.action == "converge":
        _need(args, "edge", "mode", "a-values")
        lim = g.degenerate(mg, {args.edge: args.mode})
        a_vals = [Fraction(x) for x in args.a_values.split(",")]
        if not s_list:
            raise PreconditionError("converge needs at least one --s sample")
        probe = g.convergence_probe(lambda a: mg.with_length(args.edge, a), lim, s_list, a_vals)
        with workprec():
            if args.format == "csv":
                rows = [[str(a), mp.nstr(s.real, 10), mp.nstr(s.imag, 10), mp.nstr(r, 15)] for a, s, r in probe.rows()]
                _emit(args, _csv(["a", "re_s", "im_s", "residual"], rows))
            else:
                doc = {
                    "edge": args.edge,
                    "mode": args.mode,
                    "aValues": [str(a) for a in a_vals],
                    "maxResiduals": [mp.nstr(r, 15) for r in probe.max_residuals],
                    "strictlyDecreasing": probe.strictly_decreasing,
                }
                if args.mode == "delete":
                    doc["envelopeK"] = mp.nstr(probe.envelope_constant(1), 15)
                _emit(args, _json(doc))
        return EXIT_OK

    if not s_list:
        raise PreconditionError(f"graph {args.action} needs --s RE,IM")
    results = []
    for s in s_list:
        item = {"s": [mp.nstr(s.real, 15), mp.nstr(s.imag, 15)]}
        if args.action == "zeta":
            item["zeta"] = _complex_field(lambda: g.zeta_det(mg, s, mp.prec))
        else:
            _need(args, "cutoff")
            geos = g.enumerate_geodesics(mg, args.cutoff)
            item["product"] = _complex_field(lambda: g.zeta_product(mg, s, args.cutoff, geos))
            item["determinant"] = _complex_field(lambda: g.zeta_det(mg, s, mp.prec))
            with workprec():
                diff = abs(g.zeta_product(mg, s, args.cutoff, geos) - g.zeta_det(mg, s))
                item["difference"] = mp.nstr(diff, 6)
        results.append(item)
    if args.format == "csv":
        key = "zeta" if args.action == "zeta" else "product"
        rows = [[r["s"][0], r["s"][1], r[key]["re"], r[key]["im"], r[key]["digits"]] for r in results]
        _emit(args, _csv(["re_s", "im_s", "re", "im", "digits"], rows))
    else:
        _emit(args, _json({"action": args.action, "precisionBits": _numeric.get_precision(), "results": results}))
    return EXIT_OK


def _read_digits(path):
    from .bouquet import DigitReal

    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise MalformedInputError(f"cannot read {path}: {exc}") from exc
    try:
        return DigitReal.parse(text)
    except PreconditionError as exc:
        raise MalformedInputError(f"{path}: {exc}") from exc


def _bouquet_a(args):
    from .bouquet import DigitReal

    if args.a_digits:
        return _read_digits(args.a_digits)
    if args.seed:
        return DigitReal.parse(args.seed)
    raise PreconditionError("give --a-digits FILE or --seed S")


def cmd_bouquet(args) -> int:
    from . import bouquet as b

    if args.action not in BOUQUET_ACTIONS:
        raise UsageError(f"unknown bouquet action {args.action!r}")
    with workprec():
        if args.action == "scan":
            res = b.min_gap_scan(_bouquet_a(args), args.m_max, args.n_max)
            doc = {"a": str(_bouquet_a(args)), "mMax": args.m_max, "nMax": args.n_max, "values": res.values}
            doc["minGap"] = _interval_field(res.gap)
            doc["pair"] = res.pair.as_dict()
            pairs = [res.pair]
        elif args.action == "construct":
            _need(args, "seed", "C", "stages")
            res = b.liouville_construct(args.seed, args.C, args.stages, args.budget, args.mode)
            if args.digits_out:
                with open(args.digits_out, "w") as fh:
                    fh.write(str(res.a) + "\n")
            doc = {"a": str(res.a), "digitsUsed": res.digits_used, "C": args.C, "stages": args.stages}
            doc["pairs"] = [p.as_dict() for p in res.pairs]
            pairs = res.pairs
        else:
            _need(args, "C", "count")
            a = _bouquet_a(args)
            pairs = b.verify_small_gaps(a, args.C, args.count, Fraction(args.scale_floor))
            doc = {"a": str(a), "C": args.C, "count": args.count, "pairs": [p.as_dict() for p in pairs]}
        if args.format == "csv":
            rows = [[*p.mn, *p.kl, p.as_dict()["gapUpper"], p.as_dict()["scaleLower"]] for p in pairs]
            _emit(args, _csv(["m", "n", "k", "l", "gap_upper", "scale_lower"], rows))
        else:
            doc["precisionBits"] = _numeric.get_precision()
            _emit(args, _json(doc))
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=None, help="working precision in bits (>= 64)")
    common.add_argument("--output", dest="format", choices=("csv", "json"), default="json")
    common.add_argument("--out", default=None, help="write to this path instead of stdout")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--selftest", action="store_true", help="run this module's invariant checks")

    p = argparse.ArgumentParser(prog="boundedgaps", description="Length spectra and gap statistics of closed geodesics.")
    sub = p.add_subparsers(dest="command")

    sp = sub.add_parser("spectrum", parents=[common], help="modular norms eps(3..A)")
    sp.add_argument("--max-trace", type=int)
    sp.add_argument("--no-multiplicity", action="store_true")

    sp = sub.add_parser("gaps", parents=[common], help="limit-gap report of a sequence")
    sp.add_argument("--source", choices=("modular", "congruence", "quaternion", "graph"))
    sp.add_argument("--windows", type=int, default=4)
    sp.add_argument("--max-trace", type=int)
    sp.add_argument("--level", type=int)
    sp.add_argument("--c-max", type=int)
    sp.add_argument("--primes")
    sp.add_argument("--input")
    sp.add_argument("--max-length")

    sp = sub.add_parser("congruence", parents=[common], help="Gamma(N) witness matrices")
    sp.add_argument("--level", type=int)
    sp.add_argument("--c-max", type=int)

    sp = sub.add_parser("quaternion", parents=[common], help="quaternion trace progressions")
    sp.add_argument("--primes")
    sp.add_argument("--c-max", type=int)

    sp = sub.add_parser("classnum", parents=[common], help="class number and fundamental unit")
    sp.add_argument("--disc", type=int)

    sp = sub.add_parser("graph", parents=[common], help="metric graph zeta and geodesics")
    sp.add_argument("action", nargs="?", default=None)
    sp.add_argument("--input")
    sp.add_argument("--s", action="append", help="RE,IM (repeatable); write --s=-1,0 for negative parts")
    sp.add_argument("--n-max", type=int)
    sp.add_argument("--cutoff", type=int)
    sp.add_argument("--set", action="append", help="EDGE=contract|delete|keep (repeatable)")
    sp.add_argument("--edge")
    sp.add_argument("--mode", choices=("contract", "delete"))
    sp.add_argument("--a-values")

    sp = sub.add_parser("bouquet", parents=[common], help="two-loop bouquet gaps and construction")
    sp.add_argument("action", nargs="?", default=None)
    sp.add_argument("--a-digits")
    sp.add_argument("--seed")
    sp.add_argument("--C")
    sp.add_argument("--stages", type=int)
    sp.add_argument("--count", type=int)
    sp.add_argument("--scale-floor", default="1")
    sp.add_argument("--m-max", type=int, default=5)
    sp.add_argument("--n-max", type=int, default=5)
    sp.add_argument("--budget", type=int, default=10**6)
    sp.add_argument("--mode", choices=("multiples", "prefix"), default="multiples")
    sp.add_argument("--digits-out")
    return p


HANDLERS = {
    "spectrum": cmd_spectrum,
    "gaps": cmd_gaps,
    "congruence": cmd_congruence,
    "quaternion": cmd_quaternion,
    "classnum": cmd_classnum,
    "graph": cmd_graph,
    "bouquet": cmd_bouquet,
}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        build_parser().print_help()
        return EXIT_OK if argv else EXIT_USAGE
    if argv[0] not in COMMANDS:
        print(f"boundedgaps: unknown subcommand {argv[0]!r} (choose from {', '.join(COMMANDS)})", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PRECONDITION
    try:
        if args.precision is not None:
            _numeric.set_precision(args.precision)
        if args.selftest:
            from .selftest import run as selftest

            return EXIT_OK if selftest(args.command, sys.stdout) else EXIT_INTERNAL
        return HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"boundedgaps: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MalformedInputError as exc:
        print(f"boundedgaps: malformed input: {exc}", file=sys.stderr)
        return EXIT_DATAERR
    except (PreconditionError, ValueError) as exc:
        print(f"boundedgaps: precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except CertificationError as exc:
        achieved = getattr(exc, "achieved", None)
        extra = f" (achieved {achieved} stages)" if achieved is not None else ""
        print(f"boundedgaps: certification failed: {exc}{extra}", file=sys.stderr)
        return EXIT_CERTIFICATION
    except VerificationError as exc:
        print(f"boundedgaps: internal check failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    finally:
        _numeric.set_precision(None)


def main() -> None:
    sys.exit(run())
