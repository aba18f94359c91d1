"""Command-line surface: census generation with caching, density and
divisibility tables, the class-number-one census, the two asymptotic sums,
and the closed-form-vs-brute-force verification harness.

Exit codes: 0 success, 2 validation error, 3 verification disagreement
outside the flagged set, 4 I/O error.
"""

import argparse
import json
import os
import re
import sys

from . import census as census_mod
from . import congruence, stats
from .numtheory import squarefree_core

CACHE_ENV = "GEODESIC_CACHE_DIR"

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DISAGREEMENT = 3
EXIT_IO = 4


class ValidationError(ValueError):
    pass


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def emit_table(rows, header, fmt, out):
    """Write rows as CSV or JSON; both carry the same 6-significant-digit
    numbers so the two formats are interchangeable."""
    if fmt == "csv":
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(row[k]) for k in header))
        text = "\n".join(lines) + "\n"
    else:
        objs = []
        for row in rows:
            obj = {}
            for k in header:
                v = row[k]
                obj[k] = float(_fmt(v)) if isinstance(v, float) else v
            objs.append(obj)
        text = json.dumps(objs, indent=1) + "\n"
    if out:
        with open(out, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def default_cache_path(x_max, flavor="all"):
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    os.makedirs(root, exist_ok=True)
    return os.path.join(root, f"census-{flavor}-x{x_max}.txt")


def decade_checkpoints(x_max):
    pts = []
    x = 10
    while x <= x_max:
        pts.append(x)
        x *= 10
    if not pts or pts[-1] != x_max:
        pts.append(x_max)
    return pts


COND_ATOM_RE = re.compile(
    r"^(?:(?P<p>\d+)(?:\^(?P<m>\d+))?\|d"
    r"|\(d/(?P<rp>\d+)\)=(?P<sign>[+-]?1)"
    r"|d%4==3)$"
)


def parse_condition(text):
    """Parse the condition mini-syntax: 'p^m|d', '(d/p)=+-1', 'd%4==3',
    joined with 'and'."""
    from .numtheory import factorize

    atoms = []
    for part in re.split(r"\s+and\s+|\s*,\s*", text.strip()):
        part = part.strip().replace(" ", "")
        if not part:
            continue
        m = COND_ATOM_RE.match(part)
        if not m:
            raise ValidationError(f"cannot parse condition atom {part!r}")
        if m.group("p"):
            p = int(m.group("p"))
            e = int(m.group("m") or 1)
            fac = factorize(p).factors
            if len(fac) != 1 or fac[0][1] != 1:
                raise ValidationError(f"{p} is not prime in atom {part!r}")
            atoms.append(stats.Atom(stats.DIV, p, m=e))
        elif m.group("rp"):
            p = int(m.group("rp"))
            fac = factorize(p).factors
            if len(fac) != 1 or fac[0][1] != 1:
                raise ValidationError(f"{p} is not prime in atom {part!r}")
            atoms.append(stats.Atom(stats.RES, p, sign=int(m.group("sign"))))
        else:
            atoms.append(stats.Atom(stats.MOD4, 2))
    if not atoms:
        raise ValidationError("empty condition")
    try:
        return stats.Condition(tuple(atoms))
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def _load_census(x_max, cache):
    path = cache or default_cache_path(x_max)
    records, _ = census_mod.load_or_build(path, x_max)
    return records


def _apply_workers(n):
    if n < 1:
        raise ValidationError("worker count must be >= 1")
    if n == 1:
        return  # kernels run serially; nothing to configure
    try:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    except ImportError:
        pass


def cmd_census(args):
    if args.xmax < 0:
        raise ValidationError("xmax must be nonnegative")
    _apply_workers(args.workers)
    path = args.cache or default_cache_path(args.xmax, args.filter)
    if args.filter == "squarefree":
        records = [
            r
            for r in census_mod.census_records(args.xmax)
            if squarefree_core(r.d)[0] == r.d
        ]
        if path:
            census_mod.cache_write(path, records, args.xmax)
    else:
        records, _ = census_mod.load_or_build(path, args.xmax)
    sum_h = sum(r.h for r in records if r.j == 1)
    max_t = records[-1].t if records else 0
    print(f"records={len(records)} sumH={sum_h} maxt={max_t}" + (f" cache={path}" if path else ""))
    return EXIT_OK


def cmd_mu(args):
    cond = parse_condition(args.cond)
    mu = stats.mu_theoretical(cond)
    records = _load_census(args.xmax, args.cache)
    rows = []
    for x in decade_checkpoints(args.xmax):
        est = stats.mu_estimate(cond, x, records)
        rows.append(
            {
                "x": x,
                "estimate": est.value,
                "theoretical": float(mu),
                "abs_error": abs(est.value - float(mu)),
            }
        )
    emit_table(rows, ["x", "estimate", "theoretical", "abs_error"], args.format, args.out)
    return EXIT_OK


def cmd_alpha(args):
    if args.p % 2 == 0 or args.p < 3:
        raise ValidationError("alpha requires an odd prime p")
    records = [
        r
        for r in _load_census(args.xmax + 2, args.cache)
        if squarefree_core(r.d)[0] == r.d
    ]
    rows = []
    for x in decade_checkpoints(args.xmax):
        rows.append(
            {
                "x": x,
                "alpha": stats.alpha_p(args.p, x, records, convention=args.convention),
            }
        )
    emit_table(rows, ["x", "alpha"], args.format, args.out)
    return EXIT_OK


def cmd_h1(args):
    count, entries = stats.h1_census(args.xmax)
    rows = [
        {"d": e.d, "D": e.D, "t": e.t, "u": e.u, "h": e.h} for e in entries
    ]
    emit_table(rows, ["d", "D", "t", "u", "h"], args.format, args.out)
    print(f"omega1({args.xmax}) = {count}", file=sys.stderr)
    return EXIT_OK


def cmd_sums(args):
    rows = []
    if args.mode == "sarnak":
        records = _load_census(args.xmax, args.cache)
        for x in decade_checkpoints(args.xmax):
            sum_h, ratio = stats.sarnak_ratio(records, x)
            rows.append({"x": x, "sum_h": sum_h, "ratio_to_li": ratio})
        emit_table(rows, ["x", "sum_h", "ratio_to_li"], args.format, args.out)
    elif args.mode == "beta":
        if not args.cond:
            raise ValidationError("--mode beta requires --cond")
        cond = parse_condition(args.cond)
        entries = list(census_mod.census_by_discriminant(args.xmax))
        for x in decade_checkpoints(args.xmax):
            total, scaled = stats.beta_sum(cond, x, entries)
            rows.append({"x": x, "cond_sum_hlog": total, "over_x32": scaled})
        emit_table(rows, ["x", "cond_sum_hlog", "over_x32"], args.format, args.out)
    else:
        entries = list(census_mod.census_by_discriminant(args.xmax))
        for x in decade_checkpoints(args.xmax):
            part = [e for e in entries if e[0].D < x]
            total, ratio = stats.siegel_ratio(x, entries=part)
            rows.append({"x": x, "sum_hlog": total, "ratio_to_const": ratio})
        emit_table(rows, ["x", "sum_hlog", "ratio_to_const"], args.format, args.out)
    return EXIT_OK


def _families(p, r):
    kinds = [congruence.HAT, congruence.SPLIT0, congruence.PLUS, congruence.MINUS]
    specs = []
    for kind in kinds:
        specs.append(congruence.SubgroupSpec(kind, p, r))
    if p == 2 and r >= 2:
        specs.append(congruence.SubgroupSpec(congruence.THREE, 2, r))
    if p == 2 and r >= 3:
        for m in (1, 2, 3):
            specs.append(congruence.SubgroupSpec(congruence.POW4, 2, r, m=m))
    for l in range(1, r):
        for kind in (congruence.SPLIT0, congruence.PLUS, congruence.MINUS):
            specs.append(congruence.SubgroupSpec(kind, p, r, hat_l=l))
        if p == 2 and r >= 2:
            specs.append(congruence.SubgroupSpec(congruence.THREE, 2, r, hat_l=l))
        if p == 2 and r >= 3:
            for m in (1, 2, 3):
                specs.append(congruence.SubgroupSpec(congruence.POW4, 2, r, m=m, hat_l=l))
    return specs


def cmd_verify_m(args):
    if args.p**args.r > congruence.MAX_MODULUS:
        raise ValidationError(
            f"level {args.p}^{args.r} beyond the brute-force bound {congruence.MAX_MODULUS}"
        )
    pool = congruence.sample_pool()
    unflagged = 0
    for spec in _families(args.p, args.r):
        report = congruence.verify_m(spec, samples=args.samples, pool=pool)
        n_dis = len(report.disagreements)
        flagged = congruence.spec_key(spec) in congruence.KNOWN_DIVERGENT
        status = "ok" if n_dis == 0 else ("flagged-typo" if flagged else "UNFLAGGED")
        print(f"{spec.label()}: {len(report.rows)} samples, {n_dis} disagreements [{status}]")
        if n_dis and args.verbose:
            for line in report.lines():
                if line.endswith("DISAGREE"):
                    print("  " + line)
        if n_dis and not flagged:
            unflagged += 1
    return EXIT_DISAGREEMENT if unflagged else EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(
        prog="qfcensus",
        description="Census of indefinite binary quadratic form classes ordered "
        "by fundamental unit, with class-number statistics.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="write the table to this file instead of stdout")

    def subparser(**kw):
        return argparse.ArgumentParser(parents=[common], **kw)

    sub = ap.add_subparsers(dest="command", required=True, parser_class=subparser)

    p = sub.add_parser("census", help="enumerate records and write the cache")
    p.add_argument("--xmax", type=int, required=True)
    p.add_argument("--cache")
    p.add_argument("--filter", choices=("all", "squarefree"), default="all")
    p.add_argument("--workers", type=int, default=1, help="kernel thread budget")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("mu", help="density estimate vs exact value")
    p.add_argument("--cond", required=True)
    p.add_argument("--xmax", type=int, required=True)
    p.add_argument("--cache")
    p.set_defaults(func=cmd_mu)

    p = sub.add_parser("alpha", help="fraction of square-free d with p | h")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--xmax", type=int, required=True)
    p.add_argument("--convention", choices=("rows", "strict"), default="rows")
    p.add_argument("--cache")
    p.set_defaults(func=cmd_alpha)

    p = sub.add_parser("h1", help="class-number-one census")
    p.add_argument("--xmax", type=int, required=True)
    p.set_defaults(func=cmd_h1)

    p = sub.add_parser("sums", help="asymptotic ratio tables")
    p.add_argument("--mode", choices=("sarnak", "siegel", "beta"), required=True)
    p.add_argument("--xmax", type=int, required=True)
    p.add_argument("--cache")
    p.add_argument("--cond", help="condition for the exploratory beta mode")
    p.set_defaults(func=cmd_sums)

    p = sub.add_parser("verify-m", help="closed-form vs brute-force weights")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_verify_m)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (census_mod.CorruptCacheError, census_mod.CacheVersionError) as exc:
        print(f"cache error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
