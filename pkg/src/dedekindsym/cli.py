"""Command-line front door.

Subcommands compute symbol/reciprocity tables from modular forms, run the
verification suites, peel decompositions, print the Gamma_0(2) closed
forms and tabulate length-one symbols over a coprime grid.  Output is a
deterministic structured-text (JSON) document or CSV; floats are printed
with 17 significant digits so identical flags give identical bytes.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numerical
non-convergence.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from math import gcd

from . import contfrac, eichler, modforms, symbols
from .errors import DedekindSymError, DomainError, NonConvergence
from .series import COMPLEX, TruncSeries

VERSION = "0.1.0"


# ---------------------------------------------------------------------------
# Deterministic writers

def _json_dump(obj):
    if isinstance(obj, float):
        if obj != obj or obj in (float("inf"), float("-inf")):
            raise ValueError("non-finite float in output")
        return format(obj, ".17g")
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, str)) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{_json_dump(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_json_dump(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _document(command, rows, seed=None, tolerance=None, extra=None):
    meta = {"command": command, "version": VERSION}
    if seed is not None:
        meta["seed"] = seed
    if tolerance is not None:
        meta["tolerance"] = float(tolerance)
    if extra:
        meta.update(extra)
    return {"meta": meta, "rows": rows}


def _emit(args, doc, csv_columns=None):
    fmt = getattr(args, "format", "json")
    if fmt == "csv":
        cols = csv_columns or sorted({k for r in doc["rows"] for k in r})
        lines = [",".join(cols)]
        for r in doc["rows"]:
            cells = []
            for c in cols:
                v = r.get(c, "")
                cells.append(format(v, ".17g") if isinstance(v, float) else str(v))
            lines.append(",".join(cells))
        text = "\n".join(lines) + "\n"
    else:
        text = _json_dump(doc) + "\n"
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Argument helpers

def _parse_forms(text):
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise DomainError(f"malformed form assignment {part!r}, expected LETTER=NAME")
        letter, name = part.split("=", 1)
        letter = letter.strip()
        if not letter:
            raise DomainError("empty letter name")
        out[letter] = modforms.form_by_name(name.strip())
    return out


def _parse_pq(text):
    try:
        p_str, q_str = text.split(",")
        p, q = int(p_str), int(q_str)
    except ValueError as exc:
        raise DomainError(f"malformed --pq {text!r}, expected P,Q") from exc
    if gcd(p, q) != 1:
        raise DomainError(f"({p}, {q}) is not coprime")
    return p, q


def _assignment(args):
    forms = _parse_forms(args.forms)
    for letter, form in forms.items():
        if form.level != 1:
            raise DomainError(f"{form.name} is not a level-one form; use the gamma02 subcommand")
    return eichler.HAssignment.letters(forms)


def _series_rows(series, p, q):
    rows = []
    for w, c in series.items():
        if not w:
            continue
        c = complex(c)
        rows.append({"word": series.alphabet.word_name(w), "p": p, "q": q,
                     "re": c.real, "im": c.imag})
    return rows


# ---------------------------------------------------------------------------
# Subcommands

def cmd_symbol(args):
    h = _assignment(args)
    p, q = _parse_pq(args.pq)
    cfg = eichler.IntegratorConfig(trunc=args.length, tol=args.tol)
    if args.which == "D":
        series = eichler.build_D(h, p, q, cfg)
    elif args.which == "F":
        series = eichler.build_F(h, p, q, cfg)
    else:
        series = eichler.build_E(h, p, q, args.length)
    doc = _document("symbol", _series_rows(series, p, q), tolerance=args.tol,
                    extra={"which": args.which, "forms": args.forms})
    _emit(args, doc, csv_columns=["word", "p", "q", "re", "im"])
    return 0


def _suite_bijection(args):
    from .series import Alphabet

    ab = Alphabet.simple("ab")
    rows = []
    ok = True
    pairs = symbols.sample_pairs(5, seed=args.seed + 1, bound=50)
    for i in range(args.samples):
        d = symbols.random_symbol(ab, 3, seed=args.seed + 10 * i)
        f = symbols.psi(d)
        dn = symbols.normalize(d)
        dd = symbols.delta(f)
        ff = symbols.psi(dd)
        worst = 0.0
        for p, q in pairs:
            worst = max(worst, dd(p, q).max_abs_diff(dn(p, q)), ff(p, q).max_abs_diff(f(p, q)))
        rows.append({"check": f"bijection[{i}]", "worst": worst, "pass": worst == 0.0})
        ok = ok and worst == 0.0
    return rows, ok


def _suite_shuffle(args):
    from .series import Alphabet

    ab = Alphabet.simple("ab")
    rows = []
    ok = True
    pairs = symbols.sample_pairs(10, seed=args.seed + 2, bound=30)
    for i in range(args.samples):
        f1 = symbols.scalar_psi(symbols.random_scalar_symbol(args.seed + 100 + i))
        f2 = symbols.scalar_psi(symbols.random_scalar_symbol(args.seed + 200 + i))
        if args.corrupt and i == 0:
            base = symbols.from_components({"a": f1, "b": f2}, ab, 3)
            fr = symbols.RecipFn(
                lambda p, q: base(p, q) + TruncSeries.term(ab, 3, "ab", 1),
                ab, 3)
        else:
            fr = symbols.from_components({"a": f1, "b": f2}, ab, 3)
        d = symbols.delta(fr)
        worst = 0.0
        for p, q in pairs:
            rep = d(p, q).is_grouplike()
            worst = max(worst, rep.worst)
        rows.append({"check": f"shuffle[{i}]", "worst": worst, "pass": worst == 0.0})
        ok = ok and worst == 0.0
    return rows, ok


def _suite_axioms(args):
    from .series import Alphabet

    ab = Alphabet.simple("ab")
    rows = []
    ok = True
    pairs = symbols.sample_pairs(args.samples, seed=args.seed + 3, bound=30)
    d = symbols.random_symbol(ab, 3, seed=args.seed)
    rep = symbols.verify_mds(d, pairs)
    rows.append({"check": "mds", "worst": rep.worst(), "pass": rep.passed()})
    ok = ok and rep.passed()
    rep = symbols.verify_mrf(symbols.psi(d), pairs)
    rows.append({"check": "mrf", "worst": rep.worst(), "pass": rep.passed()})
    ok = ok and rep.passed()
    return rows, ok


def _suite_reciprocity(args):
    rows = []
    ok = True
    for k2 in args.weights:
        worst = 0.0
        for p in range(2, args.pmax + 1):
            worst = max(worst, modforms.reciprocity_law_check(k2, p).diff)
        good = worst < args.tol
        rows.append({"check": f"reciprocity-law[{k2}]", "worst": worst, "pass": good})
        ok = ok and good
    return rows, ok


def _suite_eichler(args):
    h = eichler.HAssignment.letters({"A": modforms.eisenstein(4), "B": modforms.eisenstein(6)})
    cfg = eichler.IntegratorConfig(trunc=2)
    rows = []
    ok = True
    pairs = [(3, 2), (2, 3), (5, 2)]
    worst_axiom = worst_recip = worst_sh = 0.0
    for p, q in pairs:
        d = eichler.build_D(h, p, q, cfg)
        worst_axiom = max(worst_axiom, d.max_abs_diff(eichler.build_D(h, p, p + q, cfg)))
        worst_axiom = max(worst_axiom,
                          eichler.build_D(h, p, -q, cfg).max_abs_diff(eichler.build_D(h, -p, q, cfg)))
        f = eichler.build_F(h, p, q, cfg)
        e = eichler.build_E(h, p, q, 2)
        lhs = d * e * eichler.build_D(h, -q, p, cfg).inverse()
        worst_recip = max(worst_recip, lhs.max_abs_diff(f))
        worst_sh = max(worst_sh, d.is_grouplike(args.tol).worst)
    for name, worst in [("mds-axioms", worst_axiom), ("reciprocity-identity", worst_recip),
                        ("grouplike", worst_sh)]:
        good = worst < args.tol
        rows.append({"check": f"eichler[{name}]", "worst": worst, "pass": good})
        ok = ok and good
    return rows, ok


_SUITES = {"bijection": _suite_bijection, "shuffle": _suite_shuffle, "axioms": _suite_axioms,
           "reciprocity-law": _suite_reciprocity, "eichler": _suite_eichler}


def cmd_verify(args):
    rows, ok = _SUITES[args.suite](args)
    doc = _document("verify", rows, seed=args.seed, tolerance=args.tol,
                    extra={"suite": args.suite})
    _emit(args, doc, csv_columns=["check", "worst", "pass"])
    return 0 if ok else 1


def cmd_decompose(args):
    h = _assignment(args)
    cfg = eichler.IntegratorConfig(trunc=args.depth)
    dh = eichler.symbol_fn(h, cfg)
    mh = symbols.psi(dh)
    dec = symbols.decompose(mh, args.depth, tol=args.tol)
    pairs = symbols.sample_pairs(args.pq_samples, seed=args.seed, bound=6)
    worst = max(dec.residual(p, q) for p, q in pairs)
    rows = [{"check": "reconstruction-residual", "worst": worst, "pass": worst < args.tol}]
    for w in dec.words:
        fn = dec.scalar_fn(w)
        viol = 0.0
        for p, q in pairs:
            viol = max(viol, abs(fn(p, -q) - fn(-p, q)))
            if p + q != 0:
                viol = max(viol, abs(fn(p, q) - fn(p, p + q)))
        rows.append({"check": f"factor-mds[{h.alphabet.word_name(w)}]", "worst": viol,
                     "pass": viol < args.tol})
    ok = all(r["pass"] for r in rows)
    doc = _document("decompose", rows, seed=args.seed, tolerance=args.tol,
                    extra={"forms": args.forms, "depth": args.depth})
    _emit(args, doc, csv_columns=["check", "worst", "pass"])
    return 0 if ok else 1


def cmd_gamma02(args):
    p, q = _parse_pq(args.pq)
    k2 = args.weight
    dval = modforms.gamma02_D(k2, p, q)
    fval = modforms.gamma02_F(k2, p, q)
    delt = modforms.gamma02_delta(k2, p, q)
    rows = [
        {"name": "D", "p": p, "q": q, "re": dval.real, "im": dval.imag},
        {"name": "F", "p": p, "q": q, "re": fval.real, "im": fval.imag},
        {"name": "delta", "p": p, "q": q, "re": float(delt), "im": 0.0},
    ]
    doc = _document("gamma02", rows, extra={"weight": k2})
    _emit(args, doc, csv_columns=["name", "p", "q", "re", "im"])
    return 0


def cmd_table(args):
    forms = _parse_forms(args.forms)
    for form in forms.values():
        if form.level != 1:
            raise DomainError(f"{form.name} is not a level-one form")
    grid = []
    for p in range(1, args.pmax + 1):
        for q in range(1, p + 1):
            if gcd(p, q) == 1:
                grid.append((p, q))

    def cell(job):
        letter, form, p, q = job
        val = modforms.dedekind_symbol_length1(form, p, q)
        return {"form": letter, "p": p, "q": q, "re": val.real, "im": val.imag}

    jobs = [(letter, form, p, q) for letter, form in sorted(forms.items()) for p, q in grid]
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        rows = list(pool.map(cell, jobs))
    doc = _document("table", rows, extra={"forms": args.forms, "pmax": args.pmax})
    _emit(args, doc, csv_columns=["form", "p", "q", "re", "im"])
    return 0


def cmd_cfrac(args):
    p, q = _parse_pq(args.pq)
    if p < 0:
        p, q = -p, -q
    seq = contfrac.canonical(p, q)
    rows = [{"entries": list(seq.entries),
             "tails": [[pi, qi] for pi, qi in contfrac.tails(seq)]}]
    _emit(args, _document("cfrac", rows, extra={"p": p, "q": q}))
    return 0


# ---------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="dedekindsym",
                                 description="Multiple Dedekind symbols and reciprocity functions")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="write output to a file instead of stdout")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--tol", type=float, default=1e-8)

    sp = sub.add_parser("symbol", help="evaluate the symbol/reciprocity series of modular forms")
    sp.add_argument("--forms", required=True, help="letter assignments, e.g. A=E4,B=E6")
    sp.add_argument("--pq", required=True, help="coprime pair P,Q")
    sp.add_argument("--length", type=int, default=2, help="truncation length")
    sp.add_argument("--which", choices=("D", "F", "E"), default="D")
    common(sp)
    sp.set_defaults(func=cmd_symbol)

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("--suite", choices=sorted(_SUITES), required=True)
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--weights", type=lambda s: [int(x) for x in s.split(",")], default=[4, 6, 8])
    sp.add_argument("--pmax", type=int, default=13)
    sp.add_argument("--corrupt", action="store_true",
                    help="negative control: corrupt one fixture and expect failure")
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("decompose", help="peel a reciprocity function into exponential factors")
    sp.add_argument("--forms", required=True)
    sp.add_argument("--depth", type=int, default=2)
    sp.add_argument("--pq-samples", dest="pq_samples", type=int, default=8)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("gamma02", help="closed forms for the second Gamma_0(2) Eisenstein series")
    sp.add_argument("--weight", type=int, required=True)
    sp.add_argument("--pq", required=True)
    common(sp)
    sp.set_defaults(func=cmd_gamma02)

    sp = sub.add_parser("table", help="tabulate length-one symbols over a coprime grid")
    sp.add_argument("--forms", required=True)
    sp.add_argument("--pmax", type=int, default=6)
    sp.add_argument("--jobs", type=int, default=4)
    common(sp)
    sp.set_defaults(func=cmd_table)

    sp = sub.add_parser("cfrac", help="debug: canonical continued fraction of a pair")
    sp.add_argument("--pq", required=True)
    common(sp)
    sp.set_defaults(func=cmd_cfrac)

    return ap


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    cache_dir = os.environ.get("DEDEKINDSYM_CACHE_DIR")
    if cache_dir:
        modforms.load_coefficient_cache(cache_dir)
    try:
        return args.func(args)
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (DomainError, DedekindSymError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    finally:
        if cache_dir:
            modforms.save_coefficient_cache(cache_dir)


if __name__ == "__main__":
    sys.exit(main())
