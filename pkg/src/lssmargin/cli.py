"""Command-line front end (``lssmargin``).

Exit codes: 0 success, 2 invalid input, 3 budget exceeded, 4 classifier
hypotheses unmet.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .classifier import BlockFamily, classify, example1_blocks, example1_family
from .ctsim import (SwitchingLaw, check_f_decreasing, example2_family, lyapunov_f_many, propagate,
                    random_law, run_trials, trajectory_csv)
from .dominance import candidate_dominant, verify_dominance
from .errors import BudgetExceeded, HypothesesUnmet, InsufficientData, InvalidInput, NumericOverflow
from .familyio import load_family
from .growth import DEFAULT_BUDGET, exact_mk, growth_exponent, jsr_bounds, mk_series, GrowthSeries
from .polynorm import build_parallelotope, is_barabanov
from .sublinear import (fit_cubic_exponent, good_n_sequence, infinite_product_prefixes, witness_table,
                        witnesses_csv)
from .words import as_word, partition, word_str

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_HYPOTHESES = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _emit(args, text: str, csv_text: Optional[str], obj: dict) -> None:
    fmt = args.format
    if fmt == "csv":
        if csv_text is None:
            raise InvalidInput(f"'{args.command}' has no CSV output; use text or json")
        out = csv_text
    elif fmt == "json":
        out = json.dumps(obj, indent=2, default=_json_default) + "\n"
    else:
        out = text
    if args.out:
        Path(args.out).write_text(out)
    else:
        sys.stdout.write(out)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(type(o).__name__)


def _series_text(series: GrowthSeries) -> str:
    lines = [f"{'k':>4}  {'M_k':>22}  witness"]
    lines += [f"{k:>4}  {mk:>22.15g}  {word_str(w)}" for k, mk, w in series.entries]
    return "\n".join(lines) + "\n"


# -- subcommands ------------------------------------------------------------------------


def cmd_mk(args) -> int:
    fam = load_family(args.family).family
    if args.threads > 1:
        entries = []
        for k in range(args.kmin, args.kmax + 1):
            mk, w = exact_mk(fam, k, budget=args.budget, workers=args.threads)
            entries.append((k, mk, w))
        series = GrowthSeries(tuple(entries))
    else:
        series = mk_series(fam, args.kmax, kmin=args.kmin, budget=args.budget)
    obj = {"series": [{"k": k, "mk": mk, "witness": word_str(w)} for k, mk, w in series.entries]}
    text = _series_text(series)
    try:
        slope, err = growth_exponent(series, k_min=max(args.kmin, args.kmax // 2))
        obj["growth_exponent"], obj["growth_exponent_stderr"] = slope, err
        text += f"growth exponent (k >= {max(args.kmin, args.kmax // 2)}): {slope:.4f} +/- {err:.4f}\n"
    except InsufficientData:
        pass
    _emit(args, text, series.to_csv(), obj)
    return EXIT_OK


def cmd_jsr(args) -> int:
    fam = load_family(args.family).family
    b = jsr_bounds(fam, args.kmax, budget=args.budget)
    obj = {"lower": b.lower, "upper": b.upper, "witness_lower": word_str(b.witness_word_lower),
           "witness_upper": word_str(b.witness_word_upper), "k_used": b.k_used}
    text = (f"JSR in [{b.lower:.12g}, {b.upper:.12g}] (products up to length {b.k_used})\n"
            f"lower witness: {word_str(b.witness_word_lower)}\n"
            f"upper witness: {word_str(b.witness_word_upper)}\n")
    csv_text = "lower,upper,witness_lower,witness_upper,k_used\n" + \
        f"{b.lower!r},{b.upper!r},{obj['witness_lower']},{obj['witness_upper']},{b.k_used}\n"
    _emit(args, text, csv_text, obj)
    return EXIT_OK


def cmd_dominance(args) -> int:
    fam = load_family(args.family).family
    if args.pi is None:
        cand = candidate_dominant(fam, args.lmax)
        pi, rho = cand.pi, cand.rho_estimate
    else:
        pi, rho = as_word(args.pi), None
    cert = verify_dominance(fam, pi, args.horizon, args.q, rho=rho, tol=args.tol)
    _emit(args, cert.to_text(), None, cert.to_dict())
    return EXIT_OK


def cmd_classify(args) -> int:
    ff = load_family(args.family)
    d1 = args.d1 if args.d1 is not None else ff.d1
    if d1 is None:
        raise InvalidInput("block structure needed: pass --d1 or declare 'blocks' in the family file")
    bf = BlockFamily.from_family(ff.family, d1)
    res = classify(bf, args.horizon, args.q, args.tol)
    _emit(args, res.to_text(), None, res.to_dict())
    return EXIT_OK


def cmd_partition(args) -> int:
    if args.word is not None:
        w = as_word(args.word)
    elif args.random_length is not None:
        rng = np.random.default_rng(args.seed)
        w = tuple(int(c) for c in rng.integers(0, 2, args.random_length))
    else:
        raise InvalidInput("pass --word or --random-length")
    part = partition(w, args.pi, args.M)
    rows = [(i, s.color, len(s), word_str(s.word)) for i, s in enumerate(part.segments)]
    obj = {"pi": word_str(part.pi), "M": part.M, "l": part.l, "N": part.N,
           "segments": [{"color": c, "length": n, "word": ws} for _, c, n, ws in rows]}
    text = f"pi={word_str(part.pi)} M={part.M} l={part.l} N={part.N} segments={len(rows)}\n"
    text += "".join(f"{i:>4} {c:<5} {n:>6} {ws}\n" for i, c, n, ws in rows)
    csv_text = "index,color,length,word\n" + "".join(f"{i},{c},{n},{ws}\n" for i, c, n, ws in rows)
    _emit(args, text, csv_text, obj)
    return EXIT_OK


def cmd_cubic(args) -> int:
    ns = good_n_sequence(args.alpha, args.count)
    ws = witness_table(args.alpha, list(ns), args.method, workers=args.threads)
    obj = {"alpha": args.alpha, "good_n": list(ns), "precision_limited": ns.precision_limited,
           "witnesses": [{"n": w.n, "N": w.N, "norm": w.norm, "lower_formula": w.lower_formula,
                          "ratio": w.ratio, "path": w.path} for w in ws]}
    lines = [f"{'n':>6} {'N':>14} {'norm':>14} {'lower':>14} {'norm/N^(1/3)':>13} path"]
    lines += [f"{w.n:>6} {w.N:>14} {w.norm:>14.8g} {w.lower_formula:>14.8g} {w.ratio:>13.6f} {w.path}"
              for w in ws]
    if len(ws) >= 3:
        slope, err = fit_cubic_exponent(args.alpha, list(ns), args.method)
        obj["slope"], obj["stderr"] = slope, err
        lines.append(f"fitted exponent: {slope:.4f} +/- {err:.4f}")
    if args.prefixes:
        pp = infinite_product_prefixes(args.alpha, args.prefixes)
        obj["prefixes"] = [{"j": r.j, "n": r.n, "Mk": r.Mk, "log_norm": r.log_norm, "ratio": r.ratio}
                           for r in pp.rows]
        obj["c0"], obj["c1"], obj["prefixes_truncated"] = pp.c0, pp.c1, pp.truncated
        lines.append(f"infinite product prefixes (C0={pp.c0:.6g}, C1={pp.c1:.6g}):")
        lines += [f"  j={r.j} n={r.n} M={r.Mk} log|P|/log M={r.ratio:.6f}" for r in pp.rows]
    _emit(args, "\n".join(lines) + "\n", witnesses_csv(ws), obj)
    return EXIT_OK


def _parse_law(text: str) -> SwitchingLaw:
    segs = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            d, c = part.split(":")
            segs.append((float(d), int(c)))
        except ValueError:
            raise InvalidInput(f"law segment {part!r} must look like duration:letter") from None
    return SwitchingLaw(segs)


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise InvalidInput(f"cannot parse vector {text!r}") from None


def cmd_ct(args) -> int:
    fam = load_family(args.family).family if args.family else example2_family(s=args.s)
    law = _parse_law(args.law)
    x0 = _parse_vector(args.x0)
    traj = propagate(fam, law, x0, args.dt)
    rep = check_f_decreasing(fam, law, x0, None, args.dt, f_letter=args.f_letter)
    fvals = lyapunov_f_many(fam[args.f_letter], traj.states)
    text = (f"samples: {len(traj.times)}  t_end: {traj.times[-1]:.6g}\n"
            f"sup |x(t)|: {rep.sup_norm:.12g}\n"
            f"sigma estimate: {rep.sigma_estimate:.6g}\n"
            f"f monotonicity violations: {rep.f_monotone_violations}\n")
    _emit(args, text, trajectory_csv(traj, fvals), rep.to_dict())
    return EXIT_OK


def cmd_example1(args) -> int:
    fam = example1_family(args.a, args.s)
    poly = build_parallelotope(args.a)
    bar = is_barabanov(poly, fam, samples=360, tol=1e-9)
    res = classify(example1_blocks(args.a, args.s), args.horizon)
    series = mk_series(fam, args.kmax)
    mks = series.mks
    ratio = float(mks.max() / mks.min())
    obj = {"a": args.a, "s": args.s,
           "barabanov": {"ok": bar.ok, "max_deviation": bar.max_deviation, "samples": bar.samples},
           "classification": res.to_dict(),
           "mk": [{"k": k, "mk": mk, "witness": word_str(w)} for k, mk, w in series.entries],
           "mk_max_over_min": ratio}
    text = (f"family: sB (letter 0), A1 = [[1, {args.a:g}], [0, -1]] (letter 1), s = {args.s:g}\n"
            f"parallelotope Barabanov check: {'pass' if bar.ok else 'fail'} "
            f"(max deviation {bar.max_deviation:.3g} over {bar.samples} points)\n"
            + res.to_text() + _series_text(series) + f"max M_k / min M_k = {ratio:.6g}\n")
    _emit(args, text, series.to_csv(), obj)
    return EXIT_OK


def cmd_example2(args) -> int:
    fam = example2_family(s=args.s)
    rng = np.random.default_rng(args.seed)
    laws = []
    for _ in range(args.trials):
        laws.append(random_law(rng, args.segments).truncate(args.t_max))
    x0 = np.array([0.0, 0.0, 1.0, 0.0])
    reps = run_trials(fam, laws, x0, args.dt, workers=args.threads)
    pure_a2 = check_f_decreasing(fam, SwitchingLaw([(args.t_max / 10, 1)] * 10), x0, None, args.dt)
    x0n = float(np.linalg.norm(x0))
    obj = {
        "s": args.s, "trials": args.trials,
        "max_sup_norm_ratio": max(r.sup_norm for r in reps) / x0n,
        "total_f_violations": sum(r.f_monotone_violations for r in reps),
        "max_sigma_estimate": max(r.sigma_estimate for r in reps),
        "pure_A2": pure_a2.to_dict(),
    }
    text = (f"s = {args.s:g}, {args.trials} random {args.segments}-segment laws, t <= {args.t_max:g}\n"
            f"max sup |x(t)| / |x0|: {obj['max_sup_norm_ratio']:.6g}\n"
            f"f monotonicity violations on A2 segments: {obj['total_f_violations']}\n"
            f"max sigma estimate: {obj['max_sigma_estimate']:.6g}\n"
            f"pure A2 law: violations {pure_a2.f_monotone_violations}, sigma {pure_a2.sigma_estimate:.6g}\n")
    csv_text = "trial,sup_norm,sigma_estimate,f_violations\n" + "".join(
        f"{i},{r.sup_norm!r},{r.sigma_estimate!r},{r.f_monotone_violations}\n" for i, r in enumerate(reps))
    _emit(args, text, csv_text, obj)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "csv", "json"), default="text")
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--threads", type=int, default=1, help="worker processes for enumeration")

    p = _Parser(prog="lssmargin", description="Marginal instability of linear switching systems.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("mk", parents=[common], help="worst-case product norms M_k")
    s.add_argument("--family", required=True)
    s.add_argument("--kmax", type=int, required=True)
    s.add_argument("--kmin", type=int, default=1)
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.set_defaults(func=cmd_mk)

    s = sub.add_parser("jsr", parents=[common], help="brute-force JSR bounds")
    s.add_argument("--family", required=True)
    s.add_argument("--kmax", type=int, required=True)
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.set_defaults(func=cmd_jsr)

    s = sub.add_parser("dominance", parents=[common], help="finite-horizon dominance certificate")
    s.add_argument("--family", required=True)
    s.add_argument("--pi", help="word to certify (default: best candidate)")
    s.add_argument("--horizon", type=int, default=12)
    s.add_argument("--q", type=float, default=0.95)
    s.add_argument("--lmax", type=int, default=8)
    s.add_argument("--tol", type=float, default=1e-8)
    s.set_defaults(func=cmd_dominance)

    s = sub.add_parser("classify", parents=[common], help="classify a two-block family")
    s.add_argument("--family", required=True)
    s.add_argument("--d1", type=int)
    s.add_argument("--horizon", type=int, default=12)
    s.add_argument("--q", type=float, default=0.95)
    s.add_argument("--tol", type=float, default=1e-8)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("partition", parents=[common], help="split a word into pi-powers and black words")
    s.add_argument("--word")
    s.add_argument("--random-length", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--pi", default="01")
    s.add_argument("--M", type=int, default=0)
    s.set_defaults(func=cmd_partition)

    s = sub.add_parser("cubic", parents=[common], help="N^(1/3) growth witnesses of the 3x3 pair")
    s.add_argument("--alpha", default="pi*sqrt2", help="number, or pi*sqrt2 / pi*phi")
    s.add_argument("--count", type=int, default=4)
    s.add_argument("--method", choices=("auto", "direct", "closed"), default="auto")
    s.add_argument("--prefixes", type=int, default=0, help="also build this many infinite-product prefixes")
    s.set_defaults(func=cmd_cubic)

    s = sub.add_parser("ct", parents=[common], help="simulate a continuous-time switching law")
    s.add_argument("--family", help="family file (default: the 4x4 pair)")
    s.add_argument("--s", type=float, default=10.0)
    s.add_argument("--law", required=True, help="comma list of duration:letter")
    s.add_argument("--x0", required=True, help="comma-separated initial state")
    s.add_argument("--dt", type=float, default=0.01)
    s.add_argument("--f-letter", type=int, default=0)
    s.set_defaults(func=cmd_ct)

    s = sub.add_parser("example1", parents=[common], help="the 2x2 marginally stable pair")
    s.add_argument("--a", type=float, default=2.0)
    s.add_argument("--s", type=float, default=0.1)
    s.add_argument("--kmax", type=int, default=12)
    s.add_argument("--horizon", type=int, default=12)
    s.set_defaults(func=cmd_example1)

    s = sub.add_parser("example2", parents=[common], help="the 4x4 continuous-time pair")
    s.add_argument("--s", type=float, default=10.0)
    s.add_argument("--trials", type=int, default=50)
    s.add_argument("--segments", type=int, default=20)
    s.add_argument("--t-max", type=float, default=100.0)
    s.add_argument("--dt", type=float, default=0.01)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_example2)
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: budget exceeded: {exc} (largest complete length {exc.achieved})", file=sys.stderr)
        return EXIT_BUDGET
    except HypothesesUnmet as exc:
        print(f"error: hypotheses unmet (block {exc.block}, {exc.reason}): {exc}", file=sys.stderr)
        return EXIT_HYPOTHESES
    except (InvalidInput, InsufficientData, NumericOverflow) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
