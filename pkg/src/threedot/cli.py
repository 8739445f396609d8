"""Command-line front end.

Exit codes: 0 success, 1 a verification failed, 2 usage error, 3 a resource
bound (exact-table length or skeleton depth) was hit.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction
from typing import Callable

from threedot import block, field, joinings, lemma, odometer
from threedot.gf2 import LengthBound, dyadic_log2
from threedot.kernels import SkeletonOverflow
from threedot.rng import stream_key

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BOUND = 0, 1, 2, 3


class UsageError(ValueError):
    pass


# argument parsing helpers

def parse_range(text: str) -> list[int]:
    """``"1..6"`` or ``"1,2,5"`` or ``"4"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"bad range {text!r}") from None


def parse_rect(text: str) -> tuple[int, int]:
    try:
        w, h = (int(t) for t in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"bad rectangle {text!r}, expected WxH") from None
    if w < 1 or h < 1:
        raise UsageError("rectangle sides must be positive")
    return w, h


def parse_pair(text: str) -> tuple[int, int]:
    try:
        i, j = (int(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"bad coordinate pair {text!r}") from None
    return i, j


def parse_window(text: str) -> tuple[int, int]:
    """Half-open ``a:b`` to ``(start, length)``."""
    try:
        a, b = (int(t) for t in text.split(":"))
    except ValueError:
        raise UsageError(f"bad window {text!r}, expected a:b") from None
    if b <= a:
        raise UsageError(f"empty window {text!r}")
    return a, b - a


def parse_skeleton(text: str | None) -> odometer.SkeletonState | None:
    if text is None:
        return None
    digits = text.replace(",", "")
    if any(c not in "012" for c in digits):
        raise UsageError(f"skeleton digits must be 0, 1 or 2: {text!r}")
    return odometer.SkeletonState(tuple(int(c) for c in digits))


def parse_pairs_spec(text: str) -> list[int]:
    if not text.startswith("gaps="):
        raise UsageError(f"bad --pairs {text!r}, expected gaps=A..B")
    return parse_range(text[5:])


def fmt(x) -> str:
    """Stable decimal text for exact or float numbers."""
    if isinstance(x, Fraction) and x.denominator == 1:
        return str(x.numerator)
    v = float(x)
    if v == 0:
        return "0"
    return format(v, ".12g")


def fmt_coord(c) -> str:
    return f"{c[0]},{c[1]}" if isinstance(c, tuple) else str(c)


def fmt_log2(p: Fraction) -> str:
    e = dyadic_log2(p)
    return str(e) if e is not None else format(math.log2(p), ".12g")


class Out:
    """Collects the text of one command and writes it once."""

    def __init__(self) -> None:
        self.buf = io.StringIO()

    def csv(self, header, rows) -> None:
        w = csv.writer(self.buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)

    def json(self, obj) -> None:
        self.buf.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def text(self, s: str) -> None:
        self.buf.write(s)

    def flush(self, path: str | None) -> None:
        data = self.buf.getvalue()
        if path:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(data)
        else:
            sys.stdout.write(data)


# sample

def cmd_sample(args, out: Out) -> int:
    if args.N < 1:
        raise UsageError("-N must be positive")
    if args.source == "field":
        w, h = parse_rect(args.rect or "16x16")
        win = field.Window2D(parse_pair(args.corner), w, h)
        mats = [field.sample_field(win, _sub_seed(args.seed, s)) for s in range(args.N)]
        fmt_ = args.format or "pbm"
        if fmt_ == "pbm":
            out.text("".join(field.to_pbm(m) for m in mats))
        elif fmt_ == "csv":
            rows = [(s, win.corner[1] + r, "".join(map(str, m[r])))
                    for s, m in enumerate(mats) for r in range(h - 1, -1, -1)]
            out.csv(["sample", "j", "bits"], rows)
        else:
            out.json({"source": "field", "corner": list(win.corner), "width": w, "height": h,
                      "seed": args.seed,
                      "samples": [["".join(map(str, m[r])) for r in range(h - 1, -1, -1)]
                                  for m in mats]})
        return EXIT_OK
    start, length = parse_window(args.window or "0:8")
    if args.source == "stationary":
        skel = parse_skeleton(args.skeleton)
        arr = odometer.sample_windows(start, length, args.N, args.seed, skel)
    elif args.source == "block":
        if start < 0:
            raise UsageError("the block process starts at coordinate 0")
        arr = block.sample_windows(start, length, args.N, args.seed)
    else:
        raise UsageError(f"sampling is not available for source {args.source!r}")
    words = ["".join(map(str, r)) for r in arr]
    fmt_ = args.format or "csv"
    if fmt_ == "csv":
        out.csv(["sample", "word"], enumerate(words))
    elif fmt_ == "json":
        out.json({"source": args.source, "start": start, "length": length, "seed": args.seed,
                  "skeleton": args.skeleton, "words": words})
    else:
        lines = ["P1", f"{length} {len(words)}"] + [" ".join(w) for w in words]
        out.text("\n".join(lines) + "\n")
    return EXIT_OK


def _sub_seed(seed: int, s: int) -> int:
    return seed if s == 0 else stream_key(seed, s)


# window

def cmd_window(args, out: Out) -> int:
    if args.source == "field":
        w, h = parse_rect(args.rect or "2x2")
        law = field.window_distribution(field.Window2D(parse_pair(args.corner), w, h))
    elif args.source == "block":
        start, length = parse_window(args.window or "0:3")
        if start < 0:
            raise UsageError("the block process starts at coordinate 0")
        law = block.window_distribution(start, length)
    elif args.source == "stationary":
        start, length = parse_window(args.window or "0:3")
        if length > 6:
            raise LengthBound("exact stationary laws are limited to 6 coordinates")
        law = odometer.exact_window_law(start, length)
    else:
        src = joinings.make_source(args.source)
        start, length = parse_window(args.window or "0:3")
        law = src.law([src.line(start, length)])
    rows = [("".join(k), str(p), fmt_log2(p)) for k, p in sorted(law.items())]
    out.csv(["config", "probability_num", "probability_log2"], rows)
    return EXIT_OK


# verify

Check = tuple[str, bool, str]


def _suite_field(args) -> list[Check]:
    nmax = 10 if args.nmax is None else args.nmax
    bad = [(i, j, n) for n in range(nmax + 1) for i in range(-8, 9) for j in range(-8, 9)
           if not field.scaled_rule_residual(i, j, n).is_zero()]
    out = [("scale_identity", not bad, f"n<={nmax}, |i|,|j|<=8, failures={len(bad)}")]
    side = args.len or 4
    worst = []
    for w in range(1, side + 1):
        for h in range(1, side + 1):
            law = field.window_distribution(field.Window2D((0, 0), w, h))
            if not (law.is_uniform() and len(law) == 2 ** (w + h - 1)):
                worst.append(f"{w}x{h}")
    out.append(("uniform_windows", not worst, f"sides<={side}, failures={worst}"))
    tri = True
    for n in range(nmax + 1):
        law, pairwise, mutual = field.triple_dependence_witness(n)
        even = all(k[0] + k[1] + k[2] in ("000", "011", "101", "110") for k in law.support)
        tri &= pairwise and not mutual and even and len(law) == 4
    out.append(("triple_witness", tri, f"n<={nmax}"))
    return out


def _suite_block(args) -> list[Check]:
    kmax = 10 if args.nmax is None else args.nmax
    p0 = block.window_distribution(0, 3)["111"]
    p1 = block.window_distribution(1, 3)["111"]
    out = [("p111_start0", p0 == 0, f"P={p0}"), ("p111_start1", p1 == Fraction(1, 8), f"P={p1}")]
    ok = all((block.coord_expr(j) ^ block.coord_expr(3 ** k + j)
              ^ block.coord_expr(2 * 3 ** k + j)).is_zero()
             for k in range(kmax + 1) for j in range(min(3 ** k, 243)))
    out.append(("triple_identity", ok, f"k<={kmax}"))
    kb = min(kmax, 3)
    out.append(("block_independence", all(block.block_independence_check(k)
                                          for k in range(kb + 1)), f"k<={kb}"))
    out.append(("overlap_independence", all(block.overlap_independence_check(k)
                                            for k in range(kb + 1)), f"k<={kb}"))
    bad = []
    for ell in (1, 2, 3):
        thr = block.mixing_threshold(ell)
        rows = block.mixing_profile_1d(ell, range(thr + 1, 101))
        bad += [(ell, g) for g, tv in rows if tv != 0]
    out.append(("mixing_profile", not bad, f"l<=3, gaps<=100, nonzero={bad[:5]}"))
    return out


def _suite_region(args) -> list[Check]:
    side = args.len or 2
    return [(f"regions_side{s}", field.region_independence_check(s), "|coords|<=8")
            for s in range(1, side + 1)]


def _suite_lemma(args) -> list[Check]:
    a = args.alphabet or 3
    out = []
    for size in range(1, a + 1):
        rep = lemma.lemma_search(size)
        out.append((f"search_A{size}", rep.counterexample is None,
                    f"functions={rep.functions}, grid_hits={rep.grid_hits}, "
                    f"exact_systems={rep.exact_systems}"))
    for name, t in (("xor_triple", lemma.xor_triple()), ("mod3_triple", lemma.mod3_triple())):
        v = lemma.check_lemma_instance(t)
        out.append((name, v.hypotheses_met and v.uniform, v.status))
    m = args.len or 3
    verdicts = [lemma.check_lemma_instance(t) for w in range(1, m + 1)
                for t in lemma.gf2_word_triples(w)]
    out.append(("gf2_triples", all(v.consistent for v in verdicts),
                f"word length<={m}, instances={len(verdicts)}"))
    return out


def _suite_dichotomy(args) -> list[Check]:
    horizon = args.horizon or 8
    out = []
    d = lemma.classify_dichotomy(lemma.word_census(joinings.Rot3Source(), horizon))
    out.append(("rot3_periodic", d.verdict == "periodic" and d.entropy_bits == 0,
                f"{d.verdict}, entropy={fmt(d.entropy_bits)}"))
    d = lemma.classify_dichotomy(lemma.word_census(joinings.IIDSource(), horizon))
    out.append(("iid_entropy", d.verdict == "entropy>=log2" and d.entropy_bits >= 1,
                f"{d.verdict}, entropy={fmt(d.entropy_bits)}"))
    c = lemma.word_census(joinings.FieldSource(), horizon)
    d = lemma.classify_dichotomy(c)
    out.append(("field_monotone", d.monotone, f"{d.verdict}, entropy={fmt(d.entropy_bits)}"))
    return out


def _suite_stationarity(args) -> list[Check]:
    ell = args.len or 3
    n = args.N or 1_000_000
    sources = [args.source] if args.source in ("stationary", "block") else ["stationary", "block"]
    out = []
    for src in sources:
        rep = odometer.stationarity_check(ell, n, args.seed, source=src)
        expect = src == "stationary"
        out.append((f"{src}_{'stationary' if expect else 'rejected'}", rep.passed == expect,
                    f"passed={rep.passed}, max_tv={fmt(rep.max_tv)}, worst_z={fmt(rep.worst_z)}"))
    return out


def _suite_odometer(args) -> list[Check]:
    out = []
    s = odometer.SkeletonState((0,) * 6)
    orbit = []
    for _ in range(30):
        orbit.append(s.digits[0])
        s = odometer.shift_skeleton(s)
    out.append(("s0_period3", orbit == [0, 1, 2] * 10, ""))
    offs = odometer.offsets_by_iteration(6)
    out.append(("origin_increments", offs == list(range(3 ** 6)), "K=6"))
    inv = all(set(odometer.shift_pushforward(K).values()) == {Fraction(1, 3 ** K)}
              and len(odometer.shift_pushforward(K)) == 3 ** K for K in range(1, 7))
    out.append(("uniform_shift_invariant", inv, "K<=6"))
    n = min(args.N or 10_000, 100_000)
    rep = odometer.conditional_triple_check(1, odometer.SkeletonState((0, 0, 0)), n, args.seed)
    out.append(("conditional_triple", rep.passed,
                f"violations={rep.parity_violations}, chi2={[fmt(c) for c in rep.chi2_pairs]}"))
    return out


SUITES: dict[str, Callable[[argparse.Namespace], list[Check]]] = {
    "field": _suite_field,
    "block": _suite_block,
    "region": _suite_region,
    "lemma": _suite_lemma,
    "dichotomy": _suite_dichotomy,
    "stationarity": _suite_stationarity,
    "odometer": _suite_odometer,
}


def cmd_verify(args, out: Out) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = []
    for name in names:
        t = time.perf_counter()
        checks = SUITES[name](args)
        if args.verbose:
            print(f"{name}: {time.perf_counter() - t:.2f}s", file=sys.stderr)
        results += [(name, c, ok, detail) for c, ok, detail in checks]
    if args.format == "json":
        out.json([{"suite": s, "check": c, "pass": ok, "detail": d} for s, c, ok, d in results])
    else:
        out.csv(["suite", "check", "result", "detail"],
                [(s, c, "pass" if ok else "FAIL", d) for s, c, ok, d in results])
    return EXIT_OK if all(ok for _, _, ok, _ in results) else EXIT_FAIL


# profile

def _triple_pairs(source, ns: list[int]) -> list[tuple]:
    if source.name == "field":
        # windows at (0,0), (0,2^n) and (2^n,0)
        return [((0, 2 ** n), (2 ** n, -2 ** n)) for n in ns]
    return [(3 ** n, 3 ** n) for n in ns]


def cmd_profile(args, out: Out) -> int:
    src = joinings.make_source(args.source)
    ell = args.len or 1
    n = args.N if not src.exact else None
    if src.name == "stationary" and n is None:
        n = 100_000
    if args.pairs:
        gaps = parse_pairs_spec(args.pairs)
        rows = []
        for g in gaps:
            off = (g, 0) if src.name == "field" else g
            j = joinings.delta_p(src, off, ell, n, args.seed)
            rows.append((g, fmt(joinings.triple_tv(j))))
        out.csv(["gap", "tv_distance"], rows)
        return EXIT_OK
    pairs = _triple_pairs(src, parse_range(args.triples)) if args.triples else []
    for spec in args.pq or []:
        p, q = spec.split(";") if ";" in spec else spec.split(",")
        pairs.append((int(p), int(q)))
    if not pairs:
        raise UsageError("profile needs --triples, --pairs or --pq")
    rows = joinings.product_distance_profile(src, ell, pairs, depth=args.depth, n=n,
                                             rng_seed=args.seed)
    out.csv(["p", "q", "pairwise_tv_max", "triple_tv", "d_truncated", "trunc_bound"],
            [(fmt_coord(r.p), fmt_coord(r.q), fmt(r.pairwise_tv_max), fmt(r.triple_tv),
              fmt(r.d_truncated), fmt(r.trunc_bound)) for r in rows])
    return EXIT_OK


# census, lemma, reports

def cmd_census(args, out: Out) -> int:
    src = joinings.make_source(args.source)
    c = lemma.word_census(src, args.horizon, strict=False)
    out.csv(["m", "p_m", "a_m", "uniform", "entropy_lb_bits"],
            [(r.m, r.p_m, str(r.a_m), str(r.uniform).lower(), fmt(r.entropy_lb_bits))
             for r in c.rows])
    d = lemma.classify_dichotomy(c)
    print(f"{src.name}: {d.verdict} (entropy bound {fmt(d.entropy_bits)} bits; {d.note})",
          file=sys.stderr)
    return EXIT_OK


def cmd_lemma(args, out: Out) -> int:
    if not 1 <= args.alphabet <= 4:
        raise UsageError("--alphabet must be 1..4")
    rep = lemma.lemma_search(args.alphabet, args.grid)
    verdicts = {name: json.loads(lemma.check_lemma_instance(t).to_json())
                for name, t in (("xor", lemma.xor_triple()), ("mod3", lemma.mod3_triple()))}
    out.json({"alphabet": rep.alphabet, "functions": rep.functions,
              "grid_points": rep.grid_points, "grid_hits": rep.grid_hits,
              "exact_systems": rep.exact_systems,
              "counterexample": None if rep.counterexample is None
              else {"|".join(k): str(v) for k, v in rep.counterexample.items()},
              "instances": verdicts})
    return EXIT_OK if rep.counterexample is None else EXIT_FAIL


def cmd_stationarity(args, out: Out) -> int:
    rep = odometer.stationarity_check(args.len, args.N, args.seed, source=args.source)
    out.csv(["start", "word", "freq"], [(s, w, fmt(f)) for s, w, f in rep.rows])
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_triples(args, out: Out) -> int:
    skel = parse_skeleton(args.skeleton) or odometer.SkeletonState(())
    rows = []
    ok = True
    for k in parse_range(args.k):
        s = skel.extended((0,) * max(0, k + 1 - skel.K))
        base = odometer.aligned_base(s, k) if args.base is None else args.base
        rep = odometer.conditional_triple_check(k, s, args.N, args.seed, base)
        ok &= rep.passed
        rows.append((k, rep.parity_violations, ";".join(fmt(c) for c in rep.chi2_pairs)))
    out.csv(["k", "parity_violations", "chi2_pairs"], rows)
    return EXIT_OK if ok else EXIT_FAIL


# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with the same keys as the flags")
    common.add_argument("-o", "--output", help="output file (default: stdout)")
    common.add_argument("--seed", type=int, default=0, help="64-bit master seed")

    p = argparse.ArgumentParser(prog="threedot", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", parents=[common], help="draw samples")
    s.add_argument("--source", choices=["field", "block", "stationary"], default="field")
    s.add_argument("--rect", help="field rectangle WxH")
    s.add_argument("--corner", default="0,0", help="lower-left field corner i,j")
    s.add_argument("--window", help="half-open coordinate range a:b")
    s.add_argument("--skeleton", help="fixed skeleton digits, e.g. 120")
    s.add_argument("-N", type=int, default=1, help="number of samples")
    s.add_argument("--format", choices=["csv", "json", "pbm"])
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("window", parents=[common], help="exact window distribution")
    s.add_argument("--source", choices=sorted(joinings.SOURCES), default="field")
    s.add_argument("--rect")
    s.add_argument("--corner", default="0,0")
    s.add_argument("--window")
    s.set_defaults(func=cmd_window)

    s = sub.add_parser("verify", parents=[common], help="run exact and statistical checks")
    s.add_argument("--suite", choices=[*SUITES, "all"], default="all")
    s.add_argument("--nmax", type=int, help="largest scale exponent / block level")
    s.add_argument("--alphabet", type=int, help="largest alphabet for the lemma search")
    s.add_argument("--len", type=int, help="window length or side")
    s.add_argument("--horizon", type=int, help="census horizon")
    s.add_argument("-N", type=int, help="Monte Carlo sample count")
    s.add_argument("--source", choices=["stationary", "block"])
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s.add_argument("-v", "--verbose", action="store_true", help="suite timings on stderr")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("profile", parents=[common], help="mixing and joining profiles")
    s.add_argument("--source", choices=sorted(joinings.SOURCES), default="block")
    s.add_argument("--triples", help="scale exponents n, e.g. 1..6")
    s.add_argument("--pq", action="append", help="explicit p,q (repeatable)")
    s.add_argument("--pairs", help="two-window gaps, e.g. gaps=1..30")
    s.add_argument("--len", type=int, help="window length")
    s.add_argument("--depth", type=int, default=4, help="cylinder truncation depth")
    s.add_argument("-N", type=int, help="samples for sampled sources")
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("census", parents=[common], help="word counts p_m and ratios a_m")
    s.add_argument("--source", choices=sorted(joinings.SOURCES), default="rot3")
    s.add_argument("--horizon", type=int, default=8)
    s.set_defaults(func=cmd_census)

    s = sub.add_parser("lemma", parents=[common], help="counterexample search (JSON)")
    s.add_argument("--alphabet", type=int, default=2)
    s.add_argument("--grid", type=int, default=12, help="largest marginal denominator")
    s.set_defaults(func=cmd_lemma)

    s = sub.add_parser("stationarity", parents=[common], help="word frequencies per start")
    s.add_argument("--len", type=int, default=3)
    s.add_argument("-N", type=int, default=100_000)
    s.add_argument("--source", choices=["stationary", "block"], default="stationary")
    s.set_defaults(func=cmd_stationarity)

    s = sub.add_parser("triples", parents=[common], help="conditioned parity/chi-square report")
    s.add_argument("--k", default="0..2")
    s.add_argument("--skeleton", help="fixed skeleton digits (padded with zeros)")
    s.add_argument("--base", type=int, help="first coordinate (default: aligned)")
    s.add_argument("-N", type=int, default=10_000)
    s.set_defaults(func=cmd_triples)
    return p


def config_argv(cfg: dict) -> list[str]:
    """Turn a config mapping into flags; ``command`` names the subcommand."""
    argv = []
    for key, val in cfg.items():
        if key == "command" or val is None or val is False:
            continue
        flag = ("-" if len(key) == 1 else "--") + key.replace("_", "-")
        if val is True:
            argv.append(flag)
        elif isinstance(val, list):
            argv += [f"{flag}={v}" for v in val]
        else:
            argv.append(f"{flag}={val}")
    return argv


def expand_config(argv: list[str]) -> list[str]:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return argv
    with open(known.config, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    cmd = cfg.get("command")
    if rest and not rest[0].startswith("-"):
        cmd = rest.pop(0)
    if cmd is None:
        raise UsageError("config names no command")
    return [cmd, *config_argv(cfg), *rest]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = expand_config(argv)
    except (OSError, ValueError) as e:
        print(f"threedot: {e}", file=sys.stderr)
        return EXIT_USAGE
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    out = Out()
    try:
        code = args.func(args, out)
    except UsageError as e:
        print(f"threedot: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (LengthBound, SkeletonOverflow) as e:
        print(f"threedot: resource bound: {e}", file=sys.stderr)
        return EXIT_BOUND
    except odometer.BadAlignment as e:
        print(f"threedot: {e}", file=sys.stderr)
        return EXIT_USAGE
    out.flush(args.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
