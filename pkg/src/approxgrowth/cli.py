"""Command-line entry point: ``approxgrowth <command> ...``.

Instances are written ``FAMILY[:GEN|GEN|...]``, for example ``lattice(1):1``
or ``heisenberg``.  Every number printed is an integer or a ``p/q`` rational.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction

from .covering import format_rational
from .errors import ApproxGrowthError
from .pipeline import UNVERIFIED_AT_SCALE, default_corpus_path, fuzz, parse_instance, run_corpus, verify_report, verify_theorem
from .sets import DEFAULT_BUDGET, PowerChain, growth_profile, limits
from .structure import doubling_to_approx

log = logging.getLogger("approxgrowth")


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def cmd_growth(args) -> int:
    inst = parse_instance(args.instance)
    with limits(args.budget):
        profile = growth_profile(inst.generators, args.radius)
    text = profile.to_csv()
    if args.csv:
        _write(args.csv, text)
        print(f"wrote {args.csv} (radius {args.radius}, |S^{args.radius}| = {profile.values[-1]})")
    else:
        sys.stdout.write(text)
    return 0


def cmd_doubling(args) -> int:
    inst = parse_instance(args.instance)
    n = args.n
    with limits(args.budget):
        chain = PowerChain(inst.generators)
        a, b = chain.size(n), chain.size(2 * n)
    K = Fraction(b, a)
    print(f"|S^{n}| = {a}")
    print(f"|S^{2 * n}| = {b}")
    print(f"K = {format_rational(K)}")
    print(f"discrete threshold n >= 2K^2: {n >= 2 * K**2} (2K^2 = {format_rational(2 * K**2)})")
    print(f"lc threshold n >= 8K^4: {n >= 8 * K**4} (8K^4 = {format_rational(8 * K**4)})")
    return 0


def cmd_extract(args) -> int:
    inst = parse_instance(args.instance)
    with limits(args.budget):
        chain = PowerChain(inst.generators)
        Sn = chain.get(args.n)
        K = Fraction(chain.size(2 * args.n), len(Sn))
        dc = doubling_to_approx(Sn, K)
    data = {
        "instance": inst.to_dict() | {"n": args.n},
        "K": format_rational(K),
        "checked_bounds": {
            name: {"realized": format_rational(a), "bound": format_rational(b)} for name, (a, b) in dc.bounds.items()
        },
        "stages": {"cover": dc.cover.to_dict(), "approximate_group_U": dc.approx.to_dict()},
    }
    text = json.dumps(data, indent=1, sort_keys=True) + "\n"
    if args.json:
        _write(args.json, text)
    print(f"K = {format_rational(K)}; |V| = {len(dc.v)}, |U| = {len(dc.u)}, |X| = {len(dc.centers)}")
    print("X = {" + ", ".join(inst.group.render(x) for x in dc.centers) + "}")
    return 0


def cmd_verify(args) -> int:
    inst = parse_instance(args.instance, n=args.n, budget=args.budget)
    report = verify_theorem(inst)
    text = report.to_json()
    if args.json:
        _write(args.json, text)
    checks = verify_report(json.loads(text))
    print(f"K = {format_rational(report.K) or 'not computed'}")
    print(f"realized tripling = {format_rational(report.realized_tripling) or 'not computed'}")
    print(f"realized bound = {format_rational(report.realized_bound) or 'not computed'}")
    print(f"stages completed: {', '.join(report.completed)}")
    for name, ok in checks.items():
        print(f"certificate {name}: {'ok' if ok else 'FAILED'}")
    if report.inclusion_verified:
        print(f"inclusion {report.propagation['conclusion']}: verified ({report.propagation['method']})")
    elif UNVERIFIED_AT_SCALE in report.flags:
        print(f"{UNVERIFIED_AT_SCALE}: {report.error}")
    for flag in report.flags:
        if flag != UNVERIFIED_AT_SCALE:
            print(f"note: {flag}")
    return 0 if all(checks.values()) else 1


def cmd_corpus(args) -> int:
    config = args.config or default_corpus_path()
    status, rows = run_corpus(config, args.out, workers=args.workers)
    for row in rows:
        print(f"{row['instance']}: n={row['n']} K={row['K']} tripling={row['realized_tripling']} verified={row['verified']}")
    print(f"wrote {len(rows)} report(s) and summary.csv to {args.out}")
    return status


def cmd_fuzz(args) -> int:
    report = fuzz(args.seed, args.trials)
    text = report.to_json()
    if args.out:
        _write(args.out, text)
    total = sum(report.checks.values())
    print(f"{total} checks, {len(report.violations)} violation(s)")
    return 1 if report.violations else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="approxgrowth", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, instance=True):
        p = sub.add_parser(name, help=help_text)
        if instance:
            p.add_argument("instance", help="FAMILY[:GEN|GEN|...], e.g. 'lattice(2)' or 'cyclic(30):1'")
        p.set_defaults(func=func)
        return p

    p = add("growth", cmd_growth, "growth function |S^n| for n = 0..N")
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--csv", help="write the n,beta table here")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)

    p = add("doubling", cmd_doubling, "doubling constant of S^n and the radius thresholds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)

    p = add("extract", cmd_extract, "cover S^n by an approximate group, S^n ⊆ XU")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--json", help="write the certificates here")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)

    p = add("verify", cmd_verify, "run and check the full tripling-bound chain")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--json", help="write the report here")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)

    p = add("corpus", cmd_corpus, "verify every instance of a corpus file", instance=False)
    p.add_argument("config", nargs="?", help="corpus file (default: the bundled corpus)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=1)

    p = add("fuzz", cmd_fuzz, "randomised inequality and identity checks", instance=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--out", help="write the JSON report here")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ApproxGrowthError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
