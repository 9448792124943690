"""Command line entry point: ``pifo-bench {verify,run,curve,geo}``."""

import argparse
import json
import logging
import os
import sys

from . import harness


def _parser():
    p = argparse.ArgumentParser(prog="pifo-bench")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run invariant suites")
    v.add_argument("--scope", default="all",
                   choices=["all"] + list(harness.SUITES))
    v.add_argument("--seed", type=int, default=0)

    r = sub.add_parser("run", help="algorithm sweep from a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default="out")
    r.add_argument("--seed", type=int, help="override master_seed")
    r.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default ${harness.WORKERS_ENV} or 1)")

    c = sub.add_parser("curve", help="lower-bound curve table from a JSON config")
    c.add_argument("--config", required=True)
    c.add_argument("--out", default=None, help="CSV path (stdout if omitted)")

    g = sub.add_parser("geo", help="geometric tail tables")
    g.add_argument("--config", help="JSON with cases / m, trials, seed")
    g.add_argument("--m", type=int, nargs="*", default=[2, 4, 8])
    g.add_argument("--trials", type=int, default=0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=None, help="CSV path (stdout if omitted)")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "verify":
        checks = harness.cmd_verify(args.scope, args.seed)
        for c in checks:
            print(json.dumps(dict(scope=c.scope, name=c.name, passed=c.passed,
                                  detail=c.detail)))
        failed = [c for c in checks if not c.passed]
        print(json.dumps(dict(total=len(checks), failed=len(failed))))
        return 1 if failed else 0
    if args.command == "run":
        cfg = harness.load_config(args.config)
        if args.seed is not None:
            cfg["master_seed"] = args.seed
        rows, summary = harness.cmd_run(cfg, args.out, args.workers)
        print(f"wrote {len(rows)} rows to {os.path.join(args.out, 'runs.csv')}")
        return 0
    if args.command == "curve":
        rows = harness.cmd_curve(harness.load_config(args.config), args.out)
        if args.out is None:
            sys.stdout.write(harness.write_csv(None, harness.CURVE_COLUMNS, rows))
        return 0
    if args.command == "geo":
        cfg = harness.load_config(args.config) if args.config else {}
        cfg.setdefault("m", args.m)
        cfg.setdefault("trials", args.trials)
        cfg.setdefault("seed", args.seed)
        rows, reports = harness.cmd_geo(cfg, args.out)
        if args.out is None:
            sys.stdout.write(harness.write_csv(None, harness.GEO_COLUMNS, rows))
        for rep in reports:
            print(json.dumps(dict(m=rep.m, threshold=rep.threshold, exact=rep.exact,
                                  mc_lower99=rep.mc_lower99, passed=rep.passed)),
                  file=sys.stderr)
        return 0 if all(r.passed for r in reports) else 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
