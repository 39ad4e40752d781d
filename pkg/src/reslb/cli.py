"""Command-line front end.

    reslb run      --scenario S --policy P --seed N --out DIR [--dump-indices] [--quiet]
    reslb compare  --scenario S --seeds N --out DIR [--workers W] [--dump-indices] [--quiet]
    reslb validate --scenario S

Exit codes: 0 success, 1 invalid scenario / arguments / unreadable input,
2 runtime failure (for ``compare``: at least one run failed; finished runs
are still written).  ``--scenario builtin:NAME`` loads a scenario shipped
with the package (e.g. ``builtin:desk_17cell``).
"""

import argparse
import os
import sys
from importlib import resources

from . import metrics
from .engine import RunFailure, run, run_batch
from .errors import IoError, RangeError, SimError
from .scenario import POLICIES, load_scenario, normalize_policy, read_scenario, validate_scenario

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def scenario_path(arg):
    if arg.startswith("builtin:"):
        name = arg.split(":", 1)[1]
        return str(resources.files("reslb") / "scenarios" / f"{name}.json")
    return arg


def _err(msg):
    print(f"reslb: {msg}", file=sys.stderr)


def _load(args):
    try:
        return load_scenario(scenario_path(args.scenario))
    except SimError as exc:
        _err(str(exc))
        return None


def cmd_run(args):
    try:
        policy = normalize_policy(args.policy)
    except RangeError as exc:
        _err(str(exc))
        return EXIT_INVALID
    sc = _load(args)
    if sc is None:
        return EXIT_INVALID
    seed = sc.seed if args.seed is None else args.seed
    try:
        res = run(sc, seed, policy)
        metrics.emit(res, args.out, dump_indices=args.dump_indices)
    except IoError as exc:
        _err(str(exc))
        return EXIT_RUNTIME
    except SimError as exc:
        _err(f"run failed: {exc}")
        return EXIT_RUNTIME
    if not args.quiet:
        s = metrics.run_summary(res)
        line = f"{policy} seed={seed} mean_prb_index={s['mean_prb_index']:.4f}"
        if "final_mean_soc" in s:
            line += f" final_mean_soc={s['final_mean_soc']:.4f}"
        print(line)
    return EXIT_OK


def run_dir_name(policy, seed):
    return f"{policy.lower()}_seed{seed:03d}"


def cmd_compare(args):
    if args.seeds < 1:
        _err("--seeds must be >= 1")
        return EXIT_INVALID
    sc = _load(args)
    if sc is None:
        return EXIT_INVALID
    results = run_batch(sc, range(args.seeds), POLICIES, workers=args.workers)
    ok, failed = [], []
    try:
        for r in results:
            if isinstance(r, RunFailure):
                failed.append(r)
                _err(f"{r.policy} seed={r.seed} failed: {r.error}")
                continue
            metrics.emit(r, os.path.join(args.out, "runs", run_dir_name(r.policy, r.seed)),
                         dump_indices=args.dump_indices)
            ok.append(r)
        # only fully paired seeds enter the comparison
        good = {s for s in range(args.seeds)} - {f.seed for f in failed}
        summary = metrics.policy_comparison([r for r in ok if r.seed in good]) if good else {}
        summary["failed_runs"] = [{"policy": f.policy, "seed": f.seed, "error": f.error}
                                  for f in failed]
        metrics.emit_summary(summary, args.out)
    except SimError as exc:
        _err(str(exc))
        return EXIT_RUNTIME
    if not args.quiet and good:
        for p, e in summary["policies"].items():
            soc = e.get("final_mean_soc")
            extra = f" final_mean_soc={soc['mean']:.4f}+-{soc['std']:.4f}" if soc else ""
            print(f"{p:6s} mean_prb_index={e['mean_prb_index']['mean']:.4f}{extra}")
    return EXIT_RUNTIME if failed else EXIT_OK


def cmd_validate(args):
    try:
        sc = read_scenario(scenario_path(args.scenario))
    except SimError as exc:
        _err(str(exc))
        return EXIT_INVALID
    problems = validate_scenario(sc)
    for p in problems:
        print(p)
    return EXIT_INVALID if problems else EXIT_OK


def build_parser():
    ap = _Parser(prog="reslb", description="RES-aware load balancing simulator")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="single policy / seed run")
    p.add_argument("--scenario", required=True)
    p.add_argument("--policy", default="EPRLB", help=f"one of {', '.join(POLICIES)}")
    p.add_argument("--seed", type=int, default=None, help="defaults to the scenario seed")
    p.add_argument("--out", required=True)
    p.add_argument("--dump-indices", action="store_true")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="all three policies over seeds 0..N-1")
    p.add_argument("--scenario", required=True)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--dump-indices", action="store_true")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
