"""Command line interface.

Exit codes: 0 success, 1 usage error (bad arguments or config), 2 runtime
failure. Subcommands::

    goodarms run --config cfg.json --out runs.csv [--jobs N]
    goodarms preset --name fig1|fig2|fig3 [--scale F] [--full] [--jobs N] --out DIR
    goodarms hardness --instance FILE --k K --m M --eps E [--delta D]
    goodarms lb-instance --n N --m M --k K --eps E [--set I ...] [--out FILE]
    goodarms aggregate --in runs.csv --out summary.csv
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import analysis, harness
from .core import FiniteBandit, UsageError, make_lower_bound_instance
from .instancefile import dumps_instance, load_instance


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; our contract says 1
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="goodarms", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default="runs.csv")
    p_run.add_argument("--jobs", type=int, default=None,
                       help="override the config's parallelism width")

    p_pre = sub.add_parser("preset", help="run a built-in experiment protocol")
    p_pre.add_argument("--name", required=True, choices=harness.PRESETS)
    p_pre.add_argument("--scale", type=float, default=1.0,
                       help="multiply repetition counts (default 1.0)")
    p_pre.add_argument("--full", action="store_true",
                       help="lift the desk-scale n <= 50 cap on fig1")
    p_pre.add_argument("--jobs", type=int, default=1)
    p_pre.add_argument("--out", required=True, help="output directory")

    p_hard = sub.add_parser("hardness", help="instance hardness diagnostics")
    p_hard.add_argument("--instance", required=True)
    p_hard.add_argument("--k", type=int, required=True)
    p_hard.add_argument("--m", type=int, required=True)
    p_hard.add_argument("--eps", type=float, required=True)
    p_hard.add_argument("--delta", type=float, default=0.001)

    p_lb = sub.add_parser("lb-instance", help="emit a lower-bound instance file")
    p_lb.add_argument("--n", type=int, required=True)
    p_lb.add_argument("--m", type=int, required=True)
    p_lb.add_argument("--k", type=int, required=True)
    p_lb.add_argument("--eps", type=float, required=True)
    p_lb.add_argument("--set", type=int, nargs="*", default=[], dest="included",
                      help="indices of the raised-mean set (size k-1 or m)")
    p_lb.add_argument("--out", default=None)

    p_agg = sub.add_parser("aggregate", help="aggregate runs.csv into summary.csv")
    p_agg.add_argument("--in", dest="infile", required=True)
    p_agg.add_argument("--out", required=True)
    return parser


def _cmd_run(args) -> None:
    config = harness.ExperimentConfig.from_json(Path(args.config).read_text())
    if args.jobs is not None:
        config = dataclasses.replace(config, parallelism=args.jobs)
    rows = harness.run_experiment(config)
    harness.write_runs_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")


def _cmd_preset(args) -> None:
    configs = harness.preset(args.name, scale=args.scale, full=args.full,
                             parallelism=args.jobs)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for config in configs:
        rows.extend(harness.run_experiment(config))
    harness.write_runs_csv(rows, out_dir / "runs.csv")
    (out_dir / "configs.json").write_text(json.dumps(
        [json.loads(c.to_json()) for c in configs], indent=2) + "\n")
    print(f"wrote {len(rows)} rows to {out_dir / 'runs.csv'}")


def _cmd_hardness(args) -> None:
    instance = load_instance(args.instance)
    if not isinstance(instance, FiniteBandit):
        raise UsageError("hardness diagnostics need a finite instance file")
    profile = analysis.hardness_profile(instance, args.k, args.m, args.eps,
                                        args.delta)
    print(f"n={instance.n}")
    print(f"gaps={list(profile.deltas)}")
    print(f"h_eps={profile.h_eps!r}")
    print(f"t_star={profile.t_star}")


def _cmd_lb_instance(args) -> None:
    instance = make_lower_bound_instance(args.n, args.m, args.k, args.eps,
                                         args.included)
    text = dumps_instance(instance)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)


def _cmd_aggregate(args) -> None:
    rows = harness.read_csv_rows(args.infile)
    summary = harness.aggregate(rows)
    harness.write_summary_csv(summary, args.out)
    print(f"wrote {len(summary)} groups to {args.out}")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "run": _cmd_run,
            "preset": _cmd_preset,
            "hardness": _cmd_hardness,
            "lb-instance": _cmd_lb_instance,
            "aggregate": _cmd_aggregate,
        }[args.command]
        handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help and explicit argparse exits
        code = exc.code if isinstance(exc.code, int) else 0
        return code
    except Exception as exc:  # noqa: BLE001 - contract: runtime failures exit 2
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
