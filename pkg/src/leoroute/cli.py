"""Command-line entry points: train, eval, compare."""

from __future__ import annotations

import argparse
import sys

from .harness import compare, run_eval, run_train
from .scenario import desk_scenario, load_scenario, paper_scale_scenario


def _scenario_from_args(args, required=True):
    if getattr(args, "scenario", None):
        return load_scenario(args.scenario)
    preset = getattr(args, "preset", None)
    if preset == "desk":
        return desk_scenario()
    if preset == "paper-scale":
        return paper_scale_scenario()
    if required:
        raise SystemExit("a --scenario file or --preset is required")
    return None


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="leoroute",
        description="LEO constellation packet-routing simulator with "
                    "risk-constrained multi-agent learning")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train one algorithm on a scenario")
    p_train.add_argument("--scenario", help="scenario YAML file")
    p_train.add_argument("--preset", choices=["desk", "paper-scale"],
                         help="built-in scenario preset")
    p_train.add_argument("--algo", required=True,
                         help="PRIMAL-Avg | PRIMAL-CVaR | MADQN")
    p_train.add_argument("--seed", type=int, default=None)
    p_train.add_argument("--out", required=True, help="output directory")

    p_eval = sub.add_parser("eval", help="greedy evaluation over seeds")
    p_eval.add_argument("--checkpoint", help="checkpoint file from train")
    p_eval.add_argument("--baseline", choices=["spf", "random"],
                        help="evaluate a baseline instead of a checkpoint")
    p_eval.add_argument("--scenario", help="scenario YAML (defaults to the "
                                           "one embedded in the checkpoint)")
    p_eval.add_argument("--preset", choices=["desk", "paper-scale"])
    p_eval.add_argument("--seeds", required=True,
                        help="comma-separated evaluation seeds, e.g. 1,2,3")
    p_eval.add_argument("--out", required=True)

    p_cmp = sub.add_parser("compare", help="tabulate two or more reports")
    p_cmp.add_argument("reports", nargs="+", help="report.json files")
    p_cmp.add_argument("--out", default=None)

    args = parser.parse_args(argv)

    if args.command == "train":
        scenario = _scenario_from_args(args)
        result = run_train(scenario, args.algo, seed=args.seed, out_dir=args.out)
        r = result.report
        print(f"trained {result.algo} (seed {result.seed}): "
              f"drop_rate={r.drop_rate:.4f} "
              f"mean_queuing={1e3 * r.queuing_mean_s:.2f} ms")
        print(f"checkpoint: {result.checkpoint_path}")
        return 0

    if args.command == "eval":
        if bool(args.checkpoint) == bool(args.baseline):
            raise SystemExit("exactly one of --checkpoint / --baseline")
        scenario = _scenario_from_args(args, required=bool(args.baseline))
        seeds = [int(s) for s in args.seeds.split(",") if s]
        source = args.checkpoint or args.baseline
        result = run_eval(scenario, source, seeds, out_dir=args.out)
        r = result.aggregate
        print(f"evaluated {result.algo} over seeds {result.seeds}: "
              f"drop_rate={r.drop_rate:.4f} "
              f"mean_queuing={1e3 * r.queuing_mean_s:.2f} ms "
              f"cvar={1e3 * (r.queuing_cvar_s or 0):.2f} ms")
        print(f"report: {result.report_path}")
        return 0

    if args.command == "compare":
        print(compare(args.reports, out_dir=args.out))
        return 0

    return 1


if __name__ == "__main__":
    sys.exit(main())
