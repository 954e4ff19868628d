"""
Command-line entry point: verify, bench and race-demo.
"""

import argparse
import sys

from engine_settings import get_engine_config
from monitoring.logging_config import configure_logging, log_error

from bench_cli.commands import cmd_bench, cmd_race_demo, cmd_verify
from bench_cli.sweep import load_sweep_config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="preacc-bench",
                                     description="Local preaccumulation strategies for parallel AD")
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", help="Run the correctness self-checks")
    verify.add_argument("--config", help="Sweep configuration (JSON)")

    bench = commands.add_parser("bench", help="Measure every strategy over a worker-count sweep")
    bench.add_argument("--config", required=True, help="Sweep configuration (JSON)")
    bench.add_argument("--out", required=True, help="CSV output path")

    race = commands.add_parser("race-demo", help="Replay the shared-input data race")
    race.add_argument("--seed", type=int, default=0, help="Interleaving seed (0 = lockstep)")
    race.add_argument("--enumerate", action="store_true", help="Also run every interleaving")
    race.add_argument("--mode", choices=["reverse", "forward"], default="reverse", help="Sweep mode")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    engine = get_engine_config()
    configure_logging(engine.logging.level, engine.logging.file_path)

    if args.command == "race-demo":
        if args.seed < 0:
            print("error: --seed must be non-negative", file=sys.stderr)
            return 2
        return cmd_race_demo(args.seed, args.enumerate, args.mode)

    try:
        config = load_sweep_config(args.config)
    except (OSError, ValueError) as e:
        log_error(f"Could not load sweep configuration {args.config}: {e}", "CONFIG")
        print(f"error: invalid configuration {args.config}: {e}", file=sys.stderr)
        return 2

    if args.command == "verify":
        return cmd_verify(config, engine)
    return cmd_bench(config, args.out, engine)


if __name__ == "__main__":
    sys.exit(main())
