"""Command line front end.

Exit codes: 0 success, 1 episode or I/O failure, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import sys

from .batch import run_batch, summarize
from .errors import ConfigParse, IoFailure, MalformedFrame, PortBusy
from .scenario import load_config, validate_config

EXIT_OK = 0
EXIT_EPISODE = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rmpadapt",
        description="Scripted inspection episodes with operator-driven "
                    "mission policy re-weighting.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run scripted episodes and write traces")
    run_p.add_argument("--config", required=True, help="scenario YAML")
    run_p.add_argument("--operator", required=True,
                       choices=("perfect", "noisy", "idle", "replay"))
    run_p.add_argument("--seeds", type=int, default=1,
                       help="number of seeded episodes (seeds 0..N-1)")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--noise-std", type=float, default=0.2,
                       help="input noise for the noisy operator")
    run_p.add_argument("--replay-trace", default=None,
                       help="source trace for the replay operator")

    sum_p = sub.add_parser("summarize", help="rebuild summary.csv from traces")
    sum_p.add_argument("--traces", required=True, help="directory of trace files")
    sum_p.add_argument("--out", default=None, help="summary path (default: alongside traces)")

    serve_p = sub.add_parser("serve", help="serve one live episode")
    serve_p.add_argument("--config", required=True, help="scenario YAML")
    serve_p.add_argument("--port", type=int, default=8734)
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--trace-out", default=None,
                         help="where to write the session trace")

    val_p = sub.add_parser("validate", help="check a scenario config")
    val_p.add_argument("--config", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return run_batch(args.config, args.operator, args.seeds, args.out,
                             noise_std=args.noise_std,
                             replay_trace=args.replay_trace)
        if args.command == "summarize":
            summarize(args.traces, args.out)
            return EXIT_OK
        if args.command == "validate":
            validate_config(load_config(args.config))
            print(f"{args.config}: ok")
            return EXIT_OK
        if args.command == "serve":
            from .service import serve
            from .scenario import load_scenario
            serve(load_scenario(args.config), host=args.host, port=args.port,
                  trace_path=args.trace_out)
            return EXIT_OK
    except ConfigParse as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IoFailure, MalformedFrame, PortBusy) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EPISODE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
