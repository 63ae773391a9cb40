"""Command-line shell: ``dot generate | train | reconstruct | evaluate``.

Exit codes: 0 success, 1 internal failure, 2 configuration or usage error,
3 missing or malformed files, 4 training diverged.
"""

import argparse
import sys
import time
from typing import List, Optional

from ..config import load_config
from ..errors import DotError
from ..utils.logging import RunLoggerAdapter, setup_logger
from ..utils.telemetry import COMMAND_COUNTER, COMMAND_LATENCY, write_metrics
from . import commands


def _on_off(value: str) -> bool:
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return value == "on"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dot", description="Diffuse optical tomography workbench")
    parser.add_argument("--config", help="TOML run configuration")
    parser.add_argument("--log-level", help="override the configured log level")
    parser.add_argument("--metrics-file", help="write solver and training counters here at exit")
    parser.add_argument("--deterministic", action="store_true", help="serialize all parallel work")
    sub = parser.add_subparsers(dest="command", required=True)

    generate = sub.add_parser("generate", help="simulate a dataset")
    generate.add_argument("--out", required=True)
    generate.add_argument("--n", type=int)
    generate.add_argument("--seed", type=int)
    generate.add_argument("--kind", choices=["train", "test"], default="train")
    generate.add_argument("--ood", action="store_true", help="elliptical out-of-distribution test set")

    train = sub.add_parser("train", help="train a reconstruction network")
    train.add_argument("--arch", choices=["mod-dot-fc", "mod-dot-conv", "e2e-fc", "e2e-conv"], default="mod-dot-conv")
    train.add_argument("--loss", choices=["mse", "mse-l1", "mse-ae"])
    train.add_argument("--noise", type=float)
    train.add_argument("--pretrain", type=_on_off, default=True, metavar="{on,off}")
    train.add_argument("--denoise", type=_on_off, default=False, metavar="{on,off}")
    train.add_argument("--data", required=True)
    train.add_argument("--out", required=True)

    reconstruct = sub.add_parser("reconstruct", help="reconstruct a dataset")
    reconstruct.add_argument("--method", choices=list(commands.METHODS), required=True)
    reconstruct.add_argument("--model")
    reconstruct.add_argument("--noise", type=float, default=0.0)
    reconstruct.add_argument("--data", required=True)
    reconstruct.add_argument("--out", required=True)

    evaluate = sub.add_parser("evaluate", help="score reconstructions")
    evaluate.add_argument("--recon", required=True)
    evaluate.add_argument("--truth", required=True)
    evaluate.add_argument("--out", required=True)
    evaluate.add_argument("--compare", help="second reconstruction directory for the MSE histogram")
    return parser


def run(args: argparse.Namespace) -> None:
    overrides = {}
    if args.log_level:
        overrides["log_level"] = args.log_level
    if args.metrics_file:
        overrides["metrics_file"] = args.metrics_file
    if args.deterministic:
        overrides["deterministic"] = True
    config = load_config(args.config, **overrides)
    setup_logger("dot", config.log_level)

    try:
        if args.command == "generate":
            kind = "ood" if args.ood else args.kind
            commands.generate(config, args.out, n_samples=args.n, seed=args.seed, kind=kind)
        elif args.command == "train":
            commands.train(
                config,
                args.data,
                args.out,
                architecture=args.arch,
                loss=args.loss,
                noise=args.noise,
                pretrain=args.pretrain,
                denoise=args.denoise,
            )
        elif args.command == "reconstruct":
            commands.reconstruct(config, args.method, args.data, args.out, model_dir=args.model, noise=args.noise)
        elif args.command == "evaluate":
            report = commands.evaluate(config, args.recon, args.truth, args.out, compare_dir=args.compare)
            sys.stdout.write(commands.format_summary(report))
    finally:
        if config.metrics_file:
            write_metrics(config.metrics_file)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2

    logger = RunLoggerAdapter(setup_logger("dot"), {"stage": args.command})
    start_time = time.perf_counter()
    try:
        run(args)
    except DotError as e:
        logger.error(str(e), extra={"exit_code": e.exit_code})
        COMMAND_COUNTER.labels(command=args.command, result="error").inc()
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        COMMAND_COUNTER.labels(command=args.command, result="error").inc()
        return 1
    finally:
        COMMAND_LATENCY.labels(command=args.command).observe(time.perf_counter() - start_time)

    COMMAND_COUNTER.labels(command=args.command, result="success").inc()
    return 0


if __name__ == "__main__":
    sys.exit(main())
