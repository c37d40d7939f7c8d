"""Command-line entry point for segtransfer."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from dotenv import load_dotenv
from pydantic import ValidationError

from segtransfer import __version__
from segtransfer.attacks.attack_config import AttackConfig
from segtransfer.attacks.registry import get_attack, registered_attacks
from segtransfer.config.experiment import ExperimentConfig, ModelRegistryEntry, load_experiment_config
from segtransfer.config.settings import Settings
from segtransfer.exceptions import (
    ConfigValidationError,
    RejectedInputError,
    SegTransferError,
)
from segtransfer.harness.dataset import decode_image, decode_labels, encode_image
from segtransfer.harness.experiment import evaluate_models, run_transfer_experiment
from segtransfer.harness.results import TransferMatrix
from segtransfer.harness.sweep import run_iteration_sweep
from segtransfer.metrics.confusion import ConfusionMatrix, accumulate_confusion, miou
from segtransfer.metrics.image_quality import psnr, ssim_or_none
from segtransfer.metrics.report import MetricReport, success_rate
from segtransfer.oracle.operations import predict
from segtransfer.oracle.registry import load_oracle
from segtransfer.reporting.chart_generator import ChartGenerator
from segtransfer.reporting.export_service import (
    RESULT_COLUMNS,
    ExportService,
    format_value,
    load_results,
)
from segtransfer.utils.logger import setup_logging_from_settings
from segtransfer.utils.validation import validate_model_entry

logger = logging.getLogger("segtransfer")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    """Raised instead of exiting when argparse rejects the command line."""

    def __init__(self, message: str, usage: str):
        self.message = message
        self.usage = usage
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message, self.format_usage())


def _model_entry(path: Path) -> ModelRegistryEntry:
    """Read a single model registry entry from a JSON file."""
    try:
        entry = ModelRegistryEntry.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigValidationError([f"model: cannot read {path}: {e}"]) from e
    except ValidationError as e:
        raise ConfigValidationError([
            f"model.{'.'.join(str(p) for p in error['loc'])}: {error['msg']}" for error in e.errors()
        ]) from e
    if entry.weights is not None and not entry.weights.is_absolute():
        entry.weights = path.parent / entry.weights
    validation = validate_model_entry(entry)
    if not validation["is_valid"]:
        raise ConfigValidationError(validation["issues"])
    return entry


def _attack_config(args: argparse.Namespace) -> AttackConfig:
    di: Dict[str, Any] = {}
    if args.di_prob is not None:
        di["probability"] = args.di_prob
    if args.di_scale_min is not None:
        di["scale_min"] = args.di_scale_min
    if args.di_scale_max is not None:
        di["scale_max"] = args.di_scale_max
    kernel: Dict[str, Any] = {}
    if args.kernel_size is not None:
        kernel["size"] = args.kernel_size
    if args.kernel_sigma is not None:
        kernel["sigma"] = args.kernel_sigma

    fields: Dict[str, Any] = {
        "epsilon": args.eps,
        "alpha": args.alpha,
        "iterations": args.iters,
        "seed": args.seed,
        "di": di,
        "kernel": kernel,
    }
    if args.momentum is not None:
        fields["momentum"] = args.momentum
    if args.dag_gamma is not None:
        fields["dag_gamma"] = args.dag_gamma
    if args.dag_max_iter is not None:
        fields["dag_max_iter"] = args.dag_max_iter
    try:
        return AttackConfig.model_validate(fields)
    except ValidationError as e:
        raise ConfigValidationError([
            f"{'.'.join(str(p) for p in error['loc']) or 'attack'}: {error['msg']}" for error in e.errors()
        ]) from e


def cmd_attack(args: argparse.Namespace) -> int:
    """Attack one image on one model and write the adversarial raster plus a metrics sidecar."""
    attack_fn = get_attack(args.attack)
    for flag, path in (("--model", args.model), ("--image", args.image), ("--label", args.label)):
        if not path.is_file():
            raise ConfigValidationError([f"{flag}: file not found: {path}"])
    cfg = _attack_config(args)

    oracle = load_oracle(_model_entry(args.model))
    image = decode_image(args.image)
    labels = decode_labels(args.label, oracle.num_classes, args.ignore_index)

    result = attack_fn(oracle, image, labels, cfg)

    clean_cm = accumulate_confusion(ConfusionMatrix(oracle.num_classes), predict(oracle, image, args.ignore_index), labels)
    adv_cm = accumulate_confusion(
        ConfusionMatrix(oracle.num_classes), predict(oracle, result.adv_image, args.ignore_index), labels
    )
    miou_before = miou(clean_cm)[0]
    miou_after, per_class = miou(adv_cm)
    report = MetricReport(
        miou=miou_after,
        per_class_iou=per_class.tolist(),
        psnr_db=psnr(result.adv_image, image),
        ssim=ssim_or_none(result.adv_image, image),
        success_rate=success_rate(miou_before, miou_after) if miou_before > 0 else None,
    )
    metrics = {
        **report.to_dict(),
        "miou_before": miou_before,
        "attack": args.attack,
        "model": oracle.identifier,
        "linf": result.linf,
        "iterations_used": result.iterations_used,
        "config": result.config_snapshot.model_dump(mode="json"),
        "tool_version": __version__,
    }
    encode_image(result.adv_image.data, args.out)
    sidecar = args.out.with_name(args.out.name + ".metrics.json")
    sidecar.write_text(json.dumps(metrics, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    logger.info(f"Wrote {args.out} and {sidecar}")
    print(json.dumps({key: metrics[key] for key in ("psnr_db", "ssim", "miou_before", "miou", "success_rate")}, indent=2))
    return EXIT_OK


def _experiment_config(args: argparse.Namespace, settings: Settings) -> ExperimentConfig:
    config = load_experiment_config(args.config)
    if settings.WORKERS is not None:
        config.workers = settings.WORKERS
    return config


def format_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Left-aligned text table with columns padded to their widest entry."""
    widths = [len(name) for name in header]
    for row in rows:
        widths = [max(width, len(value)) for width, value in zip(widths, row)]
    lines = [
        "  ".join(value.ljust(width) for value, width in zip(line, widths)).rstrip()
        for line in [list(header)] + [list(row) for row in rows]
    ]
    return "\n".join(lines)


def transfer_table(matrix: TransferMatrix) -> str:
    """The result matrix with exactly the values written to results.csv."""
    rows = [
        [source, attack, format_value(p), format_value(s), target, format_value(m), format_value(r)]
        for source, attack, p, s, target, m, r in matrix.rows()
    ]
    return format_table(RESULT_COLUMNS, rows)


def cmd_evaluate(args: argparse.Namespace, settings: Settings) -> int:
    """Print clean mIoU and per-class IoU of every registered model."""
    config = _experiment_config(args, settings)
    scores = evaluate_models(config)
    rows = [
        [model_id, format_value(score), " ".join("nan" if value != value else f"{value:.4f}" for value in per_class)]
        for model_id, (score, per_class) in scores.items()
    ]
    print(format_table(["model", "miou", "per_class_iou"], rows))
    return EXIT_OK


def cmd_transfer(args: argparse.Namespace, settings: Settings) -> int:
    """Run the transfer matrix, persist it and print it."""
    config = _experiment_config(args, settings)
    matrix = run_transfer_experiment(config)
    ExportService(config.output_dir).persist_results(matrix)
    print(transfer_table(matrix))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    """Run the iteration sweep and write sweep.csv."""
    config = _experiment_config(args, settings)
    rows = run_iteration_sweep(config, args.iterations)
    ExportService(config.output_dir).export_sweep(rows)
    print(format_table(
        ["source", "attack", "iterations", "target", "ssim", "one_minus_miou"],
        [
            [row.source_id, row.attack_name, str(row.iterations), row.target_id,
             format_value(row.ssim), format_value(row.one_minus_miou)]
            for row in rows
        ],
    ))
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    """Render the charts for a persisted results.json."""
    matrix = load_results(args.results)
    for path in ChartGenerator(args.out).generate_all(matrix):
        print(path)
    return EXIT_OK


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="segtransfer",
        description="Adversarial and transferable attacks on semantic segmentation models.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Overrides SEGTRANSFER_LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", parser_class=_Parser)
    subparsers.required = True

    attack = subparsers.add_parser("attack", help="Attack a single image on a single model")
    attack.add_argument("--model", type=Path, required=True, help="JSON model registry entry")
    attack.add_argument("--image", type=Path, required=True, help="Input image raster")
    attack.add_argument("--label", type=Path, required=True, help="Single-channel label raster")
    attack.add_argument(
        "--attack", required=True, help=f"Attack name, one of: {', '.join(registered_attacks())}"
    )
    attack.add_argument("--eps", type=float, default=0.03, help="L-infinity budget in [0, 1] image space")
    attack.add_argument("--alpha", type=float, default=None, help="Step size (default eps/4)")
    attack.add_argument("--iters", type=_positive_int, default=10, help="Attack iterations")
    attack.add_argument("--seed", type=int, default=0, help="Seed for random init and input diversity")
    attack.add_argument("--out", type=Path, required=True, help="Output PNG path")
    attack.add_argument("--ignore-index", type=int, default=255, help="Label value of unlabeled pixels")
    attack.add_argument("--momentum", type=float, default=None, help="Momentum decay factor")
    attack.add_argument("--di-prob", type=float, default=None, help="Probability of the resize/pad transform")
    attack.add_argument("--di-scale-min", type=float, default=None, help="Smallest resize scale")
    attack.add_argument("--di-scale-max", type=float, default=None, help="Largest resize scale")
    attack.add_argument("--kernel-size", type=int, default=None, help="Odd Gaussian kernel size")
    attack.add_argument("--kernel-sigma", type=float, default=None, help="Gaussian kernel sigma")
    attack.add_argument("--dag-gamma", type=float, default=None, help="DAG step size")
    attack.add_argument("--dag-max-iter", type=_positive_int, default=None, help="DAG iteration cap")

    evaluate = subparsers.add_parser("evaluate", help="Clean mIoU of every registered model")
    evaluate.add_argument("--config", type=Path, required=True, help="Experiment configuration (JSON)")

    transfer = subparsers.add_parser("transfer", help="Run the source x attack x target matrix")
    transfer.add_argument("--config", type=Path, required=True, help="Experiment configuration (JSON)")

    sweep = subparsers.add_parser("sweep", help="Image quality and effectiveness versus iterations")
    sweep.add_argument("--config", type=Path, required=True, help="Experiment configuration (JSON)")
    sweep.add_argument(
        "--iterations", type=_positive_int, nargs="+", required=True, help="Iteration counts to evaluate"
    )

    report = subparsers.add_parser("report", help="Render charts from results.json")
    report.add_argument("--results", type=Path, required=True, help="results.json written by transfer")
    report.add_argument("--out", type=Path, required=True, help="Directory for the chart files")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI.

    Returns:
        0 on success, 1 on usage or validation errors, 2 on runtime failures
    """
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(e.usage)
        print(f"segtransfer: error: {e.message}", file=sys.stderr)
        return EXIT_USAGE

    try:
        settings = Settings()
        setup_logging_from_settings(settings, args.log_level)
    except (ValidationError, ValueError) as e:
        print(f"segtransfer: invalid environment: {e}", file=sys.stderr)
        return EXIT_USAGE

    commands: Dict[str, Callable[[], int]] = {
        "attack": lambda: cmd_attack(args),
        "evaluate": lambda: cmd_evaluate(args, settings),
        "transfer": lambda: cmd_transfer(args, settings),
        "sweep": lambda: cmd_sweep(args, settings),
        "report": lambda: cmd_report(args),
    }
    try:
        return commands[args.command]()
    except ConfigValidationError as e:
        print(f"segtransfer: {e}", file=sys.stderr)
        return EXIT_USAGE
    except RejectedInputError as e:
        # Unknown attack names and malformed inputs are caller mistakes
        print(f"segtransfer: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (SegTransferError, OSError) as e:
        logger.error(f"Command '{args.command}' failed: {str(e)}")
        print(f"segtransfer: failed: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
