"""CLI entry point: ``python -m gradlab <command> [options]``"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .app import setup_logging
from .config.experiment import METHODS, SMOOTHERS, ExperimentConfig
from .config.settings import Settings
from .core.errors import GradLabError
from .harness import run_experiment


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _add_data(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--data-images", type=Path, required=required,
                   help="IDX image file (optionally .gz)")
    p.add_argument("--data-labels", type=Path, required=required,
                   help="IDX label file (optionally .gz)")
    p.add_argument("--n-inputs", type=int, default=None,
                   help="Use only the first N images")


def _add_range(p: argparse.ArgumentParser) -> None:
    p.add_argument("--xmin", type=float, default=None,
                   help="Lower data bound (default: dataset range, [0, 1] for IDX)")
    p.add_argument("--xmax", type=float, default=None,
                   help="Upper data bound")


def _add_smoothing(p: argparse.ArgumentParser, n_flag: bool = True) -> None:
    p.add_argument("--alpha", type=float, default=None,
                   help="SmoothGrad noise level, sigma = alpha * range (default: 0.2)")
    p.add_argument("--confidence", "--c", type=float, default=None,
                   help="AdaptGrad confidence level (default: 0.95)")
    if n_flag:
        p.add_argument("--n", type=int, default=50,
                       help="Monte Carlo samples per explanation (default: 50)")


def _add_method(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=METHODS, default="grad",
                   help="Explanation method (default: grad)")
    p.add_argument("--smoother", choices=SMOOTHERS, default="none",
                   help="Input-noise smoother combined with gi/ig/ng (default: none)")
    p.add_argument("--ig-baseline", choices=["black", "white"], default="black",
                   help="Integrated gradients baseline (default: black)")
    p.add_argument("--ig-steps", type=int, default=64,
                   help="Integrated gradients path steps (default: 64)")
    p.add_argument("--ng-models", type=int, default=25,
                   help="NoiseGrad perturbed models (default: 25)")
    p.add_argument("--ng-sigma", type=float, default=0.1,
                   help="NoiseGrad relative parameter noise (default: 0.1)")
    _add_smoothing(p)


def _add_training(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=int, default=20, help="Training epochs (default: 20)")
    p.add_argument("--learning-rate", "--lr", type=float, default=0.01,
                   help="SGD learning rate (default: 0.01)")
    p.add_argument("--batch-size", type=int, default=32, help="Mini-batch size (default: 32)")
    p.add_argument("--hidden-units", type=int, default=200,
                   help="Hidden layer width (default: 200)")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    common.add_argument("--out", type=Path, default=None, help="Output file")
    common.add_argument("--log-file", type=Path, default=None,
                        help="Also write a debug log here (or set GRADLAB_LOG_FILE)")
    common.add_argument("-v", "--verbose", action="count", default=0,
                        help="More log output on stderr (-v info, -vv debug)")

    p = argparse.ArgumentParser(
        prog="gradlab",
        description="Gradient attribution laboratory: SmoothGrad, AdaptGrad and friends.",
    )
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("train", parents=[common], help="Train the MLP on IDX data")
    _add_data(s)
    s.add_argument("--test-images", type=Path, default=None, help="IDX test images")
    s.add_argument("--test-labels", type=Path, default=None, help="IDX test labels")
    _add_training(s)

    s = sub.add_parser("saliency", parents=[common], help="Explain one image")
    s.add_argument("--model", type=Path, required=True, help="AGCK checkpoint")
    _add_data(s)
    s.add_argument("--index", type=int, default=0, help="Image index (default: 0)")
    _add_method(s)
    _add_range(s)
    s.add_argument("--clip-percentile", type=float, default=99.0,
                   help="Rendering percentile clip (default: 99)")

    s = sub.add_parser("render", parents=[common], help="Render a saved saliency CSV to PGM")
    s.add_argument("--saliency", type=Path, required=True, help="Saliency CSV")
    s.add_argument("--width", type=int, default=None)
    s.add_argument("--height", type=int, default=None)
    s.add_argument("--clip-percentile", type=float, default=99.0,
                   help="Percentile clip (default: 99)")

    s = sub.add_parser("noise-report", parents=[common], help="Inherent-noise report (JSON)")
    s.add_argument("--method", choices=["sg", "ag"], default="sg")
    _add_smoothing(s)
    _add_range(s)
    _add_data(s, required=False)
    s.add_argument("--sweep", action="store_true",
                   help="SmoothGrad plus AdaptGrad at c = 0.95, 0.99, 0.995, 0.999")

    s = sub.add_parser("convergence", parents=[common],
                       help="Monte Carlo RMSE against the quadrature oracle (CSV)")
    s.add_argument("--model", type=Path, default=None,
                   help="'sinusoid' (default) or a sinusoid1d checkpoint")
    s.add_argument("--method", choices=["sg", "ag"], default="sg")
    _add_smoothing(s, n_flag=False)
    s.add_argument("--n", dest="sample_counts", type=_int_list, default=None,
                   help="Comma-separated sample counts (default: 10,40,160,640,2560,10240)")
    s.add_argument("--seeds", dest="n_seeds", type=int, default=32,
                   help="Independent seeds per sample count (default: 32)")
    _add_range(s)

    s = sub.add_parser("metrics", parents=[common],
                       help="Sparseness, information level and consistency (CSV)")
    s.add_argument("--model", type=Path, required=True, help="AGCK checkpoint")
    _add_data(s)
    _add_method(s)
    s.add_argument("--methods", type=_str_list, default=None,
                   help="Comma-separated methods to compare, e.g. grad,sg,ag")
    _add_range(s)

    s = sub.add_parser("invariance", parents=[common], help="Constant-shift invariance (CSV)")
    s.add_argument("--model", type=Path, default=None, help="AGCK checkpoint (bias-compensated pair)")
    s.add_argument("--retrain", action="store_true",
                   help="Train both models instead, the second on shifted data")
    s.add_argument("--shift", type=float, default=1.0, help="Constant input shift (default: 1)")
    _add_data(s)
    _add_method(s)
    _add_training(s)
    _add_range(s)

    s = sub.add_parser("oob-rate", parents=[common], help="Empirical out-of-bounds rates (JSON)")
    _add_data(s)
    s.add_argument("--method", choices=["sg", "ag"], default="sg")
    _add_smoothing(s)

    return p


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    try:
        settings = Settings.from_env()
        setup_logging(args.verbose, args.log_file or settings.log_file)
        cfg = ExperimentConfig.from_args(args)
        written = run_experiment(cfg)
    except GradLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code

    for path in written:
        print(f"Wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
