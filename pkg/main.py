"""
LiDAR OOD benchmark: dataset generation, OOD head training, evaluation and ablations
"""
import argparse
import sys
from pathlib import Path

from src.core.bench.harness import (
    ABLATION_AXES, cmd_ablate, cmd_eval, cmd_gen_data, cmd_report, cmd_train
)
from src.models.config import RunConfig
from src.utils.errors import ConfigError, DatasetFormatError, UndefinedMetricError

DEFAULT_CONFIG = "configs/benchmark.yaml"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Post-hoc OOD detection benchmark on synthetic LiDAR scenes")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_dataset=True):
        p.add_argument("--config", default=DEFAULT_CONFIG, help="Run config YAML")
        p.add_argument("--out", help="Output directory")
        if needs_dataset:
            p.add_argument("--dataset", default="data/dataset", help="Dataset directory from gen-data")
        p.add_argument("--seed-override", type=int, help="Run a single head seed instead of the configured list")
        p.add_argument("--force", action="store_true", help="Overwrite a non-empty output directory")
        p.add_argument("--jobs", type=int, default=1, help="Threads for scene-level stages")
        p.add_argument("--quiet", action="store_true", help="No progress output")

    common(sub.add_parser("gen-data", help="Generate train/val/test scenes"), needs_dataset=False)
    common(sub.add_parser("train", help="Train one OOD head per seed"))

    p_eval = sub.add_parser("eval", help="Evaluate OOD head and baselines")
    common(p_eval)
    p_eval.add_argument("--checkpoints", default="outputs/checkpoints", help="Checkpoint directory from train")

    p_ablate = sub.add_parser("ablate", help="Train and evaluate along one ablation axis")
    common(p_ablate)
    p_ablate.add_argument("--axis", required=True, choices=ABLATION_AXES)

    p_report = sub.add_parser("report", help="Re-render tables from a results file")
    p_report.add_argument("results", help="results.json, ablation_<axis>.json or an eval output directory")
    return parser


def load_config(args) -> RunConfig:
    config = RunConfig.from_yaml(args.config)
    if args.seed_override is not None:
        config = config.with_seeds([args.seed_override])
    return config


def run(args) -> None:
    if args.command == "report":
        cmd_report(Path(args.results))
        return

    verbose = not args.quiet
    config = load_config(args)
    output_root = Path(config.eval.output_dir)

    if verbose:
        print("=" * 70)
        print(f"LIDAR OOD BENCH - {args.command.upper()}")
        print("=" * 70)
        print(f"Config: {args.config}")
        print(f"Seeds: {list(config.head.seeds)}")
        print(f"Feature maps: {list(config.detector.feature_maps)}")
        print("=" * 70)

    if args.command == "gen-data":
        cmd_gen_data(config, Path(args.out or "data/dataset"), args.force, args.jobs, verbose)
    elif args.command == "train":
        cmd_train(config, Path(args.dataset), Path(args.out or output_root / "checkpoints"),
                  args.force, args.jobs, verbose)
    elif args.command == "eval":
        cmd_eval(config, Path(args.dataset), Path(args.checkpoints), Path(args.out or output_root / "eval"),
                 args.force, args.jobs, verbose)
    elif args.command == "ablate":
        cmd_ablate(config, args.axis, Path(args.dataset), Path(args.out or output_root / f"ablation_{args.axis}"),
                   args.force, args.jobs, verbose)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run(args)
    except (ConfigError, DatasetFormatError, UndefinedMetricError, FileExistsError, FileNotFoundError, ValueError) as e:
        print(f"✗ {e}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        print("\n⚠️  Stopped by user", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
