import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

import argparse

from src.core.bench.harness import cmd_ablate, cmd_eval, cmd_gen_data, cmd_train
from src.models.config import RunConfig

BASELINES = ["default", "msp", "odin", "max_logit", "energy"]


def main():
    parser = argparse.ArgumentParser(description="End-to-end quality checks on a full benchmark run")
    parser.add_argument("--config", default="configs/benchmark.yaml")
    parser.add_argument("--out", default="outputs/acceptance")
    parser.add_argument("--min-auroc", type=float, default=85.0)
    parser.add_argument("--min-seeds", type=int, default=4, help="Seeds on which the AUPR-E ordering must hold")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--skip-ablation", action="store_true")
    args = parser.parse_args()

    config_dict = RunConfig.from_yaml(args.config).to_dict()
    config_dict["eval"]["methods"] = BASELINES + ["ours"]
    config = RunConfig.from_dict(config_dict)
    out = Path(args.out)

    print("=" * 70)
    print("BENCHMARK ACCEPTANCE")
    print("=" * 70)
    print(f"Config: {args.config}")
    print(f"Output: {out}")

    dataset_dir = cmd_gen_data(config, out / "dataset", force=True, jobs=args.jobs)
    cmd_train(config, dataset_dir, out / "checkpoints", force=True, jobs=args.jobs)
    result = cmd_eval(config, dataset_dir, out / "checkpoints", out / "eval", force=True, jobs=args.jobs)

    failures = 0
    ours = result.summaries["ours"].mean
    print("\n" + "=" * 70)
    if ours["auroc"] >= args.min_auroc:
        print(f"✓ OOD head mean AUROC {ours['auroc']:.2f} >= {args.min_auroc:.1f}")
    else:
        print(f"✗ OOD head mean AUROC {ours['auroc']:.2f} < {args.min_auroc:.1f}")
        failures += 1

    winning = result.seeds_where_leading("ours", BASELINES)
    best_baseline = max(BASELINES, key=lambda m: result.summaries[m].mean["aupr_e"])
    mean_ok = all(ours["aupr_e"] > result.summaries[m].mean["aupr_e"] for m in BASELINES)
    needed = min(args.min_seeds, len(result.seeds))
    if mean_ok and len(winning) >= needed:
        print(f"✓ OOD head AUPR-E {ours['aupr_e']:.2f} above every baseline "
              f"(best: {best_baseline} {result.summaries[best_baseline].mean['aupr_e']:.2f}), "
              f"{len(winning)}/{len(result.seeds)} seeds")
    else:
        print(f"✗ OOD head AUPR-E {ours['aupr_e']:.2f} vs {best_baseline} "
              f"{result.summaries[best_baseline].mean['aupr_e']:.2f}; ordering held on "
              f"{len(winning)}/{len(result.seeds)} seeds (need {needed})")
        failures += 1

    if not args.skip_ablation:
        rows = dict(cmd_ablate(config, "scaling", dataset_dir, out / "ablation_scaling", force=True, jobs=args.jobs))
        equal = rows["Equal"].summaries["ours"].mean["aupr_e"]
        independent = rows["Independent"].summaries["ours"].mean["aupr_e"]
        if independent >= equal:
            print(f"✓ Independent-axes scaling AUPR-E {independent:.2f} >= equal-axes {equal:.2f}")
        else:
            print(f"⚠️  Independent-axes scaling AUPR-E {independent:.2f} < equal-axes {equal:.2f}")
            failures += 1

    print("=" * 70)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
