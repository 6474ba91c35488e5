"""
Benchmark commands: gen-data, train, eval, ablate, report
"""
from dataclasses import replace
import json
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from src.core.bench.pipeline import (
    build_detector, calibrate_on_split, evaluate_predictions, predict_split, threshold_summary
)
from src.core.head.trainer import train
from src.core.record.checkpoint_io import load_checkpoint, save_checkpoint
from src.core.record.dataset_io import read_dataset, write_dataset
from src.core.synth.scene_generator import build_splits
from src.models.config import RunConfig
from src.models.head import OodHeadParams
from src.models.report import BenchmarkResult, EvalReport, ThresholdSummary
from src.models.scene import DatasetSplit
from src.utils.errors import ConfigError
from src.utils.report_table import format_ablation, format_table, format_thresholds

MANIFEST_NAME = "manifest.json"
RESULTS_NAME = "results.json"
TABLE_NAME = "table.txt"
TRAIN_LOG_NAME = "train_log.json"
ABLATION_AXES = ("feature_map", "fusion", "scaling")


def _say(verbose: bool, message: str = "") -> None:
    if verbose:
        print(message)


def _write_json(path: Path, data) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(data, f, indent=2, allow_nan=False)
        f.write("\n")
    return path


def _write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)
    return path


def prepare_output_dir(out_dir: Path, force: bool) -> Path:
    """Create out_dir; refuse a non-empty one unless force"""
    out_dir = Path(out_dir)
    if out_dir.exists() and any(out_dir.iterdir()) and not force:
        raise FileExistsError(f"Output directory is not empty: {out_dir} (use --force to overwrite)")
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def checkpoint_path(checkpoint_dir: Path, seed: int) -> Path:
    return Path(checkpoint_dir) / f"head_seed{seed}.json"


def load_dataset_for(config: RunConfig, dataset_dir: Path) -> DatasetSplit:
    """Read a dataset and check that it was generated from this config's dataset section"""
    dataset_dir = Path(dataset_dir)
    manifest_path = dataset_dir / MANIFEST_NAME
    if not manifest_path.exists():
        raise FileNotFoundError(f"Dataset manifest not found: {manifest_path}")
    with open(manifest_path, 'r', encoding='utf-8') as f:
        manifest = json.load(f)
    expected = config.digest("dataset")
    if manifest.get("config_digest") != expected:
        raise ConfigError(
            f"dataset in {dataset_dir} was generated from a different dataset config "
            f"(digest {manifest.get('config_digest')}, expected {expected})",
            path="dataset"
        )
    return read_dataset(dataset_dir)


# ----------------------------------------------------------------------
# gen-data
# ----------------------------------------------------------------------

def cmd_gen_data(
    config: RunConfig,
    out_dir: Path,
    force: bool = False,
    jobs: int = 1,
    verbose: bool = True
) -> Path:
    """Generate train/val/test scenes and write them with a manifest"""
    out_dir = prepare_output_dir(out_dir, force)
    ds = config.dataset
    _say(verbose, "\n[1/2] Generating dataset...")
    split = build_splits(
        ds.catalog,
        (ds.train_scenes, ds.val_scenes, ds.test_scenes),
        ds.master_seed,
        ood_rate=ds.ood_rate,
        params=ds.scene,
        jobs=jobs
    )
    digest = config.digest("dataset")
    for name, scenes in split.items():
        n_objects = sum(len(s.annotations) for s in scenes)
        n_ood = sum(s.num_ood for s in scenes)
        _say(verbose, f"  ✓ {name}: {len(scenes)} scenes, {n_objects} objects ({n_ood} OOD)")

    _say(verbose, "\n[2/2] Writing dataset files...")
    write_dataset(split, out_dir, seed=ds.master_seed, config_digest=digest)
    manifest = {
        "format_version": 1,
        "master_seed": ds.master_seed,
        "config_digest": digest,
        "splits": {
            name: {
                "scenes": len(scenes),
                "objects": sum(len(s.annotations) for s in scenes),
                "ood_objects": sum(s.num_ood for s in scenes),
            }
            for name, scenes in split.items()
        },
    }
    _write_json(out_dir / MANIFEST_NAME, manifest)
    _say(verbose, f"  ✓ Dataset saved to: {out_dir}")
    return out_dir


# ----------------------------------------------------------------------
# train
# ----------------------------------------------------------------------

def train_seed(
    config: RunConfig,
    split: DatasetSplit,
    seed: int,
    jobs: int = 1,
    verbose: bool = True
) -> Tuple[OodHeadParams, Dict]:
    """
    Train one head and calibrate its threshold on the val split.

    Returns:
        (params, log entry with epoch_losses, threshold, val_tpr, val_id_count)
    """
    detector = build_detector(config)
    result = train(split.train, detector, config.head, seed, jobs=jobs, verbose=verbose)
    val_predictions = predict_split(split.val, detector, config, "val", seed, jobs)
    delta, tpr, n_id = calibrate_on_split(val_predictions, result.params, config.eval.match_distance)
    entry = {
        "epoch_losses": result.epoch_losses,
        "epoch_ood_counts": result.epoch_ood_counts,
        "num_inputs": result.num_inputs,
        "threshold": delta,
        "val_tpr": tpr,
        "val_id_count": n_id,
    }
    return result.params, entry


def cmd_train(
    config: RunConfig,
    dataset_dir: Path,
    out_dir: Path,
    force: bool = False,
    jobs: int = 1,
    verbose: bool = True
) -> Dict[int, Path]:
    """One checkpoint per seed plus a training log"""
    _say(verbose, "\n[1/2] Loading dataset...")
    split = load_dataset_for(config, dataset_dir)
    _say(verbose, f"  ✓ {len(split.train)} train / {len(split.val)} val scenes")
    out_dir = prepare_output_dir(out_dir, force)

    seeds = list(config.head.seeds)
    _say(verbose, f"\n[2/2] Training OOD head ({len(seeds)} seeds)...")
    log = {"config_digest": config.digest(), "seeds": {}}
    written = {}
    for seed in seeds:
        params, entry = train_seed(config, split, seed, jobs, verbose)
        written[seed] = save_checkpoint(
            checkpoint_path(out_dir, seed), params,
            train_config=config.head.train,
            seeds=[seed],
            threshold=entry["threshold"],
            epoch_losses=entry["epoch_losses"],
            config_digest=config.digest()
        )
        log["seeds"][str(seed)] = entry
        losses = ", ".join(f"{v:.4f}" for v in entry["epoch_losses"])
        _say(verbose, f"  ✓ seed {seed}: loss [{losses}] | delta {entry['threshold']:.5f} "
                      f"(val TPR {100 * entry['val_tpr']:.2f}% over {entry['val_id_count']} ID)")
    _write_json(out_dir / TRAIN_LOG_NAME, log)
    _say(verbose, f"  ✓ Checkpoints saved to: {out_dir}")
    return written


# ----------------------------------------------------------------------
# eval
# ----------------------------------------------------------------------

def load_heads(config: RunConfig, checkpoint_dir: Path) -> Dict[int, Tuple[OodHeadParams, Optional[float]]]:
    """Params and stored threshold of every configured seed"""
    detector = build_detector(config)
    heads = {}
    for seed in config.head.seeds:
        path = checkpoint_path(checkpoint_dir, seed)
        if not path.exists():
            raise FileNotFoundError(f"Missing checkpoint for seed {seed}: {path}")
        params, meta = load_checkpoint(path)
        if params.C != detector.feature_map_channels() or params.K != detector.num_classes:
            raise ConfigError(
                f"checkpoint for seed {seed} has C={params.C}, K={params.K}; detector config gives "
                f"C={detector.feature_map_channels()}, K={detector.num_classes}",
                path="detector.feature_maps"
            )
        heads[seed] = (params, meta.get("threshold"))
    return heads


def run_benchmark(
    config: RunConfig,
    split: DatasetSplit,
    heads: Dict[int, Tuple[OodHeadParams, Optional[float]]],
    jobs: int = 1,
    verbose: bool = True,
    label: Optional[str] = None
) -> BenchmarkResult:
    """Evaluate every configured method on the test split for every seed"""
    detector = build_detector(config)
    methods = list(config.eval.methods)
    per_seed: Dict[int, List[EvalReport]] = {}
    thresholds: Dict[int, ThresholdSummary] = {}
    for seed in config.head.seeds:
        params, delta = heads.get(seed, (None, None))
        predictions = predict_split(split.test, detector, config, "test", seed, jobs)
        reports, scores = evaluate_predictions(predictions, methods, params, config.eval.match_distance)
        per_seed[seed] = reports
        if "ours" in scores and delta is not None:
            thresholds[seed] = threshold_summary(predictions, scores["ours"], delta, config.eval.match_distance)
        matched = reports[0].n_id + reports[0].n_ood
        _say(verbose, f"  ✓ seed {seed}: {matched} matched predictions "
                      f"({reports[0].n_ood} OOD), {reports[0].n_unmatched_predictions} unmatched")
    return BenchmarkResult(
        methods=methods,
        seeds=list(config.head.seeds),
        per_seed=per_seed,
        config_digest=config.digest(),
        thresholds=thresholds,
        label=label
    )


def write_results(result: BenchmarkResult, out_dir: Path) -> Dict[str, Path]:
    """results.json, table.txt and per_seed/seed_<n>.json"""
    out_dir = Path(out_dir)
    paths = {
        "results": _write_json(out_dir / RESULTS_NAME, result.to_dict()),
        "table": _write_text(out_dir / TABLE_NAME, render_report(result)),
    }
    for seed in result.seeds:
        paths[f"seed_{seed}"] = _write_json(
            out_dir / "per_seed" / f"seed_{seed}.json",
            [r.to_dict() for r in result.per_seed[seed]]
        )
    return paths


def render_report(result: BenchmarkResult) -> str:
    text = format_table(result)
    thresholds = format_thresholds(result)
    if thresholds:
        text += "\n" + thresholds
    return text


def cmd_eval(
    config: RunConfig,
    dataset_dir: Path,
    checkpoint_dir: Optional[Path],
    out_dir: Path,
    force: bool = False,
    jobs: int = 1,
    verbose: bool = True
) -> BenchmarkResult:
    """Benchmark all configured methods and write the result files"""
    _say(verbose, "\n[1/3] Loading dataset...")
    split = load_dataset_for(config, dataset_dir)
    _say(verbose, f"  ✓ {len(split.test)} test scenes")

    heads = {}
    if "ours" in config.eval.methods:
        _say(verbose, "\n[2/3] Loading checkpoints...")
        if checkpoint_dir is None:
            raise FileNotFoundError("method 'ours' needs --checkpoints")
        heads = load_heads(config, checkpoint_dir)
        _say(verbose, f"  ✓ {len(heads)} heads loaded")
    else:
        _say(verbose, "\n[2/3] No trained head requested")

    out_dir = prepare_output_dir(out_dir, force)
    _say(verbose, f"\n[3/3] Evaluating {len(config.eval.methods)} methods...")
    result = run_benchmark(config, split, heads, jobs, verbose)
    write_results(result, out_dir)
    _say(verbose)
    _say(verbose, render_report(result))
    _say(verbose, f"✓ Results saved to: {out_dir}")
    return result


# ----------------------------------------------------------------------
# ablate
# ----------------------------------------------------------------------

def ablation_variants(config: RunConfig, axis: str) -> List[Tuple[str, RunConfig]]:
    """Labeled configs for one ablation axis"""
    if axis == "feature_map":
        return [(map_id, config.with_detector(feature_maps=(map_id,))) for map_id in
                ("raw", "spatial", "backbone", "neck")]
    if axis == "fusion":
        return [
            ("F_feat", config.with_head(use_box=False, use_cls=False)),
            ("F_feat + F_box", config.with_head(use_box=True, use_cls=False)),
            ("F_feat + F_cls", config.with_head(use_box=False, use_cls=True)),
            ("F_feat + F_box + F_cls", config.with_head(use_box=True, use_cls=True)),
        ]
    if axis == "scaling":
        return [
            ("Equal", config.with_head(scaling=replace(config.head.scaling, independent_axes=False))),
            ("Independent", config.with_head(scaling=replace(config.head.scaling, independent_axes=True))),
        ]
    raise ValueError(f"unknown ablation axis '{axis}', expected one of {ABLATION_AXES}")


def cmd_ablate(
    config: RunConfig,
    axis: str,
    dataset_dir: Path,
    out_dir: Path,
    force: bool = False,
    jobs: int = 1,
    verbose: bool = True
) -> List[Tuple[str, BenchmarkResult]]:
    """Train and evaluate the OOD head once per axis value"""
    variants = ablation_variants(config, axis)
    _say(verbose, "\n[1/2] Loading dataset...")
    split = load_dataset_for(config, dataset_dir)
    out_dir = prepare_output_dir(out_dir, force)

    _say(verbose, f"\n[2/2] Ablating {axis} ({len(variants)} settings)...")
    results = []
    for label, variant in variants:
        variant = replace(variant, eval=replace(variant.eval, methods=("ours",)))
        _say(verbose, f"\n  {label}")
        heads = {}
        for seed in variant.head.seeds:
            params, entry = train_seed(variant, split, seed, jobs, verbose)
            heads[seed] = (params, entry["threshold"])
        results.append((label, run_benchmark(variant, split, heads, jobs, verbose, label=label)))

    table = format_ablation(axis, results)
    _write_text(out_dir / f"ablation_{axis}.txt", table)
    _write_json(out_dir / f"ablation_{axis}.json", {
        "axis": axis,
        "rows": [result.to_dict() for _, result in results],
    })
    _say(verbose)
    _say(verbose, table)
    _say(verbose, f"✓ Ablation saved to: {out_dir}")
    return results


# ----------------------------------------------------------------------
# report
# ----------------------------------------------------------------------

def cmd_report(results_path: Path, verbose: bool = True) -> str:
    """Re-render tables from a results.json or ablation_<axis>.json file"""
    results_path = Path(results_path)
    if results_path.is_dir():
        results_path = results_path / RESULTS_NAME
    if not results_path.exists():
        raise FileNotFoundError(f"Results file not found: {results_path}")
    with open(results_path, 'r', encoding='utf-8') as f:
        data = json.load(f)

    if "axis" in data:
        rows = [BenchmarkResult.from_dict(r) for r in data["rows"]]
        text = format_ablation(data["axis"], [(r.label or str(i), r) for i, r in enumerate(rows)])
    else:
        text = render_report(BenchmarkResult.from_dict(data))
    _say(verbose, text)
    return text
