"""
Run config validator and parser
"""
import json
from jsonschema import Draft202012Validator
from pathlib import Path
from typing import Dict, Any

from src.models.config import (
    RunConfig, DatasetSection, DetectorSection, HeadSection, EvalSection,
    SceneParams, ScalingConfig, TrainConfig, GlobalAugmentConfig
)
from src.models.detection import GridSpec, DetectionNoiseConfig
from src.models.scene import ClassSpec
from src.utils.errors import ConfigError


SCHEMA_PATH = Path(__file__).resolve().parents[2] / "configs" / "schemas" / "run_config_schema.json"


def load_schema() -> Dict:
    """Load JSON Schema"""
    if not SCHEMA_PATH.exists():
        raise FileNotFoundError(f"Schema not found: {SCHEMA_PATH}")
    with SCHEMA_PATH.open('r', encoding='utf-8') as f:
        return json.load(f)


def _json_path(parts) -> str:
    path = ""
    for part in parts:
        path += f"[{part}]" if isinstance(part, int) else (f".{part}" if path else str(part))
    return path or "<root>"


def check_schema(data: Dict) -> None:
    """Raise ConfigError at the first schema violation, in document order"""
    validator = Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: [str(p) for p in e.absolute_path])
    if errors:
        error = errors[0]
        raise ConfigError(error.message, path=_json_path(error.absolute_path))


def parse_run_config(data: Dict[str, Any]) -> RunConfig:
    """
    Parse config dict into RunConfig; schema check first, then the rules
    that the schema cannot express.
    """
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping", path="<root>")
    check_schema(data)

    dataset = data["dataset"]
    try:
        catalog = tuple(ClassSpec(**spec) for spec in dataset["catalog"])
    except ValueError as e:
        raise ConfigError(str(e), path="dataset.catalog")

    names = [c.name for c in catalog]
    if len(set(names)) != len(names):
        raise ConfigError(f"class names must be unique, got {names}", path="dataset.catalog")
    if sum(1 for c in catalog if not c.is_ood_class) < 2:
        raise ConfigError("catalog needs at least 2 ID classes", path="dataset.catalog")
    if not any(c.is_ood_class for c in catalog):
        raise ConfigError("catalog needs at least 1 OOD class", path="dataset.catalog")

    scene_data = dict(dataset.get("scene", {}))
    if "extent" in scene_data:
        scene_data["extent"] = tuple(scene_data["extent"])
    dataset_section = DatasetSection(
        catalog=catalog,
        train_scenes=dataset.get("train_scenes", 400),
        val_scenes=dataset.get("val_scenes", 200),
        test_scenes=dataset.get("test_scenes", 300),
        ood_rate=dataset.get("ood_rate", 0.02),
        master_seed=dataset.get("master_seed", 0),
        scene=_build(SceneParams, scene_data, "dataset.scene")
    )

    detector = data.get("detector", {})
    detector_section = DetectorSection(
        grid=_build(GridSpec, detector.get("grid", {}), "detector.grid"),
        noise=_build(DetectionNoiseConfig, detector.get("noise", {}), "detector.noise"),
        feature_maps=tuple(detector.get("feature_maps", ["neck"])),
        noise_seed=detector.get("noise_seed", 1000)
    )

    head = data.get("head", {})
    head_section = HeadSection(
        scaling=_build(ScalingConfig, head.get("scaling", {}), "head.scaling"),
        train=_build(TrainConfig, head.get("train", {}), "head.train"),
        embed_dim=head.get("embed_dim", 64),
        dropout_p=head.get("dropout_p", 0.3),
        use_box=head.get("use_box", True),
        use_cls=head.get("use_cls", True),
        seeds=tuple(head.get("seeds", [0, 1, 2, 3, 4])),
        global_augment=_build(GlobalAugmentConfig, head.get("global_augment", {}), "head.global_augment")
    )

    eval_data = data.get("eval", {})
    eval_section = EvalSection(
        methods=tuple(eval_data.get("methods", EvalSection.methods)),
        output_dir=eval_data.get("output_dir", "outputs"),
        match_distance=eval_data.get("match_distance", 0.5),
        freeze_detection_noise=eval_data.get("freeze_detection_noise", False)
    )

    return RunConfig(
        dataset=dataset_section,
        detector=detector_section,
        head=head_section,
        eval=eval_section
    )


def _build(cls, values: Dict[str, Any], path: str):
    """Instantiate a config dataclass, reporting field errors with their path"""
    try:
        return cls(**values)
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e), path=path)
