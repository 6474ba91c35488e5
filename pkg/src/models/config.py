"""
Run configuration data models
"""
from dataclasses import dataclass, field, asdict, replace
from typing import List, Tuple, Dict, Any
import hashlib
import json

from src.models.scene import ClassSpec
from src.models.detection import GridSpec, DetectionNoiseConfig

FEATURE_MAP_IDS = ("raw", "spatial", "backbone", "neck")
METHODS = ("ours", "msp", "odin", "max_logit", "energy", "default", "oracle")


@dataclass(frozen=True)
class ScalingConfig:
    """Outlier synthesis by per-axis random scaling"""
    small_range: Tuple[float, float] = (0.1, 0.5)
    large_range: Tuple[float, float] = (1.5, 3.0)
    p_small: float = 0.8
    min_points: int = 5
    select_fraction: float = 0.5
    independent_axes: bool = True

    def __post_init__(self):
        object.__setattr__(self, "small_range", tuple(float(v) for v in self.small_range))
        object.__setattr__(self, "large_range", tuple(float(v) for v in self.large_range))
        s_lo, s_hi = self.small_range
        l_lo, l_hi = self.large_range
        if not (0 < s_lo <= s_hi < 1 < l_lo <= l_hi):
            raise ValueError(
                f"scaling ranges must satisfy 0 < small_lo <= small_hi < 1 < large_lo <= large_hi, "
                f"got {self.small_range} / {self.large_range}"
            )
        if not 0.0 <= self.p_small <= 1.0:
            raise ValueError(f"p_small must be in [0, 1], got {self.p_small}")
        if self.min_points < 0:
            raise ValueError(f"min_points must be >= 0, got {self.min_points}")
        if not 0.0 <= self.select_fraction <= 1.0:
            raise ValueError(f"select_fraction must be in [0, 1], got {self.select_fraction}")


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer and schedule of the OOD head"""
    epochs: int = 5
    batch_size: int = 16
    lr0: float = 1e-3
    lr_min: float = 1e-5
    momentum: float = 0.9
    weight_decay: float = 1e-4
    poly_power: float = 3.0

    def __post_init__(self):
        for name in ("epochs", "batch_size", "lr0", "lr_min", "momentum", "weight_decay", "poly_power"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.lr_min >= self.lr0:
            raise ValueError(f"lr_min ({self.lr_min}) must be below lr0 ({self.lr0})")


@dataclass(frozen=True)
class GlobalAugmentConfig:
    """Whole-scene augmentation applied before outlier synthesis"""
    flip: bool = False
    max_rotation: float = 0.0  # radians; rotation drawn from [-max, max]

    def __post_init__(self):
        if self.max_rotation < 0:
            raise ValueError(f"max_rotation must be >= 0, got {self.max_rotation}")


@dataclass(frozen=True)
class SceneParams:
    """Placement parameters of one synthetic scene"""
    extent: Tuple[float, float, float, float] = (-30.0, 30.0, -30.0, 30.0)  # x_min, x_max, y_min, y_max
    min_objects: int = 3
    max_objects: int = 8
    clutter_density: float = 0.05  # points per square meter
    min_spacing: float = 0.5  # BEV center distance
    max_retries: int = 50

    def __post_init__(self):
        object.__setattr__(self, "extent", tuple(float(v) for v in self.extent))
        x_min, x_max, y_min, y_max = self.extent
        if x_max <= x_min or y_max <= y_min:
            raise ValueError(f"scene extent is empty: {self.extent}")
        if self.min_objects < 0 or self.max_objects < self.min_objects:
            raise ValueError(f"object count range invalid: [{self.min_objects}, {self.max_objects}]")
        if self.clutter_density < 0:
            raise ValueError(f"clutter_density must be >= 0, got {self.clutter_density}")


@dataclass(frozen=True)
class DatasetSection:
    catalog: Tuple[ClassSpec, ...]
    train_scenes: int = 400
    val_scenes: int = 200
    test_scenes: int = 300
    ood_rate: float = 0.02
    master_seed: int = 0
    scene: SceneParams = field(default_factory=SceneParams)


@dataclass(frozen=True)
class DetectorSection:
    grid: GridSpec = field(default_factory=GridSpec)
    noise: DetectionNoiseConfig = field(default_factory=DetectionNoiseConfig)
    feature_maps: Tuple[str, ...] = ("neck",)
    noise_seed: int = 1000


@dataclass(frozen=True)
class HeadSection:
    scaling: ScalingConfig = field(default_factory=ScalingConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    embed_dim: int = 64
    dropout_p: float = 0.3
    use_box: bool = True
    use_cls: bool = True
    seeds: Tuple[int, ...] = (0, 1, 2, 3, 4)
    global_augment: GlobalAugmentConfig = field(default_factory=GlobalAugmentConfig)


@dataclass(frozen=True)
class EvalSection:
    methods: Tuple[str, ...] = ("default", "msp", "odin", "max_logit", "energy", "ours")
    output_dir: str = "outputs"
    match_distance: float = 0.5
    freeze_detection_noise: bool = False


@dataclass(frozen=True)
class RunConfig:
    """Complete benchmark configuration"""
    dataset: DatasetSection
    detector: DetectorSection = field(default_factory=DetectorSection)
    head: HeadSection = field(default_factory=HeadSection)
    eval: EvalSection = field(default_factory=EvalSection)

    @classmethod
    def from_yaml(cls, yaml_path: str) -> 'RunConfig':
        """Load, validate and parse a YAML run config"""
        import yaml
        from src.utils.config_validator import parse_run_config

        with open(yaml_path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
        return parse_run_config(data)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        from src.utils.config_validator import parse_run_config

        return parse_run_config(data)

    def to_dict(self) -> Dict[str, Any]:
        """Plain nested dict in the YAML layout"""
        return _plain(asdict(self))

    def digest(self, section: str = None) -> str:
        """SHA-256 over canonical JSON of the whole config or one section"""
        data = self.to_dict()
        if section is not None:
            data = data[section]
        canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def with_head(self, **changes) -> 'RunConfig':
        return replace(self, head=replace(self.head, **changes))

    def with_detector(self, **changes) -> 'RunConfig':
        return replace(self, detector=replace(self.detector, **changes))

    def with_seeds(self, seeds: List[int]) -> 'RunConfig':
        return self.with_head(seeds=tuple(seeds))


def _plain(value):
    """Tuples to lists, recursively, so the dict matches the YAML form"""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value
