"""
Evaluation result records
"""
from dataclasses import dataclass, field, asdict
from typing import Dict, List, Optional, Any

import numpy as np

METRIC_NAMES = ("fpr95", "auroc", "aupr_s", "aupr_e")


@dataclass(frozen=True)
class MatchedSample:
    """A prediction matched to a ground truth, with its OOD-ness under one method"""
    ood_ness: float
    truth_is_ood: bool
    scene_id: str = ""
    detection_index: int = -1
    annotation_index: int = -1


@dataclass
class EvalReport:
    """Threshold-free OOD metrics of one method, in percent"""
    method: str
    fpr95: float
    auroc: float
    aupr_s: float
    aupr_e: float
    n_id: int
    n_ood: int
    n_unmatched_predictions: int = 0

    def __post_init__(self):
        for name in METRIC_NAMES:
            value = getattr(self, name)
            if not 0.0 <= value <= 100.0:
                raise ValueError(f"{name} must be a percentage in [0, 100], got {value}")
        if self.n_id < 0 or self.n_ood < 0 or self.n_unmatched_predictions < 0:
            raise ValueError("counts must be non-negative")

    def metrics(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_NAMES}

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'EvalReport':
        return cls(**data)


@dataclass
class ThresholdSummary:
    """Decision-rule outcome on the test split at a calibrated delta"""
    delta: float
    id_acceptance: Optional[float]  # share of matched ID predictions classified ID
    ood_recall: Optional[float]  # share of matched OOD predictions classified OOD
    unmatched_flagged: Optional[float]  # share of unmatched predictions classified OOD; None when a group is empty

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class MethodSummary:
    """Mean and population std of each metric over seeds"""
    method: str
    mean: Dict[str, float]
    std: Dict[str, float]

    @classmethod
    def aggregate(cls, method: str, reports: List[EvalReport]) -> 'MethodSummary':
        if not reports:
            raise ValueError(f"no reports to aggregate for {method}")
        mean, std = {}, {}
        for name in METRIC_NAMES:
            values = np.array([getattr(r, name) for r in reports], dtype=np.float64)
            mean[name] = float(values.mean())
            std[name] = float(values.std(ddof=0))
        return cls(method=method, mean=mean, std=std)


@dataclass
class BenchmarkResult:
    """Per-method aggregates plus the per-seed reports they came from"""
    methods: List[str]
    seeds: List[int]
    per_seed: Dict[int, List[EvalReport]]
    config_digest: str
    summaries: Dict[str, MethodSummary] = field(default_factory=dict)
    thresholds: Dict[int, ThresholdSummary] = field(default_factory=dict)
    label: Optional[str] = None

    def __post_init__(self):
        if not self.summaries:
            self.summaries = {
                method: MethodSummary.aggregate(method, [self.report(seed, method) for seed in self.seeds])
                for method in self.methods
            }

    def report(self, seed: int, method: str) -> EvalReport:
        for r in self.per_seed[seed]:
            if r.method == method:
                return r
        raise KeyError(f"no report for method '{method}' at seed {seed}")

    def seeds_where_leading(self, method: str, rivals: List[str], metric: str = "aupr_e") -> List[int]:
        """Seeds on which method scores strictly higher on metric than every rival"""
        leading = []
        for seed in self.seeds:
            value = getattr(self.report(seed, method), metric)
            if all(value > getattr(self.report(seed, rival), metric) for rival in rivals):
                leading.append(seed)
        return leading

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "config_digest": self.config_digest,
            "methods": list(self.methods),
            "seeds": list(self.seeds),
            "summary": {
                m: {"mean": self.summaries[m].mean, "std": self.summaries[m].std} for m in self.methods
            },
            "per_seed": {str(seed): [r.to_dict() for r in self.per_seed[seed]] for seed in self.seeds},
            "thresholds": {str(seed): t.to_dict() for seed, t in self.thresholds.items()},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'BenchmarkResult':
        seeds = [int(s) for s in data["seeds"]]
        per_seed = {
            int(seed): [EvalReport.from_dict(r) for r in reports]
            for seed, reports in data["per_seed"].items()
        }
        thresholds = {int(seed): ThresholdSummary(**t) for seed, t in data.get("thresholds", {}).items()}
        return cls(
            methods=list(data["methods"]),
            seeds=seeds,
            per_seed=per_seed,
            config_digest=data["config_digest"],
            thresholds=thresholds,
            label=data.get("label")
        )
