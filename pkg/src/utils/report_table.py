"""
Plain-text result tables
"""
from typing import List, Sequence, Tuple

from src.models.report import METRIC_NAMES, BenchmarkResult

COLUMN_TITLES = {
    "fpr95": "FPR-95 ↓",
    "auroc": "AUROC ↑",
    "aupr_s": "AUPR-S ↑",
    "aupr_e": "AUPR-E ↑",
}

METHOD_TITLES = {
    "default": "Default score",
    "msp": "MSP",
    "odin": "ODIN",
    "max_logit": "MaxLogit",
    "energy": "Energy",
    "ours": "Ours (OOD head)",
    "oracle": "Oracle",
}


def _cell(mean: float, std: float) -> str:
    return f"{mean:6.2f} ± {std:5.2f}"


def render_rows(header: str, rows: Sequence[Tuple[str, BenchmarkResult, str]]) -> str:
    """
    Table with one row per (label, result, method).

    Columns follow FPR-95, AUROC, AUPR-S, AUPR-E as mean ± std over seeds.
    """
    label_width = max([len(header)] + [len(label) for label, _, _ in rows])
    cell_width = len(_cell(0.0, 0.0))
    titles = [COLUMN_TITLES[name].rjust(cell_width) for name in METRIC_NAMES]
    head = f"{header.ljust(label_width)} | " + " | ".join(titles)
    lines = [head, "-" * len(head)]
    for label, result, method in rows:
        summary = result.summaries[method]
        cells = [_cell(summary.mean[name], summary.std[name]) for name in METRIC_NAMES]
        lines.append(f"{label.ljust(label_width)} | " + " | ".join(cells))
    return "\n".join(lines) + "\n"


def format_table(result: BenchmarkResult) -> str:
    """Method comparison over seeds"""
    rows = [(METHOD_TITLES.get(m, m), result, m) for m in result.methods]
    seeds = ", ".join(str(s) for s in result.seeds)
    return f"OOD detection on matched predictions (seeds: {seeds})\n\n" + render_rows("Method", rows)


def format_ablation(axis: str, results: List[Tuple[str, BenchmarkResult]], method: str = "ours") -> str:
    """One row per ablation setting, reporting the OOD head"""
    rows = [(label, result, method) for label, result in results]
    return f"Ablation: {axis}\n\n" + render_rows(axis, rows)


def format_thresholds(result: BenchmarkResult) -> str:
    """Decision-rule outcome per seed at the calibrated delta"""
    if not result.thresholds:
        return ""
    lines = ["Decision rule at calibrated delta (test split)", ""]
    lines.append("seed |    delta | ID accepted | OOD recall | unmatched flagged")
    for seed in sorted(result.thresholds):
        t = result.thresholds[seed]
        lines.append(
            f"{seed:4d} | {t.delta:8.5f} | {_rate(t.id_acceptance, 11)} | "
            f"{_rate(t.ood_recall, 10)} | {_rate(t.unmatched_flagged, 17)}"
        )
    return "\n".join(lines) + "\n"


def _rate(value, width: int) -> str:
    if value is None:
        return "n/a".rjust(width)
    return f"{100 * value:.2f}%".rjust(width)
