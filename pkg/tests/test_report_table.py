import pytest

from src.models.report import BenchmarkResult, EvalReport, MethodSummary, ThresholdSummary
from src.utils.report_table import format_ablation, format_table, format_thresholds


def report(method, auroc, fpr95=20.0):
    return EvalReport(method, fpr95=fpr95, auroc=auroc, aupr_s=90.0, aupr_e=40.0, n_id=50, n_ood=5)


@pytest.fixture
def result():
    return BenchmarkResult(
        methods=["msp", "ours"],
        seeds=[0, 1],
        per_seed={
            0: [report("msp", 70.0), report("ours", 90.0)],
            1: [report("msp", 70.0), report("ours", 80.0)],
        },
        config_digest="d1",
        thresholds={0: ThresholdSummary(0.42, 0.95, 0.6, None)},
    )


def test_aggregate_population_std(result):
    summary = result.summaries["ours"]
    assert summary.mean["auroc"] == pytest.approx(85.0)
    assert summary.std["auroc"] == pytest.approx(5.0)
    assert result.summaries["msp"].std["auroc"] == 0.0


def test_aggregate_needs_reports():
    with pytest.raises(ValueError):
        MethodSummary.aggregate("ours", [])


def test_report_range_checked():
    with pytest.raises(ValueError):
        report("msp", 100.5)


def test_table_rows(result):
    table = format_table(result)
    assert "seeds: 0, 1" in table
    lines = table.splitlines()
    assert any(line.startswith("MSP") and " 70.00 ±  0.00" in line for line in lines)
    assert any(line.startswith("Ours (OOD head)") and " 85.00 ±  5.00" in line for line in lines)


def test_thresholds_table(result):
    text = format_thresholds(result)
    assert "0.42000" in text
    assert "95.00%" in text
    assert "n/a" in text


def test_no_thresholds_is_empty(result):
    result.thresholds = {}
    assert format_thresholds(result) == ""


def test_ablation_uses_labels(result):
    text = format_ablation("scaling", [("Equal", result), ("Independent", result)])
    assert text.startswith("Ablation: scaling")
    assert sum(line.startswith(("Equal", "Independent")) for line in text.splitlines()) == 2


def test_dict_round_trip(result):
    again = BenchmarkResult.from_dict(result.to_dict())
    assert again.summaries["ours"].mean == result.summaries["ours"].mean
    assert again.thresholds[0] == result.thresholds[0]
    assert format_table(again) == format_table(result)


def test_seeds_where_leading(result):
    assert result.seeds_where_leading("ours", ["msp"], "auroc") == [0, 1]
    assert result.seeds_where_leading("msp", ["ours"], "auroc") == []
    # equal AUPR-E everywhere: a tie does not lead
    assert result.seeds_where_leading("ours", ["msp"]) == []
