import json

import numpy as np
import pytest

from src.core.bench.harness import (
    MANIFEST_NAME, ablation_variants, checkpoint_path, cmd_ablate, cmd_eval, cmd_gen_data, cmd_report,
    cmd_train, load_dataset_for, prepare_output_dir, train_seed
)
from src.core.bench.pipeline import (
    build_detector, evaluate_predictions, matched_id_scores, method_scores, predict_split
)
from src.core.head.threshold import acceptance_rate
from src.core.record.checkpoint_io import load_checkpoint
from src.core.record.dataset_io import read_dataset
from src.utils.errors import ConfigError

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    return tmp_path_factory.mktemp("bench")


@pytest.fixture(scope="module")
def module_config(bench_config):
    return bench_config


@pytest.fixture(scope="module")
def dataset_dir(workspace, module_config):
    return cmd_gen_data(module_config, workspace / "dataset", verbose=False)


@pytest.fixture(scope="module")
def checkpoint_dir(workspace, module_config, dataset_dir):
    cmd_train(module_config, dataset_dir, workspace / "checkpoints", verbose=False)
    return workspace / "checkpoints"


@pytest.fixture(scope="module")
def eval_result(workspace, module_config, dataset_dir, checkpoint_dir):
    return cmd_eval(module_config, dataset_dir, checkpoint_dir, workspace / "eval", verbose=False)


def test_gen_data_is_reproducible(tmp_path, module_config, dataset_dir):
    again = cmd_gen_data(module_config, tmp_path / "again", verbose=False, jobs=2)
    for path in sorted(dataset_dir.iterdir()):
        assert (again / path.name).read_bytes() == path.read_bytes()
    manifest = json.loads((dataset_dir / MANIFEST_NAME).read_text(encoding="utf-8"))
    assert manifest["splits"]["train"]["ood_objects"] == 0
    assert manifest["splits"]["test"]["scenes"] == 24


def test_refuses_non_empty_output(tmp_path):
    (tmp_path / "keep.txt").write_text("x", encoding="utf-8")
    with pytest.raises(FileExistsError):
        prepare_output_dir(tmp_path, force=False)
    assert prepare_output_dir(tmp_path, force=True) == tmp_path


def test_dataset_from_other_config_rejected(module_config, dataset_dir):
    other = module_config.with_detector(noise_seed=12)
    assert load_dataset_for(other, dataset_dir).test
    changed = type(module_config).from_dict({**module_config.to_dict(), "dataset": {
        **module_config.to_dict()["dataset"], "master_seed": 8
    }})
    with pytest.raises(ConfigError):
        load_dataset_for(changed, dataset_dir)


def test_train_writes_checkpoint_per_seed(checkpoint_dir, module_config):
    for seed in module_config.head.seeds:
        record = json.loads(checkpoint_path(checkpoint_dir, seed).read_text(encoding="utf-8"))
        assert record["seeds"] == [seed]
        assert 0.0 <= record["threshold"] <= 1.0
        assert len(record["epoch_losses"]) == module_config.head.train.epochs
    log = json.loads((checkpoint_dir / "train_log.json").read_text(encoding="utf-8"))
    assert sorted(log["seeds"]) == ["0", "1"]


def test_logged_threshold_reapplies_on_val(module_config, dataset_dir, checkpoint_dir):
    log = json.loads((checkpoint_dir / "train_log.json").read_text(encoding="utf-8"))
    split = read_dataset(dataset_dir)
    detector = build_detector(module_config)
    for seed in module_config.head.seeds:
        entry = log["seeds"][str(seed)]
        params, meta = load_checkpoint(checkpoint_path(checkpoint_dir, seed))
        assert meta["threshold"] == entry["threshold"]
        val = predict_split(split.val, detector, module_config, "val", seed)
        id_scores = matched_id_scores(val, params, module_config.eval.match_distance)
        assert id_scores.size == entry["val_id_count"] >= 20
        tpr = acceptance_rate(id_scores, entry["threshold"])
        assert tpr == entry["val_tpr"]
        assert tpr >= 0.95
        if np.sum(id_scores == entry["threshold"]) == 1:
            assert tpr < 0.95 + 1.0 / id_scores.size


def test_checkpoint_reload_reproduces_eval_scores(module_config, dataset_dir, checkpoint_dir, eval_result):
    split = read_dataset(dataset_dir)
    trained, _ = train_seed(module_config, split, 0, verbose=False)
    loaded, _ = load_checkpoint(checkpoint_path(checkpoint_dir, 0))
    predictions = predict_split(split.test, build_detector(module_config), module_config, "test", 0)
    for prediction in predictions:
        assert np.array_equal(
            method_scores("ours", prediction, loaded), method_scores("ours", prediction, trained)
        )
    reports, _ = evaluate_predictions(predictions, ["ours"], loaded, module_config.eval.match_distance)
    assert reports[0] == eval_result.report(0, "ours")


def test_eval_rows_and_oracle(eval_result, module_config):
    assert eval_result.methods == list(module_config.eval.methods)
    for seed in module_config.head.seeds:
        assert len(eval_result.per_seed[seed]) == len(module_config.eval.methods)
    oracle = eval_result.summaries["oracle"]
    assert oracle.mean == {"fpr95": 0.0, "auroc": 100.0, "aupr_s": 100.0, "aupr_e": 100.0}
    assert all(v == 0.0 for v in oracle.std.values())
    for seed in module_config.head.seeds:
        reports = eval_result.per_seed[seed]
        assert len({(r.n_id, r.n_ood, r.n_unmatched_predictions) for r in reports}) == 1
    assert set(eval_result.thresholds) == {0, 1}


def test_eval_files(eval_result, workspace):
    out = workspace / "eval"
    data = json.loads((out / "results.json").read_text(encoding="utf-8"))
    assert data["config_digest"] == eval_result.config_digest
    assert (out / "per_seed" / "seed_0.json").exists()
    table = (out / "table.txt").read_text(encoding="utf-8")
    assert "Oracle" in table and "MaxLogit" in table
    assert cmd_report(out, verbose=False) == table


def test_eval_is_deterministic(tmp_path, workspace, eval_result, module_config, dataset_dir, checkpoint_dir):
    again = cmd_eval(module_config, dataset_dir, checkpoint_dir, tmp_path / "eval", verbose=False)
    assert again.to_dict() == eval_result.to_dict()
    for name in ("results.json", "table.txt"):
        assert (tmp_path / "eval" / name).read_bytes() == (workspace / "eval" / name).read_bytes()


def test_frozen_noise_gives_seed_independent_baselines(tmp_path, module_config, dataset_dir):
    from dataclasses import replace

    config = replace(module_config, eval=replace(
        module_config.eval, freeze_detection_noise=True, methods=("default", "msp", "energy")
    ))
    result = cmd_eval(config, dataset_dir, None, tmp_path / "frozen", verbose=False)
    for method in result.methods:
        assert all(v == 0.0 for v in result.summaries[method].std.values())


def test_eval_needs_checkpoints(tmp_path, module_config, dataset_dir):
    with pytest.raises(FileNotFoundError):
        cmd_eval(module_config, dataset_dir, tmp_path / "nothing", tmp_path / "out", verbose=False)


def test_head_scores_in_unit_interval(module_config, dataset_dir, checkpoint_dir):
    params, _ = load_checkpoint(checkpoint_path(checkpoint_dir, 0))
    split = read_dataset(dataset_dir)
    detector = build_detector(module_config)
    for prediction in predict_split(split.test[:5], detector, module_config, "test", 0):
        scores = method_scores("ours", prediction, params)
        assert scores.shape == (len(prediction.detections),)
        assert ((scores >= 0) & (scores <= 1)).all()


def test_ablation_variants(module_config):
    assert [label for label, _ in ablation_variants(module_config, "feature_map")] == [
        "raw", "spatial", "backbone", "neck"
    ]
    fusion = ablation_variants(module_config, "fusion")
    assert [(c.head.use_box, c.head.use_cls) for _, c in fusion] == [
        (False, False), (True, False), (False, True), (True, True)
    ]
    scaling = ablation_variants(module_config, "scaling")
    assert [c.head.scaling.independent_axes for _, c in scaling] == [False, True]
    with pytest.raises(ValueError):
        ablation_variants(module_config, "depth")


def test_scaling_ablation(tmp_path, module_config, dataset_dir):
    config = module_config.with_seeds([0])
    results = cmd_ablate(config, "scaling", dataset_dir, tmp_path / "ablate", verbose=False)
    assert [label for label, _ in results] == ["Equal", "Independent"]
    for _, result in results:
        assert result.methods == ["ours"]
    text = cmd_report(tmp_path / "ablate" / "ablation_scaling.json", verbose=False)
    assert "Equal" in text and "Independent" in text
