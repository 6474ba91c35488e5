import math

import numpy as np
import pytest

from src.core.features.feature_extractor import InputBatch
from src.core.head.gradcheck import max_relative_error
from src.core.head.mlp import EVAL, TRAIN, backward, bce_loss, forward, init_params, score, sigmoid
from src.models.head import PARAM_NAMES, OodHeadParams
from src.utils.seeding import derive_rng


def random_batch(rng, n, C, K, labels=True):
    onehot = np.zeros((n, K))
    onehot[np.arange(n), rng.integers(0, K, size=n)] = 1.0
    return InputBatch(
        f_feat=rng.normal(size=(n, C)),
        box_vec=rng.normal(size=(n, 7)),
        logits=rng.normal(size=(n, K)),
        onehot=onehot,
        labels=rng.integers(0, 2, size=n) if labels else -np.ones(n, dtype=np.int64)
    )


def widened(params, rng):
    """Random biases so ReLU units are a mix of active and inactive"""
    arrays = {name: arr + (rng.normal(0, 0.3, arr.shape) if name.startswith("b") else 0.0)
              for name, arr in params.arrays.items()}
    return params.with_arrays(arrays)


class TestInit:
    def test_deterministic(self):
        a, b = init_params(14, 4, seed=3), init_params(14, 4, seed=3)
        for name in PARAM_NAMES:
            assert np.array_equal(a[name], b[name])

    def test_biases_zero_and_weight_bounds(self):
        params = init_params(14, 4, seed=0)
        for name in PARAM_NAMES:
            arr = params[name]
            if name.startswith("b"):
                assert not arr.any()
            else:
                assert np.abs(arr).max() <= 1.0 / math.sqrt(arr.shape[0])

    def test_shapes(self):
        params = init_params(14, 4, seed=0, E=64)
        assert params.D == 142
        assert params["w_box"].shape == (7, 64)
        assert params["w_cls"].shape == (8, 64)
        assert params["w1"].shape == (142, 71)
        assert params["w2"].shape == (71, 35)
        assert params["w3"].shape == (35, 1)

    def test_disabled_encoders_have_zero_width(self):
        params = init_params(14, 4, seed=0, E=16, use_box=False, use_cls=True)
        assert params["w_box"].shape == (7, 0)
        assert params.D == 30

    def test_too_narrow_rejected(self):
        with pytest.raises(ValueError):
            OodHeadParams(C=2, K=2, E=1, use_box=False, use_cls=False)

    def test_shape_mismatch_rejected(self):
        params = init_params(6, 2, seed=0, E=4)
        arrays = dict(params.arrays)
        arrays["w1"] = np.zeros((3, 3))
        with pytest.raises(ValueError):
            params.with_arrays(arrays)


class TestForward:
    def test_zero_params_give_half(self, rng):
        params = init_params(6, 3, seed=0, E=8)
        zero = params.with_arrays(params.zeros_like())
        scores = score(zero, random_batch(rng, 5, 6, 3))
        assert scores.tolist() == [0.5] * 5

    def test_eval_is_deterministic(self, rng):
        params = widened(init_params(6, 3, seed=1, E=8), rng)
        batch = random_batch(rng, 4, 6, 3)
        assert np.array_equal(score(params, batch), score(params, batch))

    def test_matches_straight_line_evaluation(self, rng):
        params = widened(init_params(6, 3, seed=2, E=8), rng)
        batch = random_batch(rng, 3, 6, 3)
        p = params.arrays
        for i in range(3):
            f_box = batch.box_vec[i] @ p["w_box"] + p["b_box"]
            f_cls = np.concatenate([batch.logits[i], batch.onehot[i]]) @ p["w_cls"] + p["b_cls"]
            x = np.concatenate([batch.f_feat[i], f_box, f_cls])
            h1 = np.maximum(x @ p["w1"] + p["b1"], 0)
            h2 = np.maximum(h1 @ p["w2"] + p["b2"], 0)
            z = float(h2 @ p["w3"][:, 0] + p["b3"][0])
            assert score(params, batch)[i] == pytest.approx(1 / (1 + math.exp(-z)), abs=1e-12)

    def test_scores_in_unit_interval(self, rng):
        params = widened(init_params(6, 3, seed=3, E=8), rng)
        batch = random_batch(rng, 50, 6, 3)
        batch.f_feat *= 100.0
        scores = score(params, batch)
        assert np.all((scores >= 0) & (scores <= 1))

    def test_dimension_mismatch(self, rng):
        params = init_params(6, 3, seed=0, E=8)
        with pytest.raises(ValueError):
            score(params, random_batch(rng, 2, 5, 3))
        with pytest.raises(ValueError):
            score(params, random_batch(rng, 2, 6, 4))

    def test_train_mode_needs_rng(self, rng):
        params = init_params(6, 3, seed=0, E=8)
        with pytest.raises(ValueError):
            forward(params, random_batch(rng, 2, 6, 3), TRAIN)

    def test_dropout_expectation(self, rng):
        params = widened(init_params(6, 3, seed=4, E=8), rng)
        single = random_batch(rng, 1, 6, 3)
        _, eval_cache = forward(params, single, EVAL)
        repeated = single.take(np.zeros(10_000, dtype=np.int64))
        _, cache = forward(params, repeated, TRAIN, derive_rng(0))
        z = cache.z
        stderr = z.std() / math.sqrt(z.size)
        assert abs(z.mean() - eval_cache.z[0]) <= 3 * stderr + 1e-12


class TestLoss:
    def test_values(self):
        assert bce_loss(0.5, 0) == pytest.approx(math.log(2))
        assert bce_loss(0.5, 1) == pytest.approx(math.log(2))
        assert bce_loss(0.9, 0) == pytest.approx(-math.log(0.1))
        assert bce_loss(1.0, 1) == pytest.approx(0.0, abs=1e-6)

    def test_clamped_finite(self):
        assert math.isfinite(bce_loss(1.0, 0))
        assert math.isfinite(bce_loss(0.0, 1))

    def test_vector(self):
        losses = bce_loss(np.array([0.5, 0.9]), np.array([1, 0]))
        assert losses.shape == (2,)

    def test_sigmoid_stable(self):
        z = np.array([-1000.0, 0.0, 1000.0])
        assert sigmoid(z).tolist() == [0.0, 0.5, 1.0]


class TestBackward:
    def test_finite_differences(self):
        worst = 0.0
        for i in range(100):
            rng = derive_rng(i, 7)
            params = widened(init_params(4, 2, seed=i, E=4), rng)
            batch = random_batch(rng, int(rng.integers(1, 4)), 4, 2)
            worst = max(worst, max_relative_error(params, batch, batch.labels, mask_seed=i))
        assert worst < 1e-4

    def test_finite_differences_without_encoders(self, rng):
        params = widened(init_params(8, 2, seed=5, E=4, use_box=False, use_cls=False), rng)
        batch = random_batch(rng, 3, 8, 2)
        assert max_relative_error(params, batch, batch.labels) < 1e-4

    def test_saturated_correct_output_has_no_gradient(self, rng):
        params = widened(init_params(6, 3, seed=6, E=8), rng)
        arrays = dict(params.arrays)
        arrays["b3"] = np.array([60.0])
        params = params.with_arrays(arrays)
        batch = random_batch(rng, 4, 6, 3)
        _, cache = forward(params, batch, TRAIN, derive_rng(1))
        grads = backward(params, cache, np.ones(4))
        assert max(np.abs(g).max() for g in grads.values() if g.size) < 1e-6

    def test_dropped_units_get_no_gradient(self, rng):
        params = widened(init_params(6, 3, seed=7, E=16, dropout_p=0.5), rng)
        batch = random_batch(rng, 1, 6, 3)
        for mask_seed in range(50):
            _, cache = forward(params, batch, TRAIN, derive_rng(mask_seed))
            dropped = np.flatnonzero(cache.mask[0] == 0)
            if dropped.size:
                break
        assert dropped.size > 0
        grads = backward(params, cache, np.array([1]))
        assert not grads["w3"][dropped].any()
        assert not grads["w2"][:, dropped].any()
        assert not grads["b2"][dropped].any()

    def test_gradient_keys_follow_param_order(self, rng):
        params = init_params(6, 3, seed=0, E=8)
        _, cache = forward(params, random_batch(rng, 2, 6, 3), TRAIN, derive_rng(0))
        grads = backward(params, cache, np.array([0, 1]))
        assert tuple(grads) == PARAM_NAMES
        for name in PARAM_NAMES:
            assert grads[name].shape == params[name].shape
