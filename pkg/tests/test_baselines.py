import math

import numpy as np
import pytest

from src.core.baselines.logit_scores import (
    LOGIT_METHODS, baseline_score, default_score, energy, max_logit, msp, odin
)
from src.models.detection import Detection
from src.models.geometry import Box3D


def detection(logits, score=0.5):
    logits = np.asarray(logits, dtype=np.float64)
    return Detection(Box3D(0, 0, 0, 1, 1, 1), logits, int(np.argmax(logits)), score)


class TestMsp:
    def test_uniform(self):
        assert msp([0.3, 0.3, 0.3]) == pytest.approx(-1 / 3)

    def test_single_logit(self):
        assert msp([4.2]) == -1.0

    def test_closed_form(self):
        e2 = math.exp(2)
        assert msp([2, 0, 0]) == pytest.approx(-e2 / (e2 + 2))
        assert msp([2, 0, 0]) == pytest.approx(-0.786986, abs=1e-6)


class TestOdin:
    def test_symmetric(self):
        assert odin([0, 0]) == pytest.approx(-0.5)

    def test_temperature_cancels(self):
        assert odin([1000 * math.log(2), 0]) == pytest.approx(-2 / 3)

    def test_scaled_logits_match_msp(self, rng):
        for _ in range(20):
            logits = rng.normal(size=4)
            assert odin(1000 * logits) == pytest.approx(msp(logits), abs=1e-12)


class TestMaxLogit:
    def test_examples(self):
        assert max_logit([3, 1, 2]) == -3.0
        assert max_logit([-2.5]) == 2.5

    def test_shift(self):
        assert max_logit(np.array([3, 1, 2]) + 4.0) == -7.0


class TestEnergy:
    def test_examples(self):
        assert energy([1.5]) == pytest.approx(-1.5)
        assert energy([0, 0]) == pytest.approx(-math.log(2))
        assert energy([10, 0]) == pytest.approx(-10.0000454, abs=1e-7)


def test_default_score():
    assert default_score(detection([1.0, 0.0], score=1.0)) == -1.0
    assert default_score(detection([1.0, 0.0], score=0.0)) == 0.0


@pytest.mark.parametrize("method", sorted(LOGIT_METHODS))
def test_permutation_invariant(method, rng):
    fn = LOGIT_METHODS[method]
    logits = rng.normal(size=5)
    assert fn(logits[::-1]) == pytest.approx(fn(logits), abs=1e-12)


@pytest.mark.parametrize("method", sorted(LOGIT_METHODS))
def test_stable_for_large_logits(method):
    fn = LOGIT_METHODS[method]
    for logits in ([1e4, -1e4, 0.0], [-1e4, -1e4], [1e4, 1e4 - 1]):
        assert math.isfinite(fn(logits))


@pytest.mark.parametrize("method", sorted(LOGIT_METHODS) + ["default"])
def test_confident_detection_scores_lower(method):
    confident = detection([8.0, 0.0, 0.0], score=0.99)
    unsure = detection([1.0, 0.5, 0.0], score=0.4)
    assert baseline_score(method, confident) < baseline_score(method, unsure)


def test_unknown_baseline():
    with pytest.raises(ValueError):
        baseline_score("flows", detection([1.0, 0.0]))
    with pytest.raises(ValueError):
        msp([])
