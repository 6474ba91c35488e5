import copy

import numpy as np
import pytest

from src.models.config import RunConfig, SceneParams
from src.models.detection import GridSpec
from src.models.scene import ClassSpec

CATALOG_DATA = [
    {
        "name": "car",
        "dim_mean": [4.5, 1.9, 1.6],
        "dim_std": [0.3, 0.1, 0.1],
        "points_mean": 60,
        "intensity_range": [0.2, 0.6],
        "frequency": 0.6,
    },
    {
        "name": "pedestrian",
        "dim_mean": [0.7, 0.7, 1.75],
        "dim_std": [0.1, 0.1, 0.1],
        "points_mean": 20,
        "intensity_range": [0.1, 0.4],
        "frequency": 0.4,
    },
    {
        "name": "debris",
        "dim_mean": [1.4, 1.0, 0.3],
        "dim_std": [0.3, 0.2, 0.05],
        "points_mean": 15,
        "intensity_range": [0.0, 0.3],
        "is_ood_class": True,
    },
]

SMALL_CONFIG = {
    "dataset": {
        "catalog": CATALOG_DATA,
        "train_scenes": 8,
        "val_scenes": 30,
        "test_scenes": 24,
        "ood_rate": 0.3,
        "master_seed": 7,
        "scene": {
            "extent": [-7.0, 7.0, -7.0, 7.0],
            "min_objects": 3,
            "max_objects": 4,
            "clutter_density": 0.05,
            "min_spacing": 0.5,
            "max_retries": 50,
        },
    },
    "detector": {
        "grid": {"x_min": -8.0, "x_max": 8.0, "y_min": -8.0, "y_max": 8.0, "cell": 0.5},
        "noise": {"center_sigma": 0.05, "dim_jitter": 0.02, "fp_rate": 0.5, "miss_rate": 0.05},
        "feature_maps": ["neck"],
        "noise_seed": 11,
    },
    "head": {
        "embed_dim": 8,
        "dropout_p": 0.3,
        "seeds": [0, 1],
        "train": {"epochs": 2, "batch_size": 16},
    },
    "eval": {
        "methods": ["default", "msp", "odin", "max_logit", "energy", "ours", "oracle"],
    },
}


@pytest.fixture
def catalog():
    return tuple(ClassSpec(**spec) for spec in CATALOG_DATA)


@pytest.fixture
def small_grid():
    return GridSpec(-8.0, 8.0, -8.0, 8.0, 0.5)


@pytest.fixture
def scene_params():
    return SceneParams(extent=(-7.0, 7.0, -7.0, 7.0), min_objects=3, max_objects=4, clutter_density=0.05)


@pytest.fixture
def config_data():
    return copy.deepcopy(SMALL_CONFIG)


@pytest.fixture
def small_config(config_data):
    return RunConfig.from_dict(config_data)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def bench_config():
    return RunConfig.from_dict(copy.deepcopy(SMALL_CONFIG))
