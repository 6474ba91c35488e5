"""
Surrogate 3D detector: shape-descriptor logits and noisy detections
"""
from typing import List, Sequence, Tuple
import math

import numpy as np

from src.core.detect.bev_raster import rasterize_bev, stack_channels
from src.core.geometry.box_ops import in_box_mask
from src.models.detection import Detection, DetectionNoiseConfig, FeatureMap, GridSpec
from src.models.geometry import Box3D, PointCloud
from src.models.scene import ClassSpec, Scene, id_classes

EMPTY_BOX_LOGIT = -10.0
MIN_INTENSITY_SIGMA = 0.005
# size tolerance of the class logits, as a fraction of the class mean per axis
DIM_TOLERANCE = 0.5


def descriptor_stats(catalog: Sequence[ClassSpec]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per-class descriptor prototypes over (l, w, h, point count, mean intensity).

    Size spread is the generative std widened by DIM_TOLERANCE of the mean.
    Point count and mean intensity use their sampling spread: the Poisson
    std sqrt(points_mean), and the std of a mean of points_mean uniform draws.

    Returns:
        (mu, sigma), both (K, 5), for the ID classes in catalog order
    """
    specs = id_classes(list(catalog))
    if not specs:
        raise ValueError("catalog has no ID classes")
    mu = np.zeros((len(specs), 5))
    sigma = np.zeros((len(specs), 5))
    for k, spec in enumerate(specs):
        mean = np.array(spec.dim_mean)
        std = np.array(spec.dim_std)
        lo, hi = spec.intensity_range
        n = float(spec.points_mean)
        mu[k] = [*mean, spec.points_mean, 0.5 * (lo + hi)]
        sigma[k, :3] = np.sqrt(std ** 2 + (DIM_TOLERANCE * mean) ** 2)
        sigma[k, 3] = math.sqrt(n)
        sigma[k, 4] = max((hi - lo) / math.sqrt(12.0 * n), MIN_INTENSITY_SIGMA)
    return mu, sigma


def shape_descriptor(cloud: PointCloud, box: Box3D) -> np.ndarray:
    """(l, w, h, point count, mean intensity); mean intensity is 0 for an empty box"""
    mask = in_box_mask(cloud, box)
    n = int(mask.sum())
    mean_intensity = float(cloud.intensity[mask].mean()) if n else 0.0
    return np.array([box.l, box.w, box.h, float(n), mean_intensity])


def descriptor_logits(descriptor: np.ndarray, mu: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    z = (descriptor[None, :] - mu) / sigma
    return -0.5 * np.sum(z * z, axis=1)


def object_logits(cloud: PointCloud, box: Box3D, catalog: Sequence[ClassSpec]) -> np.ndarray:
    """
    Class logits of the object inside box.

    logit_k = -||(d - mu_k) / sigma_k||^2 / 2 over the shape descriptor d.
    A box without points gets EMPTY_BOX_LOGIT for every class.
    """
    mu, sigma = descriptor_stats(catalog)
    descriptor = shape_descriptor(cloud, box)
    if descriptor[3] == 0:
        return np.full(mu.shape[0], EMPTY_BOX_LOGIT)
    return descriptor_logits(descriptor, mu, sigma)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = np.exp(logits - np.max(logits))
    return shifted / shifted.sum()


def make_detection(box: Box3D, logits: np.ndarray) -> Detection:
    """Detection with predicted class = argmax and score = max softmax"""
    probs = softmax(logits)
    predicted = int(np.argmax(logits))
    return Detection(box=box, logits=logits, predicted_class=predicted, score=float(probs[predicted]))


def _jitter_box(box: Box3D, noise: DetectionNoiseConfig, rng: np.random.Generator) -> Box3D:
    offset = rng.normal(0.0, 1.0, size=2) * noise.center_sigma
    scale = 1.0 + rng.normal(0.0, 1.0, size=3) * noise.dim_jitter
    dims = np.maximum(box.dims * scale, 0.05 * box.dims)
    return Box3D(box.cx + offset[0], box.cy + offset[1], box.cz, dims[0], dims[1], dims[2], box.yaw)


def _false_positive_box(
    scene: Scene,
    specs: List[ClassSpec],
    background: np.ndarray,
    grid: GridSpec,
    rng: np.random.Generator
) -> Box3D:
    """Mean-size box of a random ID class, centered on a background point when there is one"""
    spec = specs[int(rng.integers(len(specs)))]
    if background.size:
        cx, cy = scene.cloud.points[background[int(rng.integers(background.size))], :2]
    else:
        cx = rng.uniform(grid.x_min, grid.x_max)
        cy = rng.uniform(grid.y_min, grid.y_max)
    l, w, h = spec.dim_mean
    yaw = rng.uniform(-math.pi, math.pi)
    return Box3D(float(cx), float(cy), h / 2.0, l, w, h, yaw)


def detect(
    scene: Scene,
    noise: DetectionNoiseConfig,
    rng: np.random.Generator,
    catalog: Sequence[ClassSpec],
    grid: GridSpec = None
) -> List[Detection]:
    """
    Noisy detections for one scene.

    Each annotation (ID or OOD) is missed with probability miss_rate;
    otherwise it yields a detection whose box is jittered and whose logits
    come from the annotated box and its true points. Poisson(fp_rate) false
    positives follow, placed on background points.

    Random draws per annotation are made whether or not it is missed, so the
    stream consumed does not depend on the outcome.
    """
    grid = grid or GridSpec()
    detections: List[Detection] = []
    for ann in scene.annotations:
        missed = rng.random() < noise.miss_rate
        box = _jitter_box(ann.box, noise, rng)
        if missed:
            continue
        detections.append(make_detection(box, object_logits(scene.cloud, ann.box, catalog)))

    n_fp = int(rng.poisson(noise.fp_rate)) if noise.fp_rate > 0 else 0
    if n_fp:
        specs = id_classes(list(catalog))
        occupied = np.zeros(len(scene.cloud), dtype=bool)
        for ann in scene.annotations:
            occupied |= in_box_mask(scene.cloud, ann.box)
        background = np.flatnonzero(~occupied)
        for _ in range(n_fp):
            box = _false_positive_box(scene, specs, background, grid, rng)
            detections.append(make_detection(box, object_logits(scene.cloud, box, catalog)))
    return detections


class SurrogateDetector:
    """
    Frozen stand-in for a pre-trained LiDAR detector.

    Produces the BEV feature map of a scene and its noisy detections.
    """

    def __init__(
        self,
        catalog: Sequence[ClassSpec],
        grid: GridSpec = None,
        noise: DetectionNoiseConfig = None,
        feature_maps: Sequence[str] = ("neck",)
    ):
        """
        Initialize surrogate detector

        Args:
            catalog: class catalog; its ID classes define the K logits
            grid: BEV grid of the feature map
            noise: detection corruption
            feature_maps: map ids concatenated into the feature map
        """
        self.catalog = tuple(catalog)
        self.grid = grid or GridSpec()
        self.noise = noise or DetectionNoiseConfig()
        self.feature_maps = tuple(feature_maps)
        self.num_classes = len(id_classes(list(self.catalog)))

    def feature_map_channels(self) -> int:
        return stack_channels(self.feature_maps)

    def feature_map(self, cloud: PointCloud) -> FeatureMap:
        return rasterize_bev(cloud, self.grid, self.feature_maps)

    def logits(self, cloud: PointCloud, box: Box3D) -> np.ndarray:
        return object_logits(cloud, box, self.catalog)

    def detect(self, scene: Scene, rng: np.random.Generator) -> List[Detection]:
        return detect(scene, self.noise, rng, self.catalog, self.grid)
