"""
OOD head parameter container
"""
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

BOX_DIM = 7
# Order of the trainable arrays; also the flattening order of checkpoints
PARAM_NAMES = ("w_box", "b_box", "w_cls", "b_cls", "w1", "b1", "w2", "b2", "w3", "b3")
WEIGHT_NAMES = ("w_box", "w_cls", "w1", "w2", "w3")


def layer_widths(C: int, K: int, E: int, use_box: bool, use_cls: bool) -> Tuple[int, int, int]:
    """(D, D/2, D/4) with floor division, D = C + E per enabled encoder"""
    D = C + (E if use_box else 0) + (E if use_cls else 0)
    return D, D // 2, D // 4


def expected_shapes(C: int, K: int, E: int, use_box: bool, use_cls: bool) -> Dict[str, Tuple[int, ...]]:
    D, D1, D2 = layer_widths(C, K, E, use_box, use_cls)
    e_box = E if use_box else 0
    e_cls = E if use_cls else 0
    return {
        "w_box": (BOX_DIM, e_box),
        "b_box": (e_box,),
        "w_cls": (2 * K, e_cls),
        "b_cls": (e_cls,),
        "w1": (D, D1),
        "b1": (D1,),
        "w2": (D1, D2),
        "b2": (D2,),
        "w3": (D2, 1),
        "b3": (1,),
    }


@dataclass
class OodHeadParams:
    """
    Box encoder, logits+class encoder and 3-layer MLP.

    Weights are stored (fan_in, fan_out) and applied as x @ W + b. A disabled
    encoder keeps zero-width arrays so the concatenation simply omits it.
    """
    C: int
    K: int
    E: int = 64
    use_box: bool = True
    use_cls: bool = True
    dropout_p: float = 0.3
    seed: int = 0
    arrays: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.C < 1 or self.K < 1 or self.E < 1:
            raise ValueError(f"C, K and E must be >= 1, got C={self.C}, K={self.K}, E={self.E}")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError(f"dropout_p must be in [0, 1), got {self.dropout_p}")
        D, D1, D2 = layer_widths(self.C, self.K, self.E, self.use_box, self.use_cls)
        if D2 < 1:
            raise ValueError(f"input width {D} is too small for three halving layers")
        if self.arrays:
            shapes = self.shapes()
            for name in PARAM_NAMES:
                if name not in self.arrays:
                    raise ValueError(f"missing parameter array '{name}'")
                if self.arrays[name].shape != shapes[name]:
                    raise ValueError(f"{name} has shape {self.arrays[name].shape}, expected {shapes[name]}")

    @property
    def D(self) -> int:
        return layer_widths(self.C, self.K, self.E, self.use_box, self.use_cls)[0]

    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        return expected_shapes(self.C, self.K, self.E, self.use_box, self.use_cls)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    def with_arrays(self, arrays: Dict[str, np.ndarray]) -> 'OodHeadParams':
        return OodHeadParams(
            C=self.C, K=self.K, E=self.E,
            use_box=self.use_box, use_cls=self.use_cls,
            dropout_p=self.dropout_p, seed=self.seed,
            arrays=arrays
        )

    def copy(self) -> 'OodHeadParams':
        return self.with_arrays({name: arr.copy() for name, arr in self.arrays.items()})

    def zeros_like(self) -> Dict[str, np.ndarray]:
        return {name: np.zeros_like(arr) for name, arr in self.arrays.items()}

    def layer_shapes(self) -> List[List[int]]:
        return [list(self.arrays[name].shape) for name in PARAM_NAMES]
