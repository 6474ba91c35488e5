import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

import argparse

import numpy as np
from tqdm import tqdm

from src.core.features.feature_extractor import InputBatch
from src.core.head.gradcheck import max_relative_error
from src.core.head.mlp import init_params
from src.utils.seeding import derive_rng


def random_case(index: int, C: int, K: int, E: int):
    """Random head, batch and labels; params are widened so ReLUs are mixed"""
    rng = derive_rng(index, 7)
    params = init_params(C, K, seed=index, E=E)
    arrays = {name: arr + (rng.normal(0.0, 0.3, arr.shape) if name.startswith("b") else 0.0)
              for name, arr in params.arrays.items()}
    params = params.with_arrays(arrays)

    n = int(rng.integers(1, 6))
    onehot = np.zeros((n, K))
    onehot[np.arange(n), rng.integers(0, K, size=n)] = 1.0
    batch = InputBatch(
        f_feat=rng.normal(size=(n, C)),
        box_vec=rng.normal(size=(n, 7)),
        logits=rng.normal(size=(n, K)),
        onehot=onehot,
        labels=rng.integers(0, 2, size=n)
    )
    return params, batch


def main():
    parser = argparse.ArgumentParser(description="Finite-difference check of OOD head gradients")
    parser.add_argument("--cases", type=int, default=100)
    parser.add_argument("--channels", type=int, default=6)
    parser.add_argument("--classes", type=int, default=3)
    parser.add_argument("--embed", type=int, default=8)
    parser.add_argument("--tolerance", type=float, default=1e-4)
    args = parser.parse_args()

    print("=" * 70)
    print("OOD HEAD GRADIENT CHECK")
    print("=" * 70)
    print(f"Cases: {args.cases} | C={args.channels} K={args.classes} E={args.embed}")

    worst = 0.0
    for i in tqdm(range(args.cases), unit="case"):
        params, batch = random_case(i, args.channels, args.classes, args.embed)
        worst = max(worst, max_relative_error(params, batch, batch.labels, mask_seed=i))

    print(f"\nWorst relative error: {worst:.3e}")
    if worst < args.tolerance:
        print(f"✓ Gradients match central differences (tolerance {args.tolerance:g})")
        return 0
    print(f"✗ Gradient mismatch above tolerance {args.tolerance:g}")
    return 1


if __name__ == "__main__":
    sys.exit(main())
