"""
OOD head checkpoints - versioned JSON with row-major flattened arrays
"""
from dataclasses import asdict
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.models.config import TrainConfig
from src.models.head import PARAM_NAMES, OodHeadParams
from src.utils.errors import DatasetFormatError

CHECKPOINT_VERSION = 1


def checkpoint_record(
    params: OodHeadParams,
    train_config: Optional[TrainConfig] = None,
    seeds: Optional[List[int]] = None,
    threshold: Optional[float] = None,
    epoch_losses: Optional[List[float]] = None,
    config_digest: Optional[str] = None
) -> Dict[str, Any]:
    return {
        "format_version": CHECKPOINT_VERSION,
        "C": params.C,
        "K": params.K,
        "E": params.E,
        "use_box": params.use_box,
        "use_cls": params.use_cls,
        "dropout_p": params.dropout_p,
        "seed": params.seed,
        "layer_shapes": {name: list(params[name].shape) for name in PARAM_NAMES},
        # repr floats: shortest text that round-trips each float64
        "arrays": {name: params[name].ravel(order="C").tolist() for name in PARAM_NAMES},
        "train_config": asdict(train_config) if train_config is not None else None,
        "seeds": list(seeds) if seeds is not None else [params.seed],
        "threshold": threshold,
        "epoch_losses": list(epoch_losses or []),
        "config_digest": config_digest,
    }


def save_checkpoint(path: Path, params: OodHeadParams, **meta) -> Path:
    """Write params and metadata (train_config, seeds, threshold, epoch_losses, config_digest)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    record = checkpoint_record(params, **meta)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(record, f, indent=2, allow_nan=False)
        f.write("\n")
    return path


def params_from_record(record: Dict[str, Any]) -> OodHeadParams:
    """Rebuild params; KeyError/TypeError/ValueError on inconsistent content"""
    arrays = {}
    for name in PARAM_NAMES:
        shape = tuple(int(v) for v in record["layer_shapes"][name])
        flat = np.asarray(record["arrays"][name], dtype=np.float64)
        if flat.size != int(np.prod(shape)):
            raise ValueError(f"{name}: {flat.size} values for shape {shape}")
        arrays[name] = flat.reshape(shape)
    return OodHeadParams(
        C=int(record["C"]),
        K=int(record["K"]),
        E=int(record["E"]),
        use_box=bool(record["use_box"]),
        use_cls=bool(record["use_cls"]),
        dropout_p=float(record["dropout_p"]),
        seed=int(record["seed"]),
        arrays=arrays
    )


def load_checkpoint(path: Path) -> Tuple[OodHeadParams, Dict[str, Any]]:
    """
    Read a checkpoint.

    Returns:
        (params, metadata record without the arrays)

    Raises:
        FileNotFoundError: missing file
        DatasetFormatError: malformed or inconsistent checkpoint
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Checkpoint not found: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()
    try:
        record = json.loads(text)
    except json.JSONDecodeError as e:
        raise DatasetFormatError(f"checkpoint is not valid JSON ({e.msg})", str(path), e.lineno)
    if not isinstance(record, dict) or record.get("format_version") != CHECKPOINT_VERSION:
        raise DatasetFormatError(f"unsupported checkpoint, expected format_version {CHECKPOINT_VERSION}", str(path), 1)
    try:
        params = params_from_record(record)
    except (KeyError, TypeError, ValueError) as e:
        raise DatasetFormatError(f"invalid checkpoint ({e})", str(path))
    meta = {k: v for k, v in record.items() if k != "arrays"}
    return params, meta
