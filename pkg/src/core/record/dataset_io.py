"""
Dataset recorder - newline-delimited JSON split files
"""
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from src.models.geometry import Box3D, PointCloud
from src.models.scene import Annotation, DatasetSplit, Scene
from src.utils.errors import DatasetFormatError

FORMAT_VERSION = 1
SPLIT_FILES = {"train": "train.jsonl", "val": "val.jsonl", "test": "test.jsonl"}


def _dumps(record: Dict[str, Any]) -> str:
    # repr-based float encoding round-trips every float64 exactly
    return json.dumps(record, separators=(",", ":"), allow_nan=False)


def scene_to_record(scene: Scene) -> Dict[str, Any]:
    annotations = []
    for ann in scene.annotations:
        entry = {
            "box": ann.box.to_array().tolist(),
            "class_id": int(ann.class_id),
            "is_ood": bool(ann.is_ood),
            "class_name": ann.class_name,
        }
        if ann.original_class is not None:
            entry["original_class"] = int(ann.original_class)
        if ann.scale_factors is not None:
            entry["scale_factors"] = [float(v) for v in ann.scale_factors]
        annotations.append(entry)
    return {
        "id": scene.id,
        "points": scene.cloud.points.tolist(),
        "annotations": annotations,
    }


def record_to_scene(record: Dict[str, Any]) -> Scene:
    """Build a Scene from a decoded record; KeyError/TypeError/ValueError on bad content"""
    annotations = []
    for entry in record["annotations"]:
        scale = entry.get("scale_factors")
        annotations.append(Annotation(
            box=Box3D.from_array(entry["box"]),
            class_id=int(entry["class_id"]),
            is_ood=bool(entry["is_ood"]),
            class_name=entry.get("class_name", ""),
            original_class=entry.get("original_class"),
            scale_factors=tuple(scale) if scale is not None else None,
        ))
    return Scene(id=str(record["id"]), cloud=PointCloud(record["points"]), annotations=annotations)


def write_split_file(
    scenes: List[Scene],
    path: Path,
    split: str,
    seed: Optional[int] = None,
    config_digest: Optional[str] = None
) -> Path:
    """Write one split: a header record followed by one record per scene"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "format_version": FORMAT_VERSION,
        "split": split,
        "seed": seed,
        "config_digest": config_digest,
        "num_scenes": len(scenes),
    }
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(_dumps(header) + "\n")
        for scene in scenes:
            f.write(_dumps(scene_to_record(scene)) + "\n")
    return path


def read_split_file(path: Path) -> Tuple[Dict[str, Any], List[Scene]]:
    """
    Read one split file.

    Raises:
        DatasetFormatError: bad JSON, bad header, bad record, or a scene count
                            that differs from the header (truncated file)
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Dataset file not found: {path}")

    with open(path, 'r', encoding='utf-8') as f:
        lines = f.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DatasetFormatError("missing header record", str(path), 1)

    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise DatasetFormatError(f"header is not valid JSON ({e.msg})", str(path), 1)
    if not isinstance(header, dict) or header.get("format_version") != FORMAT_VERSION:
        raise DatasetFormatError(f"unsupported header, expected format_version {FORMAT_VERSION}", str(path), 1)
    if not isinstance(header.get("num_scenes"), int):
        raise DatasetFormatError("header lacks num_scenes", str(path), 1)

    scenes = []
    for line_no, line in enumerate(lines[1:], start=2):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise DatasetFormatError(f"record is not valid JSON ({e.msg})", str(path), line_no)
        try:
            scenes.append(record_to_scene(record))
        except (KeyError, TypeError, ValueError) as e:
            raise DatasetFormatError(f"invalid scene record ({e})", str(path), line_no)

    if len(scenes) != header["num_scenes"]:
        raise DatasetFormatError(
            f"expected {header['num_scenes']} scenes, found {len(scenes)} (truncated file?)",
            str(path), len(lines) + 1
        )
    return header, scenes


def write_dataset(
    split: DatasetSplit,
    out_dir: Path,
    seed: Optional[int] = None,
    config_digest: Optional[str] = None
) -> Dict[str, Path]:
    """Write train/val/test files into out_dir"""
    out_dir = Path(out_dir)
    written = {}
    for name, scenes in split.items():
        written[name] = write_split_file(scenes, out_dir / SPLIT_FILES[name], name, seed, config_digest)
    return written


def read_dataset(in_dir: Path) -> DatasetSplit:
    """Read train/val/test files from in_dir"""
    in_dir = Path(in_dir)
    parts = {}
    for name, file_name in SPLIT_FILES.items():
        header, scenes = read_split_file(in_dir / file_name)
        if header.get("split") != name:
            raise DatasetFormatError(f"header names split '{header.get('split')}', expected '{name}'",
                                     str(in_dir / file_name), 1)
        parts[name] = scenes
    return DatasetSplit(**parts)
