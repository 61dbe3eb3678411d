"""Filesystem side of the pipeline: dataset scanning, decoding, artifacts.

Understands the published directory layouts of the two fundus datasets:

* DRIVE: ``<root>/test/images/NN_test.tif`` paired with
  ``<root>/test/1st_manual/NN_manual1.gif``;
* STARE: ``<root>/im*.ppm`` (optionally .gz) paired with the first
  observer's ``<id>.ah.ppm`` labels;
* custom: ``<root>/images/<id>.*`` paired with ``<root>/labels/<id>.*``.

Decoding goes through Pillow with transparent gzip unwrapping, normalized
to the internal float [0, 1] domain. Stage artifacts are written as 8-bit
PNGs with deterministic names.
"""

from __future__ import annotations

import gzip
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DataError, DecodeError, ImageError
from .imagecore import check_gray, check_mask, check_rgb

DATASET_KINDS = ("drive", "stare", "custom")


@dataclass(frozen=True)
class DatasetItem:
    """One image/ground-truth pair of a dataset."""

    image_id: str
    image_path: Path
    truth_path: Path
    dataset: str


def _drive_pairs(root: Path):
    images = sorted((root / "test" / "images").glob("*_test.*"))
    truth_dir = root / "test" / "1st_manual"
    for img in images:
        image_id = img.name.split("_test")[0]
        matches = sorted(truth_dir.glob(f"{image_id}_manual1.*"))
        yield image_id, img, matches[0] if matches else None


def _stare_pairs(root: Path):
    images = sorted(p for p in root.glob("im*.ppm*") if ".ah." not in p.name and ".vk." not in p.name)
    for img in images:
        image_id = img.name.split(".")[0]
        matches = sorted(root.glob(f"{image_id}.ah.*"))
        yield image_id, img, matches[0] if matches else None


def _custom_pairs(root: Path):
    images = sorted((root / "images").glob("*"))
    labels_dir = root / "labels"
    for img in images:
        if not img.is_file():
            continue
        image_id = img.name.split(".")[0]
        matches = sorted(labels_dir.glob(f"{image_id}.*"))
        yield image_id, img, matches[0] if matches else None


def scan_dataset(root, kind: str) -> tuple[list[DatasetItem], list[str]]:
    """Enumerate image/truth pairs under ``root``.

    Returns the items sorted by image_id plus a warning string for every
    image whose ground-truth counterpart is missing (those are skipped).

    Raises
    ------
    DataError
        If the root does not exist or no usable pair is found.
    """
    kind = kind.lower()
    if kind not in DATASET_KINDS:
        raise DataError(f"unknown dataset kind {kind!r}; expected one of {DATASET_KINDS}")
    rootp = Path(root)
    if not rootp.is_dir():
        raise DataError(f"dataset root does not exist: {rootp}")

    pairs = {"drive": _drive_pairs, "stare": _stare_pairs, "custom": _custom_pairs}[kind](rootp)
    items: list[DatasetItem] = []
    warnings: list[str] = []
    for image_id, img, truth in pairs:
        if truth is None:
            warnings.append(f"{image_id}: no ground-truth counterpart for {img.name}; skipped")
            continue
        items.append(DatasetItem(image_id=image_id, image_path=img, truth_path=truth, dataset=kind))
    items.sort(key=lambda it: it.image_id)
    if not items:
        raise DataError(f"no usable {kind} items under {rootp}")
    return items, warnings


_GZIP_MAGIC = b"\x1f\x8b"


def _open_bytes(path: Path) -> bytes:
    raw = path.read_bytes()
    if raw[:2] == _GZIP_MAGIC:
        raw = gzip.decompress(raw)
    return raw


def load_image(path) -> np.ndarray:
    """Decode an image file to float64 in [0, 1].

    Returns a (h, w) array for single-channel sources and (h, w, 3) for
    color; grayscale-looking palettes (all channels equal) collapse to a
    single channel. Animated/multi-frame files contribute their first
    frame only. Gzip-compressed files are unwrapped transparently.
    """
    p = Path(path)
    if not p.is_file():
        raise DataError(f"no such file: {p}")
    try:
        with Image.open(io.BytesIO(_open_bytes(p))) as im:
            im.seek(0)
            mode = im.mode
            if mode in ("1", "L"):
                arr = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
            elif mode in ("I", "I;16", "I;16B", "I;16L"):
                arr = np.asarray(im, dtype=np.float64) / 65535.0
            elif mode == "F":
                arr = np.clip(np.asarray(im, dtype=np.float64), 0.0, 1.0)
            else:
                rgb = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
                if np.array_equal(rgb[..., 0], rgb[..., 1]) and np.array_equal(rgb[..., 1], rgb[..., 2]):
                    arr = rgb[..., 0]
                else:
                    arr = rgb
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"cannot decode {p}: {exc}") from exc
    return np.clip(arr, 0.0, 1.0)


def load_truth(path) -> np.ndarray:
    """Load a ground-truth mask: grayscale load, then threshold at 50% of max.

    Tolerates anti-aliased label files; an all-background truth stays
    all-false.
    """
    arr = load_image(path)
    if arr.ndim == 3:
        arr = arr.mean(axis=2)
    peak = arr.max()
    if peak <= 0.0:
        return np.zeros(arr.shape, dtype=bool)
    return arr > 0.5 * peak


def save_image(path, img: np.ndarray) -> Path:
    """Write a [0, 1] gray or RGB array as an 8-bit PNG."""
    arr = np.asarray(img)
    if arr.ndim == 2:
        arr = check_gray(arr)
    else:
        arr = check_rgb(arr)
    data = np.round(arr * 255.0).astype(np.uint8)
    out = Path(path)
    try:
        Image.fromarray(data).save(out, format="PNG")
    except OSError as exc:
        raise DataError(f"cannot write {out}: {exc}") from exc
    return out


#: Stage names in pipeline order; also the artifact file-name suffixes.
STAGE_NAMES = ("grayscale", "enhanced", "subtracted", "mask_raw", "mask", "overlay")


@dataclass(frozen=True)
class PipelineArtifacts:
    """Optional per-stage images produced by one segmentation run.

    All present stages must share height/width. ``mask`` is the final
    reconstructed mask; ``mask_raw`` precedes reconstruction.
    """

    image_id: str = "image"
    grayscale: np.ndarray | None = None
    enhanced: np.ndarray | None = None
    subtracted: np.ndarray | None = None
    mask_raw: np.ndarray | None = None
    mask: np.ndarray | None = None
    overlay: np.ndarray | None = None

    def __post_init__(self) -> None:
        dims = {
            name: getattr(self, name).shape[:2]
            for name in STAGE_NAMES
            if getattr(self, name) is not None
        }
        if len(set(dims.values())) > 1:
            raise ImageError(f"artifact stages disagree on dimensions: {dims}")

    def present(self):
        for name in STAGE_NAMES:
            arr = getattr(self, name)
            if arr is not None:
                yield name, arr


def make_overlay(original: np.ndarray, pred: np.ndarray, truth: np.ndarray | None = None) -> np.ndarray:
    """Paint prediction/truth over the original image.

    Agreement pixels are white, prediction-only pixels pure red,
    truth-only pixels pure green; everything else keeps the original
    intensities. With no truth given, the prediction paints red alone.
    """
    base = np.asarray(original, dtype=np.float64)
    if base.ndim == 2:
        base = np.stack([base] * 3, axis=-1)
    base = check_rgb(base).copy()
    p = check_mask(pred, "pred")
    if truth is None:
        base[p] = (1.0, 0.0, 0.0)
        return base
    t = check_mask(truth, "truth")
    if t.shape != p.shape:
        raise ImageError(f"mask shapes differ: pred {p.shape} vs truth {t.shape}")
    base[p & ~t] = (1.0, 0.0, 0.0)
    base[t & ~p] = (0.0, 1.0, 0.0)
    base[p & t] = (1.0, 1.0, 1.0)
    return base


def save_artifacts(artifacts: PipelineArtifacts, out_dir) -> list[Path]:
    """Write every present stage as ``<image_id>_<stage>.png`` under out_dir."""
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for name, arr in artifacts.present():
        if arr.dtype == bool:
            arr = arr.astype(np.float64)
        written.append(save_image(directory / f"{artifacts.image_id}_{name}.png", arr))
    return written
