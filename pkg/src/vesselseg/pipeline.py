"""End-to-end composition of the stages, shared by the CLI and the tests.

One segmentation run is: grayscale projection -> contrast enhancement ->
background subtraction -> automatic threshold -> binarization ->
reconstruction. RunConfig freezes every knob of that chain (plus dataset
and output locations), and its snapshot is embedded into every JSON
report so a run can be reproduced from its own output.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .colorspace import LabWeights, pca_grayscale, rgb_to_lab
from .dataset_io import (
    DatasetItem,
    PipelineArtifacts,
    load_image,
    load_truth,
    make_overlay,
    save_artifacts,
    scan_dataset,
)
from .enhancement import (
    ClaheParams,
    EnhancerChoice,
    LocalNormParams,
    SuaceParams,
    UnsharpParams,
    apply_enhancer,
)
from .errors import DegenerateImageError, ParameterError
from .evaluation import DatasetReport, aggregate, confusion, metrics, write_csv, write_json
from .imagecore import check_gray
from .reconstruction import ReconstructionParams, reconstruct
from .segmentation import binarize, isodata_threshold, subtract_background

log = logging.getLogger("vesselseg")

DEFAULT_SEED = 42
DEFAULT_BACKGROUND_RADIUS = 4


@dataclass(frozen=True)
class RunConfig:
    """Every knob of one run; defaults reproduce the reference setup.

    ``enhancer`` names the active method for enhance/segment; all four
    parameter records are kept so an evaluation run can sweep methods
    without re-parsing flags.
    """

    enhancer: str = "suace"
    suace: SuaceParams = field(default_factory=SuaceParams)
    clahe: ClaheParams = field(default_factory=ClaheParams)
    ln: LocalNormParams = field(default_factory=LocalNormParams)
    lum: UnsharpParams = field(default_factory=UnsharpParams)
    recon: ReconstructionParams = field(default_factory=ReconstructionParams)
    background_radius: int = DEFAULT_BACKGROUND_RADIUS
    lab_weights: LabWeights = field(default_factory=LabWeights)
    vessels_dark: bool = True
    seed: int = DEFAULT_SEED
    dataset_kind: str | None = None
    dataset_root: str | None = None
    output_dir: str | None = None
    save_stages: bool = False

    def choice(self, method: str | None = None) -> EnhancerChoice:
        """EnhancerChoice for ``method`` (default: the active enhancer)."""
        name = method or self.enhancer
        params = {"suace": self.suace, "clahe": self.clahe, "ln": self.ln, "lum": self.lum}.get(name)
        if params is None:
            raise ParameterError(f"unknown enhancer {name!r}")
        return EnhancerChoice(method=name, params=params)

    def snapshot(self) -> dict:
        """JSON-safe dump of the full configuration."""
        return {
            "enhancer": self.enhancer,
            "suace": {"sigma": self.suace.sigma, "d": self.suace.d, "k": self.suace.k},
            "clahe": {"tiles": list(self.clahe.tiles), "clip_limit": self.clahe.clip_limit},
            "ln": {
                "sigma_mean": self.ln.sigma_mean,
                "sigma_std": self.ln.sigma_std,
                "out_gain": self.ln.out_gain,
                "eps": self.ln.eps,
            },
            "lum": {"radius": self.lum.radius, "amount": self.lum.amount},
            "recon": {
                "a1": self.recon.a1,
                "h": self.recon.h,
                "v": self.recon.v,
                "a2": self.recon.a2,
            },
            "background_radius": self.background_radius,
            "lab_weights": {"l": self.lab_weights.l, "a": self.lab_weights.a, "b": self.lab_weights.b},
            "vessels_dark": self.vessels_dark,
            "seed": self.seed,
            "dataset_kind": self.dataset_kind,
            "dataset_root": str(self.dataset_root) if self.dataset_root else None,
            "output_dir": str(self.output_dir) if self.output_dir else None,
            "save_stages": self.save_stages,
        }


def derive_seed(seed: int, image_id: str) -> int:
    """Stable per-image seed so batch order never changes a result."""
    digest = hashlib.blake2s(f"{seed}:{image_id}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def to_grayscale(image: np.ndarray, config: RunConfig) -> np.ndarray:
    """Color inputs go through the weighted-Lab projection; gray passes through."""
    if image.ndim == 3:
        return pca_grayscale(rgb_to_lab(image), config.lab_weights)
    return check_gray(image)


def segment_image(image: np.ndarray, config: RunConfig, image_id: str = "image") -> PipelineArtifacts:
    """Run the full chain on one image and return every stage.

    Raises DegenerateImageError naming the threshold stage when the image
    carries no usable variation (e.g. constant input).
    """
    gray = to_grayscale(image, config)
    enhanced = apply_enhancer(gray, config.choice())
    subtracted = subtract_background(enhanced, config.background_radius)
    try:
        iso = isodata_threshold(subtracted)
    except DegenerateImageError as exc:
        raise DegenerateImageError(f"threshold stage: {exc}") from exc
    mask_raw = binarize(subtracted, iso.threshold, vessels_dark=config.vessels_dark)
    mask = reconstruct(mask_raw, config.recon, seed=derive_seed(config.seed, image_id))
    overlay = make_overlay(gray, mask)
    return PipelineArtifacts(
        image_id=image_id,
        grayscale=gray,
        enhanced=enhanced,
        subtracted=subtracted,
        mask_raw=mask_raw,
        mask=mask,
        overlay=overlay,
    )


def evaluate_dataset(config: RunConfig, methods: tuple[str, ...]) -> dict[str, DatasetReport]:
    """Segment and score every dataset item once per requested method."""
    if config.dataset_kind is None or config.dataset_root is None:
        raise ParameterError("evaluation needs dataset_kind and dataset_root")
    items, warnings = scan_dataset(config.dataset_root, config.dataset_kind)
    for w in warnings:
        log.warning("%s", w)

    loaded: list[tuple[DatasetItem, np.ndarray, np.ndarray]] = []
    for item in items:
        image = load_image(item.image_path)
        truth = load_truth(item.truth_path)
        loaded.append((item, image, truth))

    reports: dict[str, DatasetReport] = {}
    for method in methods:
        cfg = replace(config, enhancer=method)
        records = []
        for item, image, truth in loaded:
            arts = segment_image(image, cfg, image_id=item.image_id)
            rec = metrics(confusion(arts.mask, truth), image_id=item.image_id)
            records.append(rec)
            log.info(
                "%s %s %s: tpr=%.4f fpr=%.4f acc=%.4f",
                cfg.dataset_kind,
                method,
                item.image_id,
                rec.tpr,
                rec.fpr,
                rec.acc,
            )
            if cfg.save_stages and cfg.output_dir:
                full = replace(arts, overlay=make_overlay(arts.grayscale, arts.mask, truth))
                save_artifacts(full, f"{cfg.output_dir}/{method}_stages")
        reports[method] = aggregate(records, dataset=cfg.dataset_kind, params=cfg.snapshot())
    return reports


def write_reports(reports: dict[str, DatasetReport], out_dir) -> list[str]:
    """Persist each method's report as <method>.csv and <method>.json."""
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for method, report in reports.items():
        written.append(str(write_csv(report, directory / f"{method}.csv")))
        written.append(str(write_json(report, directory / f"{method}.json")))
    return written
