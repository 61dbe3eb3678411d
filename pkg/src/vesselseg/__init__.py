"""Retinal blood-vessel segmentation toolkit.

Adaptive contrast enhancement, background-subtraction thresholding, and
Hough-evidence gap bridging, with an evaluation harness for the DRIVE and
STARE fundus datasets.
"""

from .colorspace import LabWeights, pca_grayscale, rgb_to_lab
from .dataset_io import (
    DatasetItem,
    PipelineArtifacts,
    load_image,
    load_truth,
    make_overlay,
    save_artifacts,
    save_image,
    scan_dataset,
)
from .enhancement import (
    ClaheParams,
    EnhancerChoice,
    LocalNormParams,
    SuaceParams,
    UnsharpParams,
    apply_enhancer,
    clahe,
    local_normalize,
    suace,
    suace_bounds,
    unsharp_mask,
)
from .errors import (
    DataError,
    DecodeError,
    DegenerateImageError,
    ImageError,
    ParameterError,
    PipelineError,
)
from .evaluation import (
    ConfusionCounts,
    DatasetReport,
    MetricsRecord,
    aggregate,
    comparison_table,
    confusion,
    metrics,
    write_csv,
    write_json,
)
from .imagecore import GaussianKernel, average_blur, gaussian_blur, gaussian_kernel
from .pipeline import RunConfig, derive_seed, evaluate_dataset, segment_image, to_grayscale
from .reconstruction import (
    ComponentLabels,
    LineSegment,
    ReconstructionParams,
    bridge_gaps,
    filter_small,
    find_endpoints,
    label_components,
    probabilistic_hough,
    reconstruct,
)
from .segmentation import (
    IsodataResult,
    binarize,
    isodata_from_histogram,
    isodata_threshold,
    subtract_background,
)

__version__ = "0.1.0"

__all__ = [
    "LabWeights",
    "pca_grayscale",
    "rgb_to_lab",
    "DatasetItem",
    "PipelineArtifacts",
    "load_image",
    "load_truth",
    "make_overlay",
    "save_artifacts",
    "save_image",
    "scan_dataset",
    "ClaheParams",
    "EnhancerChoice",
    "LocalNormParams",
    "SuaceParams",
    "UnsharpParams",
    "apply_enhancer",
    "clahe",
    "local_normalize",
    "suace",
    "suace_bounds",
    "unsharp_mask",
    "DataError",
    "DecodeError",
    "DegenerateImageError",
    "ImageError",
    "ParameterError",
    "PipelineError",
    "ConfusionCounts",
    "DatasetReport",
    "MetricsRecord",
    "aggregate",
    "comparison_table",
    "confusion",
    "metrics",
    "write_csv",
    "write_json",
    "GaussianKernel",
    "average_blur",
    "gaussian_blur",
    "gaussian_kernel",
    "RunConfig",
    "derive_seed",
    "evaluate_dataset",
    "segment_image",
    "to_grayscale",
    "ComponentLabels",
    "LineSegment",
    "ReconstructionParams",
    "bridge_gaps",
    "filter_small",
    "find_endpoints",
    "label_components",
    "probabilistic_hough",
    "reconstruct",
    "IsodataResult",
    "binarize",
    "isodata_from_histogram",
    "isodata_threshold",
    "subtract_background",
]
