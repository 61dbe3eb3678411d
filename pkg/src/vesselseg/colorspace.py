"""Color handling: sRGB to CIE Lab, and PCA projection to one channel.

The PCA grayscale weights the Lab axes before finding the principal
direction, projects every pixel onto it, and rescales the projection to
span [0, 1]. The luminance axis dominates by default so vessels keep
their dark-on-bright polarity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .imagecore import check_rgb

# sRGB (D65, 2 degree observer) linear RGB -> XYZ.
_SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_WHITE_D65 = np.array([0.95047, 1.0, 1.08883])


@dataclass(frozen=True)
class LabWeights:
    """Per-channel scale applied to (L, a, b) before the PCA.

    Defaults keep L dominant; all three must be >= 0 and not all zero.
    """

    l: float = 1.0
    a: float = 0.25
    b: float = 0.25

    def __post_init__(self) -> None:
        vals = (self.l, self.a, self.b)
        if any(not np.isfinite(v) or v < 0.0 for v in vals):
            raise ParameterError(f"Lab weights must be finite and >= 0, got {vals}")
        if all(v == 0.0 for v in vals):
            raise ParameterError("Lab weights must not all be zero")

    def as_array(self) -> np.ndarray:
        return np.array([self.l, self.a, self.b], dtype=np.float64)


def rgb_to_lab(img: np.ndarray) -> np.ndarray:
    """Convert an sRGB image in [0, 1] to CIE Lab (D65 white point).

    Returns shape (h, w, 3) with L in [0, 100] and a/b in roughly [-128, 128].
    """
    rgb = check_rgb(img)
    small = rgb <= 0.04045
    linear = np.where(small, rgb / 12.92, ((rgb + 0.055) / 1.055) ** 2.4)
    xyz = linear @ _SRGB_TO_XYZ.T
    t = xyz / _WHITE_D65
    delta = 6.0 / 29.0
    f = np.where(t > delta**3, np.cbrt(t), t / (3.0 * delta**2) + 4.0 / 29.0)
    lab = np.empty_like(xyz)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def pca_grayscale(lab: np.ndarray, weights: LabWeights = LabWeights()) -> np.ndarray:
    """Project a Lab image onto its weighted principal axis, rescaled to [0, 1].

    The projection sign is chosen so the output correlates positively with
    L (falling back to a, then b, when that correlation is exactly zero),
    keeping bright background bright. A zero-variance image comes back as
    a constant 0.5 rather than an error so upstream batch runs degrade
    gracefully; downstream thresholding reports the degeneracy instead.

    Parameters
    ----------
    lab : np.ndarray
        Lab image, shape (h, w, 3).
    weights : LabWeights
        Channel scaling applied before the covariance analysis.
    """
    arr = np.asarray(lab, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ParameterError(f"expected a (h, w, 3) Lab image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError("Lab image contains non-finite values")

    h, w, _ = arr.shape
    x = arr.reshape(-1, 3) * weights.as_array()
    centered = x - x.mean(axis=0)

    cov = centered.T @ centered / centered.shape[0]
    if np.allclose(cov, 0.0, atol=1e-18):
        return np.full((h, w), 0.5)

    eigvals, eigvecs = np.linalg.eigh(cov)
    axis = eigvecs[:, np.argmax(eigvals)]
    proj = centered @ axis

    for channel in range(3):
        ref = arr.reshape(-1, 3)[:, channel]
        corr = float(proj @ (ref - ref.mean()))
        if corr < 0.0:
            proj = -proj
        if corr != 0.0:
            break

    lo = proj.min()
    hi = proj.max()
    if hi - lo < 1e-12:
        return np.full((h, w), 0.5)
    return ((proj - lo) / (hi - lo)).reshape(h, w)
