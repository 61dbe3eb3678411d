"""Raster conventions and the two spatial filters everything else builds on.

Conventions used throughout the package:

* grayscale images are float64 arrays of shape (h, w) with values in [0, 1]
  (8-bit sources are divided by 255 on load);
* RGB and Lab images are float64 arrays of shape (h, w, 3);
* binary masks are bool arrays of shape (h, w);
* point coordinates are (x, y) = (column, row); arrays index as [y, x].

Both filters replicate the edge row/column outward, so a constant image
stays exactly constant and no dark halo appears at the frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ImageError, ParameterError


def check_gray(img: np.ndarray, name: str = "image") -> np.ndarray:
    """Validate a grayscale image and return it as float64.

    Raises
    ------
    ImageError
        If the array is not 2-D, is empty, or holds values outside [0, 1].
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ImageError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ImageError(f"{name} contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ImageError(f"{name} has values outside [0, 1]")
    return arr


def check_rgb(img: np.ndarray, name: str = "image") -> np.ndarray:
    """Validate an RGB image (h, w, 3) in [0, 1] and return it as float64."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ImageError(f"{name} must have shape (h, w, 3), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ImageError(f"{name} contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ImageError(f"{name} has values outside [0, 1]")
    return arr


def check_mask(mask: np.ndarray, name: str = "mask") -> np.ndarray:
    """Validate a binary mask and return it as a bool array."""
    arr = np.asarray(mask)
    if arr.ndim != 2 or arr.size == 0:
        raise ImageError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if arr.dtype != bool:
        if not np.isin(arr, (0, 1)).all():
            raise ImageError(f"{name} holds values other than 0/1")
        arr = arr.astype(bool)
    return arr


@dataclass(frozen=True)
class GaussianKernel:
    """1-D Gaussian tap weights, truncated and renormalized to unit sum.

    Attributes
    ----------
    sigma : float
        Standard deviation in pixels.
    radius : int
        Half width; the kernel covers [-radius, radius], radius = ceil(3*sigma).
    weights : np.ndarray
        2*radius + 1 nonnegative taps summing to 1 within 1e-9.
    """

    sigma: float
    radius: int
    weights: np.ndarray


def gaussian_kernel(sigma: float) -> GaussianKernel:
    """Build the truncated, renormalized 1-D Gaussian used by gaussian_blur."""
    if not (sigma > 0.0) or not math.isfinite(sigma):
        raise ParameterError(f"sigma must be positive and finite, got {sigma!r}")
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(x * x) / (2.0 * sigma * sigma))
    w /= w.sum()
    return GaussianKernel(sigma=float(sigma), radius=radius, weights=w)


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian low-pass with edge replication.

    Separable implementation: one 1-D pass per axis with the truncated,
    renormalized kernel. Equivalent to full 2-D convolution with the outer
    product of the taps. Output stays within [0, 1].
    """
    arr = check_gray(img)
    k = gaussian_kernel(sigma)
    out = ndimage.convolve1d(arr, k.weights, axis=0, mode="nearest")
    out = ndimage.convolve1d(out, k.weights, axis=1, mode="nearest")
    return np.clip(out, 0.0, 1.0)


def average_blur(img: np.ndarray, radius: int) -> np.ndarray:
    """Box-filter mean over the (2*radius+1)^2 window, edges replicated."""
    arr = check_gray(img)
    if not isinstance(radius, (int, np.integer)) or radius < 1:
        raise ParameterError(f"radius must be an integer >= 1, got {radius!r}")
    size = 2 * int(radius) + 1
    out = ndimage.uniform_filter(arr, size=size, mode="nearest")
    return np.clip(out, 0.0, 1.0)
