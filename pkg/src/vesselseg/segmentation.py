"""Background flattening, automatic thresholding, and binarization.

The segmentation core subtracts a box-filtered estimate of the background
so slow illumination drifts cancel, rescales the residue to [0, 1], picks
a global threshold by the intermeans (isodata) iteration on a 256-bin
histogram, and binarizes with vessels below the threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateImageError, ParameterError
from .imagecore import average_blur, check_gray

#: Histogram resolution used by the threshold search.
HIST_BINS = 256
#: Stop once the threshold moves less than half a bin between iterations.
_STOP_TOL = 1.0 / 512.0
_MAX_ITER = 100


def subtract_background(img: np.ndarray, radius: int = 4) -> np.ndarray:
    """Remove the local mean and rescale the difference to span [0, 1].

    The difference I - boxmean(I, radius) is invariant to adding a
    constant, so flat illumination offsets vanish. A constant input (zero
    difference everywhere) returns all zeros.
    """
    arr = check_gray(img)
    diff = arr - average_blur(arr, radius)
    lo = diff.min()
    hi = diff.max()
    if hi - lo < 1e-12:
        return np.zeros_like(arr)
    return (diff - lo) / (hi - lo)


@dataclass(frozen=True)
class IsodataResult:
    """Threshold in [0, 1], iteration count (>= 1), and convergence flag."""

    threshold: float
    iterations: int
    converged: bool


def isodata_from_histogram(counts: np.ndarray) -> IsodataResult:
    """Intermeans fixed point on a 256-bin histogram over [0, 1].

    Starting from the histogram mean, iterate
    T <- (mean below T + mean at-or-above T) / 2 using bin centers,
    stopping at a fixed point or after 100 iterations. The update is
    monotone in T, so the split sequence cannot cycle and the iteration
    lands on an exact fixed point well inside the cap for real data.

    Raises
    ------
    DegenerateImageError
        If fewer than two histogram bins are occupied.
    """
    hist = np.asarray(counts, dtype=np.float64)
    if hist.ndim != 1 or hist.shape[0] != HIST_BINS:
        raise ParameterError(f"expected a {HIST_BINS}-bin histogram, got shape {hist.shape}")
    if hist.min() < 0.0 or not np.all(np.isfinite(hist)):
        raise ParameterError("histogram counts must be finite and >= 0")
    if np.count_nonzero(hist) < 2:
        raise DegenerateImageError("histogram needs at least two occupied bins")

    centers = (np.arange(HIST_BINS, dtype=np.float64) + 0.5) / HIST_BINS
    total = hist.sum()
    mass = hist * centers

    def intermeans(t: float) -> float:
        below = centers < t
        nb = hist[below].sum()
        na = total - nb
        if nb == 0.0 or na == 0.0:
            return t
        mb = mass[below].sum() / nb
        ma = (mass.sum() - mass[below].sum()) / na
        return 0.5 * (mb + ma)

    t = float(mass.sum() / total)
    converged = False
    iterations = 0
    for iterations in range(1, _MAX_ITER + 1):
        t_next = intermeans(t)
        delta = abs(t_next - t)
        t = t_next
        if delta == 0.0:
            converged = True
            break
        if delta < _STOP_TOL and intermeans(t) == t:
            converged = True
            break
    return IsodataResult(threshold=t, iterations=iterations, converged=converged)


def isodata_threshold(img: np.ndarray) -> IsodataResult:
    """Automatic global threshold of a grayscale image by intermeans.

    The returned threshold always lies in [min(img), max(img)] and leaves
    at least one pixel on each side.

    Raises
    ------
    DegenerateImageError
        If the image has fewer than two distinct values.
    """
    arr = check_gray(img)
    lo = float(arr.min())
    hi = float(arr.max())
    if hi == lo:
        raise DegenerateImageError("image is constant; no threshold separates two classes")

    bins = np.minimum((arr * HIST_BINS).astype(np.int64), HIST_BINS - 1)
    hist = np.bincount(bins.ravel(), minlength=HIST_BINS)
    if np.count_nonzero(hist) < 2:
        # Two distinct values inside one bin: split them exactly.
        return IsodataResult(threshold=(lo + hi) / 2.0, iterations=1, converged=True)

    result = isodata_from_histogram(hist)
    t = min(max(result.threshold, lo), hi)
    if t <= lo:  # guarantee a non-empty lower class
        t = np.nextafter(lo, hi)
    return IsodataResult(threshold=float(t), iterations=result.iterations, converged=result.converged)


def binarize(img: np.ndarray, threshold: float, vessels_dark: bool = True) -> np.ndarray:
    """Split an image at a threshold; foreground is I < T when vessels are dark."""
    arr = check_gray(img)
    if not np.isfinite(threshold):
        raise ParameterError(f"threshold must be finite, got {threshold!r}")
    if vessels_dark:
        return arr < threshold
    return arr >= threshold
