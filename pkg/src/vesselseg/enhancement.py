"""Contrast enhancement: the adaptive sliding-window stretch plus baselines.

The default enhancer (``suace``) stretches each pixel linearly inside a
window [a, b] of fixed width ``d`` that tracks the local illumination
estimate g (a Gaussian blur of the input): a = g - d/2, b = g + d/2.
Pixels below the window clamp to 0, pixels at or above it clamp to k, and
pixels inside map to (I - a) / d * k. Because the window rides on g, a
vessel of fixed local contrast produces the same response whether it sits
in a dim corner or under the brightest illumination.

Three classical enhancers are provided for comparison runs: CLAHE, local
normalization, and luminance unsharp masking.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .imagecore import average_blur, check_gray, gaussian_blur

#: Default illumination-estimate scale (pixels).
DEFAULT_SIGMA = 7.0
#: Default stretch window width on the internal [0, 1] scale (16 on 0-255).
DEFAULT_D = 16.0 / 255.0


@dataclass(frozen=True)
class SuaceParams:
    """Parameters of the adaptive stretch.

    Attributes
    ----------
    sigma : float
        Gaussian scale of the illumination estimate, > 0.
    d : float
        Window width on the [0, 1] intensity scale, 0 < d <= 1.
    k : float
        Output ceiling; fixed at 1.0 so results stay in [0, 1].
    """

    sigma: float = DEFAULT_SIGMA
    d: float = DEFAULT_D
    k: float = 1.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.sigma) and self.sigma > 0.0):
            raise ParameterError(f"sigma must be positive, got {self.sigma!r}")
        if not (np.isfinite(self.d) and 0.0 < self.d <= 1.0):
            raise ParameterError(f"d must lie in (0, 1], got {self.d!r}")
        if self.k != 1.0:
            raise ParameterError(f"k is fixed at 1.0, got {self.k!r}")


def suace_bounds(g, d):
    """Stretch-window bounds (a, b) = (g - d/2, g + d/2); g may be scalar or array."""
    half = d / 2.0
    return g - half, g + half


def suace(img: np.ndarray, params: SuaceParams = SuaceParams()) -> np.ndarray:
    """Adaptive contrast stretch around the local illumination estimate.

    Exactly one of the three branches fires per pixel:

    * I < a        -> 0
    * I >= b       -> k
    * a <= I < b   -> (I - a) / d * k

    A constant image maps to a constant k/2. Output is float64 in [0, 1].
    """
    arr = check_gray(img)
    g = gaussian_blur(arr, params.sigma)
    a, b = suace_bounds(g, params.d)
    stretched = (arr - a) / params.d * params.k
    out = np.where(arr < a, 0.0, np.where(arr >= b, params.k, stretched))
    return np.clip(out, 0.0, 1.0)


@dataclass(frozen=True)
class ClaheParams:
    """Tile grid (rows, cols) and clip fraction for CLAHE."""

    tiles: tuple[int, int] = (8, 8)
    clip_limit: float = 0.01

    def __post_init__(self) -> None:
        ty, tx = self.tiles
        if not (isinstance(ty, (int, np.integer)) and isinstance(tx, (int, np.integer))) or ty < 1 or tx < 1:
            raise ParameterError(f"tiles must be integers >= 1, got {self.tiles!r}")
        if not (np.isfinite(self.clip_limit) and 0.0 < self.clip_limit <= 1.0):
            raise ParameterError(f"clip_limit must lie in (0, 1], got {self.clip_limit!r}")


_BINS = 256


def clahe(img: np.ndarray, params: ClaheParams = ClaheParams()) -> np.ndarray:
    """Contrast-limited adaptive histogram equalization.

    Each tile's 256-bin histogram is clipped at clip_limit * (tile pixel
    count), the clipped excess is spread uniformly over all bins, and the
    tile's mapping is the resulting CDF. Pixels are remapped by bilinear
    interpolation between the four surrounding tile mappings, so tile
    seams stay invisible. clip_limit = 1 disables clipping and reduces a
    single-tile call to plain histogram equalization.
    """
    arr = check_gray(img)
    ty, tx = params.tiles
    h, w = arr.shape
    if h // ty < 2 or w // tx < 2:
        raise ParameterError(
            f"tile grid {params.tiles} leaves tiles smaller than 2x2 for a {h}x{w} image"
        )

    bins = np.minimum((arr * _BINS).astype(np.int64), _BINS - 1)
    y_edges = np.linspace(0, h, ty + 1).round().astype(int)
    x_edges = np.linspace(0, w, tx + 1).round().astype(int)

    maps = np.empty((ty, tx, _BINS), dtype=np.float64)
    centers_y = np.empty(ty)
    centers_x = np.empty(tx)
    for i in range(ty):
        y0, y1 = y_edges[i], y_edges[i + 1]
        centers_y[i] = (y0 + y1 - 1) / 2.0
        for j in range(tx):
            x0, x1 = x_edges[j], x_edges[j + 1]
            centers_x[j] = (x0 + x1 - 1) / 2.0
            tile = bins[y0:y1, x0:x1]
            n = tile.size
            hist = np.bincount(tile.ravel(), minlength=_BINS).astype(np.float64)
            limit = max(params.clip_limit * n, 1.0)
            excess = np.maximum(hist - limit, 0.0).sum()
            hist = np.minimum(hist, limit) + excess / _BINS
            maps[i, j] = np.cumsum(hist) / n

    # Bilinear blend between the four nearest tile mappings.
    yy = np.arange(h, dtype=np.float64)
    xx = np.arange(w, dtype=np.float64)
    i1 = np.clip(np.searchsorted(centers_y, yy), 0, ty - 1)
    i0 = np.clip(i1 - 1, 0, ty - 1)
    j1 = np.clip(np.searchsorted(centers_x, xx), 0, tx - 1)
    j0 = np.clip(j1 - 1, 0, tx - 1)

    span_y = centers_y[i1] - centers_y[i0]
    wy = np.where(span_y > 0, (yy - centers_y[i0]) / np.where(span_y > 0, span_y, 1.0), 0.0)
    wy = np.clip(wy, 0.0, 1.0)
    span_x = centers_x[j1] - centers_x[j0]
    wx = np.where(span_x > 0, (xx - centers_x[j0]) / np.where(span_x > 0, span_x, 1.0), 0.0)
    wx = np.clip(wx, 0.0, 1.0)

    i0g = i0[:, None]
    i1g = i1[:, None]
    j0g = j0[None, :]
    j1g = j1[None, :]
    m00 = maps[i0g, j0g, bins]
    m01 = maps[i0g, j1g, bins]
    m10 = maps[i1g, j0g, bins]
    m11 = maps[i1g, j1g, bins]

    wyg = wy[:, None]
    wxg = wx[None, :]
    out = (
        (1.0 - wyg) * (1.0 - wxg) * m00
        + (1.0 - wyg) * wxg * m01
        + wyg * (1.0 - wxg) * m10
        + wyg * wxg * m11
    )
    return np.clip(out, 0.0, 1.0)


@dataclass(frozen=True)
class LocalNormParams:
    """Scales for the local mean/std estimates and the output gain."""

    sigma_mean: float = 15.0
    sigma_std: float = 15.0
    out_gain: float = 0.2
    eps: float = 1e-6

    def __post_init__(self) -> None:
        for name in ("sigma_mean", "sigma_std"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0.0):
                raise ParameterError(f"{name} must be positive, got {v!r}")
        if not (np.isfinite(self.out_gain) and self.out_gain > 0.0):
            raise ParameterError(f"out_gain must be positive, got {self.out_gain!r}")
        if not (np.isfinite(self.eps) and self.eps > 0.0):
            raise ParameterError(f"eps must be positive, got {self.eps!r}")


def local_normalize(img: np.ndarray, params: LocalNormParams = LocalNormParams()) -> np.ndarray:
    """Zero the local mean, divide by local std, remap around mid gray.

    n = (I - mu) / (std + eps) with Gaussian local estimates; output is
    clamp(0.5 + n * out_gain, 0, 1). A constant image maps to 0.5.
    """
    arr = check_gray(img)
    mu = gaussian_blur(arr, params.sigma_mean)
    dev = arr - mu
    # dev*dev lies in [0, 1], so the shared blur applies as-is.
    var = gaussian_blur(dev * dev, params.sigma_std)
    n = dev / (np.sqrt(var) + params.eps)
    return np.clip(0.5 + n * params.out_gain, 0.0, 1.0)


@dataclass(frozen=True)
class UnsharpParams:
    """Box-blur radius and overshoot amount for luminance unsharp masking."""

    radius: int = 9
    amount: float = 1.5

    def __post_init__(self) -> None:
        if not isinstance(self.radius, (int, np.integer)) or self.radius < 1:
            raise ParameterError(f"radius must be an integer >= 1, got {self.radius!r}")
        if not (np.isfinite(self.amount) and self.amount >= 0.0):
            raise ParameterError(f"amount must be >= 0, got {self.amount!r}")


def unsharp_mask(img: np.ndarray, params: UnsharpParams = UnsharpParams()) -> np.ndarray:
    """Sharpen by adding back the detail layer: clamp(I + amount * (I - blur))."""
    arr = check_gray(img)
    blur = average_blur(arr, params.radius)
    return np.clip(arr + params.amount * (arr - blur), 0.0, 1.0)


METHODS = ("suace", "clahe", "ln", "lum")

_PARAM_TYPES = {
    "suace": SuaceParams,
    "clahe": ClaheParams,
    "ln": LocalNormParams,
    "lum": UnsharpParams,
}


@dataclass(frozen=True)
class EnhancerChoice:
    """A method name from METHODS paired with that method's parameter record."""

    method: str = "suace"
    params: SuaceParams | ClaheParams | LocalNormParams | UnsharpParams = field(
        default_factory=SuaceParams
    )

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ParameterError(f"unknown method {self.method!r}; expected one of {METHODS}")
        expected = _PARAM_TYPES[self.method]
        if not isinstance(self.params, expected):
            raise ParameterError(
                f"method {self.method!r} needs {expected.__name__}, got {type(self.params).__name__}"
            )


def default_choice(method: str) -> EnhancerChoice:
    """EnhancerChoice with the method's default parameters."""
    if method not in METHODS:
        raise ParameterError(f"unknown method {method!r}; expected one of {METHODS}")
    return EnhancerChoice(method=method, params=_PARAM_TYPES[method]())


def apply_enhancer(img: np.ndarray, choice: EnhancerChoice) -> np.ndarray:
    """Dispatch to the enhancer selected by ``choice``."""
    if choice.method == "suace":
        return suace(img, choice.params)
    if choice.method == "clahe":
        return clahe(img, choice.params)
    if choice.method == "ln":
        return local_normalize(img, choice.params)
    return unsharp_mask(img, choice.params)
