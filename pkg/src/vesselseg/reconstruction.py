"""Vessel reconstruction: despeckle, bridge broken segments, despeckle again.

Thresholding fragments thin vessels wherever contrast dips. The repair
runs in three steps:

1. drop connected components smaller than ``a1`` pixels (pure noise);
2. for every pair of skeleton endpoints that belong to different
   components and sit within Chebyshev distance ``h`` of each other, run a
   probabilistic Hough transform on the local window around the pair; if a
   detected line has more than ``v`` votes and passes within one pixel of
   both endpoints, draw a straight one-pixel bridge between them;
3. drop components smaller than ``a2`` pixels, which the bridged vessels
   now comfortably exceed.

Points are (x, y) = (column, row). All randomness comes from the seed
argument, so equal inputs and seeds give identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from skimage.morphology import skeletonize

from .errors import ParameterError
from .imagecore import check_mask

_EIGHT = np.ones((3, 3), dtype=bool)

_THETA_DEG = np.arange(180)
_COS = np.cos(np.deg2rad(_THETA_DEG))
_SIN = np.sin(np.deg2rad(_THETA_DEG))


@dataclass(frozen=True)
class ReconstructionParams:
    """Area/gap/vote thresholds for the three-step repair.

    a1 : minimum component area kept before bridging (pixels).
    h : endpoint pairing radius, Chebyshev distance (pixels).
    v : Hough vote count a bridge line must exceed.
    a2 : minimum component area kept after bridging (pixels).
    """

    a1: int = 10
    h: int = 5
    v: int = 3
    a2: int = 50

    def __post_init__(self) -> None:
        for name in ("a1", "h", "v", "a2"):
            val = getattr(self, name)
            if not isinstance(val, (int, np.integer)) or val < 1:
                raise ParameterError(f"{name} must be an integer >= 1, got {val!r}")
        if self.a2 <= self.a1:
            raise ParameterError(f"a2 ({self.a2}) must exceed a1 ({self.a1})")
        if self.h < 3:
            raise ParameterError(f"h must be >= 3, got {self.h}")


@dataclass(frozen=True)
class ComponentLabels:
    """8-connected labeling: 0 is background, components numbered from 1.

    Labels follow raster order of each component's first pixel, so the
    numbering is reproducible. ``areas`` maps label id to pixel count.
    """

    labels: np.ndarray
    areas: dict[int, int]

    @property
    def count(self) -> int:
        return len(self.areas)


def label_components(mask: np.ndarray) -> ComponentLabels:
    """Label 8-connected components deterministically."""
    m = check_mask(mask)
    raw, n = ndimage.label(m, structure=_EIGHT)
    if n == 0:
        return ComponentLabels(labels=raw.astype(np.int32), areas={})

    flat = raw.ravel()
    first = np.full(n + 1, flat.size, dtype=np.int64)
    np.minimum.at(first, flat, np.arange(flat.size, dtype=np.int64))
    order = np.argsort(first[1:], kind="stable")  # old label-1 indices by first pixel
    remap = np.zeros(n + 1, dtype=np.int32)
    remap[order + 1] = np.arange(1, n + 1, dtype=np.int32)
    labels = remap[raw]
    counts = np.bincount(labels.ravel(), minlength=n + 1)
    areas = {int(i): int(counts[i]) for i in range(1, n + 1)}
    return ComponentLabels(labels=labels, areas=areas)


def filter_small(mask: np.ndarray, min_area: int) -> np.ndarray:
    """Remove 8-connected components with area strictly below ``min_area``."""
    if not isinstance(min_area, (int, np.integer)) or min_area < 1:
        raise ParameterError(f"min_area must be an integer >= 1, got {min_area!r}")
    comps = label_components(mask)
    if comps.count == 0:
        return check_mask(mask).copy()
    keep = np.zeros(comps.count + 1, dtype=bool)
    for label_id, area in comps.areas.items():
        keep[label_id] = area >= min_area
    return keep[comps.labels]


@dataclass(frozen=True)
class LineSegment:
    """Detected line segment with its accumulator support.

    p0, p1 : (x, y) integer endpoints, p0 != p1.
    votes : accumulator count of the detecting (theta, rho) cell.
    """

    p0: tuple[int, int]
    p1: tuple[int, int]
    votes: int

    @property
    def angle_degrees(self) -> float:
        """Direction in [0, 180): 0 is horizontal, 90 vertical."""
        dx = self.p1[0] - self.p0[0]
        dy = self.p1[1] - self.p0[1]
        return math.degrees(math.atan2(dy, dx)) % 180.0

    @property
    def length(self) -> float:
        return math.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1])


def _walk_line(alive: np.ndarray, x0: int, y0: int, theta_idx: int, max_gap: int) -> list[tuple[int, int]]:
    """Collect foreground pixels along the line through (x0, y0).

    Steps away from the seed in both directions along the line whose
    normal angle is theta_idx degrees, tolerating up to ``max_gap``
    consecutive misses, and returns the ordered run of hits.
    """
    h, w = alive.shape
    # Line direction is perpendicular to the normal (cos t, sin t).
    dx = -_SIN[theta_idx]
    dy = _COS[theta_idx]
    run: list[tuple[int, int]] = [(x0, y0)]

    for sign in (1.0, -1.0):
        sx, sy = sign * dx, sign * dy
        gap = 0
        step = 1
        tail: list[tuple[int, int]] = []
        pending: list[tuple[int, int]] = []
        while True:
            if abs(sx) >= abs(sy):
                x = x0 + step * (1 if sx > 0 else -1)
                y = int(round(y0 + (x - x0) * sy / sx)) if sx != 0 else y0
            else:
                y = y0 + step * (1 if sy > 0 else -1)
                x = int(round(x0 + (y - y0) * sx / sy)) if sy != 0 else x0
            if x < 0 or x >= w or y < 0 or y >= h:
                break
            if alive[y, x]:
                tail.extend(pending)
                pending = []
                tail.append((x, y))
                gap = 0
            else:
                gap += 1
                if gap > max_gap:
                    break
                pending.append((x, y))
            step += 1
        if sign > 0:
            run.extend(tail)
        else:
            run = list(reversed(tail)) + run
    return run


# Rho rows for all pixels are precomputed as one matrix when the pixel
# count stays below this bound; larger rasters compute rows on the fly.
_PRECOMPUTE_LIMIT = 4_000_000


def _hough_progress(m: np.ndarray, vote_threshold: int, min_len: float, max_gap: int, rng):
    """Core progressive Hough loop; yields segments as they are found."""
    ys, xs = np.nonzero(m)
    if xs.size == 0:
        return

    h, w = m.shape
    diag = int(math.ceil(math.hypot(h - 1, w - 1)))
    n_theta = _THETA_DEG.size
    theta_range = np.arange(n_theta)

    order = rng.permutation(xs.size)

    precompute = xs.size * n_theta <= _PRECOMPUTE_LIMIT
    if precompute:
        rows = np.rint(xs[:, None] * _COS + ys[:, None] * _SIN).astype(np.int64) + diag
        row_of = np.full((h, w), -1, dtype=np.int64)
        row_of[ys, xs] = np.arange(xs.size)

    def rho_bins(x: int, y: int) -> np.ndarray:
        if precompute:
            return rows[row_of[y, x]]
        return np.rint(x * _COS + y * _SIN).astype(np.int64) + diag

    alive = m.copy()
    voted = np.zeros_like(m)
    acc = np.zeros((n_theta, 2 * diag + 1), dtype=np.int32)

    for idx in order:
        x, y = int(xs[idx]), int(ys[idx])
        if not alive[y, x]:
            continue
        bins = rows[idx] if precompute else rho_bins(x, y)
        acc[theta_range, bins] += 1
        voted[y, x] = True

        cell_votes = acc[theta_range, bins]
        peak = int(cell_votes.max())
        if peak < vote_threshold:
            continue

        # Several bins tie at the peak when the sampled pixels are close
        # together (neighboring angles round to the same rho); walk each
        # candidate and keep the longest run so the true direction wins.
        run: list[tuple[int, int]] = []
        for theta_idx in np.flatnonzero(cell_votes == peak):
            candidate = _walk_line(alive, x, y, int(theta_idx), max_gap)
            if len(candidate) > len(run):
                run = candidate
        for px, py in run:
            alive[py, px] = False
            if voted[py, px]:
                acc[theta_range, rho_bins(px, py)] -= 1
                voted[py, px] = False

        p0, p1 = run[0], run[-1]
        if math.hypot(p1[0] - p0[0], p1[1] - p0[1]) >= min_len:
            yield LineSegment(p0=p0, p1=p1, votes=peak)


def probabilistic_hough(
    mask: np.ndarray,
    vote_threshold: int,
    min_len: float,
    max_gap: int,
    seed=0,
) -> list[LineSegment]:
    """Progressive probabilistic Hough line detection.

    Foreground pixels vote one at a time, in an order shuffled by the
    seeded generator, into a (theta, rho) accumulator quantized at 1
    degree and 1 pixel. As soon as a visited cell reaches
    ``vote_threshold``, the supporting line is traced through the image
    with gaps up to ``max_gap``; its pixels are consumed (removed from the
    working raster, their votes withdrawn) and the run is emitted as a
    segment when at least ``min_len`` long. Fixed seeds give identical
    results; gap pixels are never claimed, only skipped over.
    """
    m = check_mask(mask)
    if not isinstance(vote_threshold, (int, np.integer)) or vote_threshold < 1:
        raise ParameterError(f"vote_threshold must be an integer >= 1, got {vote_threshold!r}")
    if not (np.isfinite(min_len) and min_len >= 1):
        raise ParameterError(f"min_len must be >= 1, got {min_len!r}")
    if not isinstance(max_gap, (int, np.integer)) or max_gap < 0:
        raise ParameterError(f"max_gap must be an integer >= 0, got {max_gap!r}")

    rng = np.random.default_rng(seed)
    return list(_hough_progress(m, vote_threshold, min_len, max_gap, rng))


def find_endpoints(mask: np.ndarray) -> list[tuple[int, int]]:
    """Free ends of the mask's skeleton: pixels with exactly one neighbor.

    The mask is thinned to a one-pixel skeleton first, so ribbon-shaped
    components still yield a single endpoint per tip. Returned in raster
    order as (x, y) tuples.
    """
    m = check_mask(mask)
    skel = skeletonize(m)
    kernel = np.ones((3, 3), dtype=np.uint8)
    kernel[1, 1] = 0
    neighbors = ndimage.convolve(skel.astype(np.uint8), kernel, mode="constant", cval=0)
    ys, xs = np.nonzero(skel & (neighbors == 1))
    return [(int(x), int(y)) for x, y in zip(xs, ys)]


def _point_line_distance(p: tuple[int, int], a: tuple[int, int], b: tuple[int, int]) -> float:
    """Perpendicular distance from p to the infinite line through a, b."""
    ax, ay = a
    bx, by = b
    px, py = p
    length = math.hypot(bx - ax, by - ay)
    if length == 0.0:
        return math.hypot(px - ax, py - ay)
    return abs((bx - ax) * (ay - py) - (ax - px) * (by - ay)) / length


def _draw_line(mask: np.ndarray, p0: tuple[int, int], p1: tuple[int, int]) -> None:
    """Set the discrete one-pixel line from p0 to p1 (inclusive), in place."""
    x0, y0 = p0
    x1, y1 = p1
    dx = abs(x1 - x0)
    dy = abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx - dy
    x, y = x0, y0
    while True:
        mask[y, x] = True
        if x == x1 and y == y1:
            break
        e2 = 2 * err
        if e2 > -dy:
            err -= dy
            x += sx
        if e2 < dx:
            err += dx
            y += sy


def _find_root(parent: list[int], a: int) -> int:
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


def bridge_gaps(mask: np.ndarray, params: ReconstructionParams = ReconstructionParams(), seed=0) -> np.ndarray:
    """Join nearby endpoints of different components along Hough evidence.

    Every unordered endpoint pair from different components with Chebyshev
    distance <= h is examined in lexicographic order; pairs whose
    components an earlier bridge already joined are skipped. The Hough
    transform runs on the pair's bounding box dilated by h; a bridge is
    drawn only when some detected line has votes > v and passes within
    one pixel of both endpoints. The output is always a superset of the
    input.
    """
    m = check_mask(mask)
    base_seed = _seed_to_int(seed)
    comps = label_components(m)
    endpoints = find_endpoints(m)
    out = m.copy()
    if len(endpoints) < 2:
        return out

    h_img, w_img = m.shape
    labeled = [(x, y, int(comps.labels[y, x])) for x, y in endpoints]

    pairs = []
    for i in range(len(labeled)):
        x1, y1, c1 = labeled[i]
        for j in range(i + 1, len(labeled)):
            x2, y2, c2 = labeled[j]
            if c1 == c2:
                continue
            cheb = max(abs(x1 - x2), abs(y1 - y2))
            if cheb <= params.h:
                pairs.append(((x1, y1), (x2, y2), c1, c2, cheb))
    pairs.sort(key=lambda p: (p[0][1], p[0][0], p[1][1], p[1][0]))

    parent = list(range(comps.count + 1))

    for pair_idx, (e1, e2, c1, c2, cheb) in enumerate(pairs):
        if _find_root(parent, c1) == _find_root(parent, c2):
            continue
        x_lo = max(min(e1[0], e2[0]) - params.h, 0)
        x_hi = min(max(e1[0], e2[0]) + params.h, w_img - 1)
        y_lo = max(min(e1[1], e2[1]) - params.h, 0)
        y_hi = min(max(e1[1], e2[1]) + params.h, h_img - 1)
        window = m[y_lo : y_hi + 1, x_lo : x_hi + 1]

        rng = np.random.default_rng(np.random.SeedSequence([base_seed, pair_idx]))
        e1_local = (e1[0] - x_lo, e1[1] - y_lo)
        e2_local = (e2[0] - x_lo, e2[1] - y_lo)
        for seg in _hough_progress(window, params.v + 1, 2.0, max(cheb, 1), rng):
            if seg.votes <= params.v:
                continue
            if (
                _point_line_distance(e1_local, seg.p0, seg.p1) <= 1.0
                and _point_line_distance(e2_local, seg.p0, seg.p1) <= 1.0
            ):
                _draw_line(out, e1, e2)
                parent[_find_root(parent, c1)] = _find_root(parent, c2)
                break
    return out


def _seed_to_int(seed) -> int:
    if isinstance(seed, (int, np.integer)):
        return int(seed)
    raise ParameterError(f"seed must be an integer, got {type(seed).__name__}")


def reconstruct(mask: np.ndarray, params: ReconstructionParams = ReconstructionParams(), seed=0) -> np.ndarray:
    """Three-step repair: filter below a1, bridge gaps, filter below a2."""
    step1 = filter_small(mask, params.a1)
    step2 = bridge_gaps(step1, params, seed=seed)
    return filter_small(step2, params.a2)
