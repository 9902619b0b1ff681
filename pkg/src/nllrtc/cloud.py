"""
Cloud detection for one acquisition of a stack and synthetic degradation
masks (clouds, diagonal stripes, random vertical stripes).

Detection has two stages. :func:`threshold_detect` raises a brightness
threshold step by step and keeps the cloud set that maximizes the
correlation between the target image and the mean of the other acquisitions
over the clear pixels. :func:`knn_refine` then clears flagged pixels whose
neighbourhood is mostly clear, which removes bright isolated objects.
"""
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DetectionUndefinedError, ShapeError


@dataclass(frozen=True)
class DetectConfig:
    """Detection parameters.

    ``step`` of ``None`` picks 1 for data above 1 and 1/255 otherwise.
    The correlation counts as undefined while fewer than
    ``min_clear_fraction`` of the valid pixels are clear: on a handful of
    dark pixels it sits near +-1 and would end the scan at once. The scan
    stops once the correlation falls more than ``drop_tolerance`` below the
    best value seen so far (0 stops at the first strict decrease); the best
    threshold is returned either way.
    """

    step: float = None
    refine_radius: int = 3
    majority: float = 0.5
    min_clear_fraction: float = 0.01
    drop_tolerance: float = 0.05

    def __post_init__(self):
        if self.step is not None and self.step <= 0:
            raise ValueError("step must be positive")
        if self.refine_radius < 1:
            raise ValueError("refine_radius must be at least 1")
        if not 0 <= self.min_clear_fraction < 1:
            raise ValueError("min_clear_fraction must lie in [0, 1)")
        if self.drop_tolerance < 0:
            raise ValueError("drop_tolerance must be nonnegative")

    def step_for(self, value_range):
        if self.step is not None:
            return float(self.step)
        return 1.0 if value_range > 1 else 1.0 / 255.0


def correlation(x, y):
    """Pearson correlation of two vectors, ``None`` when either is constant."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size < 2:
        return None
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = dx @ dx
    syy = dy @ dy
    if sxx == 0 or syy == 0:
        return None
    return float((dx @ dy) / (np.sqrt(sxx) * np.sqrt(syy)))


def threshold_scan(stack, time, cfg=None):
    """Replay the threshold scan.

    Returns a list of ``(threshold, correlation)`` pairs in scan order; the
    correlation is ``None`` where it is undefined.
    """
    return _scan(stack, time, cfg or DetectConfig())[0]


def _scan(stack, time, cfg):
    values = stack.values
    m, n, b, t = values.shape
    if t < 2:
        raise ShapeError("cloud detection needs at least one reference acquisition")
    if not 0 <= time < t:
        raise ShapeError(f"time index {time} out of range for {t} acquisitions")
    target = values[:, :, :, time]
    reference = np.delete(values, time, axis=3).mean(axis=3)
    brightness = target.max(axis=2)
    valid = brightness > 0
    step = cfg.step_for(stack.value_range)
    top = brightness[valid].max() if valid.any() else 0.0
    min_clear = cfg.min_clear_fraction * valid.sum()

    path = []
    best = None
    gamma = 0.0
    steps = 0
    while True:
        steps += 1
        gamma = steps * step
        clear = valid & (brightness <= gamma)
        f = correlation(target[clear], reference[clear]) if clear.sum() >= min_clear else None
        path.append((gamma, f))
        if f is not None:
            if best is not None and f < best[1] - cfg.drop_tolerance - 1e-12 * abs(best[1]):
                break
            # ties move the threshold up
            if best is None or f >= best[1] - 1e-12 * abs(best[1]):
                best = (gamma, f)
        if gamma >= top:
            break
    if best is None:
        raise DetectionUndefinedError("correlation is undefined for every threshold")
    return path, best, valid, brightness


def threshold_detect(stack, time, cfg=None):
    """First-stage cloud mask for acquisition `time`.

    Returns an observation mask shaped like the stack: 0 where the target
    acquisition is flagged (all bands), 1 elsewhere.
    """
    _, (gamma, _), valid, brightness = _scan(stack, time, cfg or DetectConfig())
    clear = valid & (brightness <= gamma)
    mask = np.ones(stack.shape, dtype=np.uint8)
    mask[:, :, :, time] = clear[:, :, None]
    return mask


def knn_refine(mask, time, cfg=None):
    """Clear flagged pixels whose neighbourhood is mostly clear.

    For each flagged pixel the fraction of flagged pixels in the square of
    Chebyshev radius ``refine_radius`` around it (clipped at the borders) is
    computed on the input mask; below ``majority`` the pixel is unflagged.
    """
    cfg = cfg or DetectConfig()
    mask = np.asarray(mask).astype(np.uint8)
    cloud = mask[:, :, 0, time] == 0
    r = cfg.refine_radius
    padded = np.pad(cloud.astype(np.int64), r)
    ones = np.pad(np.ones_like(cloud, dtype=np.int64), r)
    flagged = _box_sum(padded, r)
    total = _box_sum(ones, r)
    keep = cloud & (flagged >= cfg.majority * total)
    out = mask.copy()
    out[:, :, :, time] = (~keep)[:, :, None]
    return out


def _box_sum(padded, r):
    c = np.cumsum(np.cumsum(padded, axis=0), axis=1)
    c = np.pad(c, ((1, 0), (1, 0)))
    k = 2 * r + 1
    return c[k:, k:] - c[:-k, k:] - c[k:, :-k] + c[:-k, :-k]


def detect_clouds(stack, time, cfg=None):
    """Thresholding followed by neighbourhood refinement."""
    cfg = cfg or DetectConfig()
    return knn_refine(threshold_detect(stack, time, cfg), time, cfg)


@dataclass
class DegradationSpec:
    """Description of a synthetic degradation of one acquisition.

    kind : "cloud", "diagonal-stripes" or "vertical-stripes"
    ellipses : list of (center_row, center_col, radius_row, radius_col)
    polygons : list of vertex lists [(row, col), ...]
    period, width : stripe period and width in pixels
    angle : diagonal stripe angle in degrees from the vertical
    count : number of random vertical stripes
    """

    kind: str
    time: int = 0
    ellipses: list = field(default_factory=list)
    polygons: list = field(default_factory=list)
    period: int = 10
    width: int = 2
    angle: float = 45.0
    count: int = 8
    seed: int = 0

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["ellipses"] = [tuple(e) for e in data.get("ellipses", [])]
        data["polygons"] = [[tuple(v) for v in p] for p in data.get("polygons", [])]
        return cls(**data)


def _in_polygon(rows, cols, vertices):
    # even-odd rule on pixel centres
    inside = np.zeros(rows.shape, dtype=bool)
    vr = np.array([v[0] for v in vertices], dtype=float)
    vc = np.array([v[1] for v in vertices], dtype=float)
    for k in range(len(vertices)):
        r1, c1, r2, c2 = vr[k - 1], vc[k - 1], vr[k], vc[k]
        crosses = (r1 > rows) != (r2 > rows)
        with np.errstate(divide="ignore", invalid="ignore"):
            at = c1 + (rows - r1) * (c2 - c1) / (r2 - r1)
        inside ^= crosses & (cols < at)
    return inside


def degradation_region(height, width, spec):
    """Boolean ``(height, width)`` array of pixels removed by `spec`."""
    rows, cols = np.mgrid[0:height, 0:width]
    if spec.kind == "cloud":
        region = np.zeros((height, width), dtype=bool)
        for cr, cc, rr, rc in spec.ellipses:
            region |= ((rows - cr) / rr) ** 2 + ((cols - cc) / rc) ** 2 <= 1.0
        for vertices in spec.polygons:
            region |= _in_polygon(rows, cols, vertices)
    elif spec.kind == "diagonal-stripes":
        if spec.width < 1 or spec.period <= spec.width:
            raise ValueError("stripes need 1 <= width < period")
        shift = np.rint(rows * np.tan(np.deg2rad(spec.angle))).astype(np.int64)
        region = (cols + shift) % spec.period < spec.width
    elif spec.kind == "vertical-stripes":
        if spec.count < 1 or spec.width < 1:
            raise ValueError("vertical stripes need count >= 1 and width >= 1")
        rng = np.random.default_rng(spec.seed)
        starts = rng.choice(max(width - spec.width + 1, 1), size=min(spec.count, width), replace=False)
        region = np.zeros((height, width), dtype=bool)
        for s in starts:
            region[:, s:s + spec.width] = True
    else:
        raise ValueError(f"unknown degradation kind {spec.kind!r}")
    return region


def simulate_degradation(shape, spec):
    """Band-consistent mask removing `spec`'s region at acquisition ``spec.time``.

    `shape` is the ``(m, n, b, t)`` stack shape (an :class:`ImageStack` is
    accepted too).
    """
    shape = tuple(getattr(shape, "shape", shape))
    m, n, b, t = shape
    if not 0 <= spec.time < t:
        raise ShapeError(f"time index {spec.time} out of range for {t} acquisitions")
    region = degradation_region(m, n, spec)
    if not region.any():
        raise ValueError("degradation geometry covers no pixel")
    mask = np.ones(shape, dtype=np.uint8)
    mask[:, :, :, spec.time] = (~region)[:, :, None]
    return mask
