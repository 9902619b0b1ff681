"""
Image quality metrics.

Full-reference: PSNR and a global (single window) SSIM. No-reference:
metric Q from the singular values of the image gradient matrix and the
average gradient (AG). Stack-level reports average the per-band values.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ShapeError

FIELDS = ("psnr", "ssim", "q", "ag")


def _pair(x, ref):
    x = np.asarray(x, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if x.shape != ref.shape:
        raise ShapeError(f"image shapes differ: {x.shape} vs {ref.shape}")
    return x, ref


def psnr(x, ref, max_val):
    """Peak signal-to-noise ratio in dB; ``inf`` for identical inputs."""
    x, ref = _pair(x, ref)
    err = np.sum((ref - x) ** 2)
    if err == 0:
        return math.inf
    return float(10.0 * np.log10(x.size * max_val**2 / err))


def ssim(x, ref, max_val):
    """Structural similarity computed once over the whole image.

    Uses population statistics and the constants ``c1 = (0.01 L)^2``,
    ``c2 = (0.03 L)^2`` with ``L = max_val``.
    """
    x, ref = _pair(x, ref)
    c1 = (0.01 * max_val) ** 2
    c2 = (0.03 * max_val) ** 2
    mx, mr = x.mean(), ref.mean()
    dx, dr = x - mx, ref - mr
    vx, vr = np.mean(dx * dx), np.mean(dr * dr)
    cov = np.mean(dx * dr)
    return float((2 * mx * mr + c1) * (2 * cov + c2) / ((mx**2 + mr**2 + c1) * (vx + vr + c2)))


def _differences(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or min(x.shape) < 2:
        raise ShapeError(f"need a 2-D image of at least 2 x 2, got shape {x.shape}")
    d1 = x[1:, :-1] - x[:-1, :-1]
    d2 = x[:-1, 1:] - x[:-1, :-1]
    return d1, d2


def gradient_matrix(x):
    """``(N, 2)`` matrix of forward differences ``(row, column)`` per pixel."""
    d1, d2 = _differences(x)
    return np.column_stack([d1.ravel(), d2.ravel()])


def metric_q(x):
    s = np.linalg.svd(gradient_matrix(x), compute_uv=False)
    # a single gradient row has one singular value; the second one is zero
    s1, s2 = s[0], (s[1] if s.size > 1 else 0.0)
    if s1 + s2 == 0:
        return 0.0
    return float(s1 * (s1 - s2) / (s1 + s2))


def avg_gradient(x):
    d1, d2 = _differences(x)
    return float(np.mean(np.sqrt((d1**2 + d2**2) / 2.0)))


@dataclass
class QualityReport:
    """Per-band metrics of one acquisition and their band averages.

    With ``restricted`` set, PSNR and SSIM were computed on the missing
    entries only; Q and AG always use the whole band image.
    """

    per_band: list
    average: dict = field(default_factory=dict)
    restricted: bool = False
    time: int = 0

    def __post_init__(self):
        if not self.average:
            self.average = {k: _mean([b[k] for b in self.per_band]) for k in FIELDS}

    def to_text(self):
        lines = [f"time = {self.time}", f"restricted = {str(self.restricted).lower()}"]
        for k in FIELDS:
            lines.append(f"{k} = {_fmt(self.average[k])}")
        for i, band in enumerate(self.per_band):
            for k in FIELDS:
                lines.append(f"band{i + 1}.{k} = {_fmt(band[k])}")
        return "\n".join(lines) + "\n"


def _mean(values):
    if any(math.isinf(v) for v in values):
        return math.inf
    return float(np.mean(values))


def _fmt(value):
    return "inf" if math.isinf(value) else repr(float(value))


def quality_report(x, ref, max_val, time=0, mask=None):
    """Metrics of acquisition `time` of stack `x` against stack `ref`.

    Parameters
    ----------
    x, ref : ndarray
        Stacks of shape ``(m, n, b, t)``.
    max_val : float
        Peak value used by PSNR and SSIM.
    mask : ndarray, optional
        Observation mask; when given, PSNR and SSIM only look at entries
        where it is 0.
    """
    x, ref = _pair(x, ref)
    if x.ndim != 4:
        raise ShapeError("quality reports need (m, n, b, t) stacks")
    hole = None
    if mask is not None:
        mask = np.asarray(mask)
        if mask.shape != x.shape:
            raise ShapeError(f"mask shape {mask.shape} differs from {x.shape}")
        hole = mask[:, :, :, time] == 0
    bands = []
    for k in range(x.shape[2]):
        xb, rb = x[:, :, k, time], ref[:, :, k, time]
        if hole is not None and hole[:, :, k].any():
            sel = hole[:, :, k]
            full = (psnr(xb[sel], rb[sel], max_val), ssim(xb[sel], rb[sel], max_val))
        elif hole is not None:
            full = (math.inf, 1.0)
        else:
            full = (psnr(xb, rb, max_val), ssim(xb, rb, max_val))
        bands.append({"psnr": full[0], "ssim": full[1], "q": metric_q(xb), "ag": avg_gradient(xb)})
    return QualityReport(per_band=bands, restricted=hole is not None, time=time)


def missing_psnr(x, ref, mask, max_val):
    """PSNR over every missing entry of a stack at once."""
    x, ref = _pair(x, ref)
    sel = np.asarray(mask) == 0
    return psnr(x[sel], ref[sel], max_val)


def scatter_data(x, ref, mask):
    """``(k, 2)`` array of (original, reconstructed) values at missing entries.

    Rows follow C order over ``(i, j, k, l)``.
    """
    x, ref = _pair(x, ref)
    mask = np.asarray(mask)
    if mask.shape != x.shape:
        raise ShapeError(f"mask shape {mask.shape} differs from {x.shape}")
    sel = mask == 0
    return np.column_stack([ref[sel], x[sel]])
