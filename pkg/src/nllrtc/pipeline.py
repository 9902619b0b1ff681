"""
Non-local low-rank tensor completion of a multitemporal stack.

The stack is rearranged into the working tensor, then missing pixels are
visited in row-major order. Each visit anchors a target patch on the pixel,
gathers similar patches around it, completes the stacked group with
:func:`~nllrtc.solver.admm_complete` and writes the recovered entries back,
after which they count as observed for later searches.
"""
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateGroupError, ShapeError, UncompletedRegionError
from .rearrange import ImageStack, check_mask, from_working, rearrange_forward
from .similarity import PatchRef, SearchConfig, group_patches, search_similar
from .solver import SolverConfig, admm_complete, halrtc_complete

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    """Search and solver settings for :func:`inpaint`.

    With ``normalize`` set, data are divided by the stack's value range
    before solving, so solver parameters always refer to ``[0, 1]`` data.
    ``fallback`` is ``"halrtc"`` (complete leftovers with the nuclear-norm
    baseline on their bounding box) or ``"raise"``.
    """

    search: SearchConfig = field(default_factory=SearchConfig)
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(beta=0.3, epsilon=1e-2))
    normalize: bool = True
    fallback: str = "halrtc"
    fallback_margin: int = 8

    def __post_init__(self):
        if self.fallback not in ("halrtc", "raise"):
            raise ValueError(f"unknown fallback policy {self.fallback!r}")


@dataclass
class PipelineReport:
    groups: int = 0
    solver_iterations: int = 0
    missing_before: int = 0
    missing_after: int = 0
    deferred_targets: int = 0
    second_pass_groups: int = 0
    fallback_entries: int = 0
    wall_time: float = 0.0

    def as_dict(self, include_time=False):
        out = {
            "groups": self.groups,
            "solver_iterations": self.solver_iterations,
            "missing_before": self.missing_before,
            "missing_after": self.missing_after,
            "deferred_targets": self.deferred_targets,
            "second_pass_groups": self.second_pass_groups,
            "fallback_entries": self.fallback_entries,
        }
        if include_time:
            out["wall_time"] = self.wall_time
        return out


def target_anchor(row, col, shape, width, times):
    """Aligned in-bounds anchor of the patch that covers pixel ``(row, col)``."""
    r0 = min(row, shape[0] - width)
    c0 = min(col - col % times, shape[1] - width)
    return PatchRef(int(r0), int(c0), width)


def inpaint(stack, mask, cfg=None, progress=None):
    """Reconstruct the missing entries of `stack`.

    Parameters
    ----------
    stack : ImageStack
    mask : ndarray
        Observation mask of the same shape as ``stack.values``.
    cfg : PipelineConfig, optional
    progress : callable, optional
        Called after every group as ``progress(report, remaining)`` with the
        number of still-missing entries of the working tensor.

    Returns
    -------
    ImageStack
        Completed stack, identical to the input on every observed entry.
    PipelineReport
    """
    cfg = cfg or PipelineConfig()
    started = time.perf_counter()
    mask = check_mask(mask, stack.shape)
    if not mask.any():
        raise ShapeError("the mask has no observed entry")
    m, n, b, t = stack.shape
    w = cfg.search.patch_width
    cfg.search.validate_for(t)
    if w > m or w > n * t:
        raise ShapeError(f"patch width {w} does not fit a {m} x {n * t} working tensor")

    report = PipelineReport(missing_before=int((mask == 0).sum()))
    working = rearrange_forward(stack, mask)
    scale = stack.value_range if cfg.normalize else 1.0
    working.values = working.values / scale
    working.mask = working.mask.copy()
    pixel_missing = (working.mask == 0).any(axis=2)

    second_pass = False
    deferred = np.zeros_like(pixel_missing)
    failed = set()
    while True:
        candidates = pixel_missing & ~deferred
        if not candidates.any():
            if deferred.any() and not second_pass:
                second_pass = True
                deferred[:] = False
                failed.clear()
                continue
            break
        row, col = np.unravel_index(np.argmax(candidates), candidates.shape)
        target = target_anchor(row, col, pixel_missing.shape, w, t)
        if (target.row, target.col) in failed:
            deferred[row, col] = True
            continue
        try:
            refs = search_similar(working, target, cfg.search)
        except DegenerateGroupError:
            failed.add((target.row, target.col))
            deferred[row, col] = True
            report.deferred_targets += 1
            continue

        group = group_patches(working, refs)
        completed, trace = admm_complete(group.values, group.mask, cfg.solver)
        for p, ref in enumerate(group.members):
            rows = slice(ref.row, ref.row + w)
            cols = slice(ref.col, ref.col + w)
            hole = working.mask[rows, cols] == 0
            working.values[rows, cols][hole] = completed[..., p][hole]
            working.mask[rows, cols][hole] = 1
            pixel_missing[rows, cols] = (working.mask[rows, cols] == 0).any(axis=2)
        report.groups += 1
        report.second_pass_groups += int(second_pass)
        report.solver_iterations += trace.iterations
        if progress is not None:
            progress(report, int((working.mask == 0).sum()))

    values = from_working(working.values, stack.shape)
    current = from_working(working.mask, stack.shape)
    if not current.all():
        report.fallback_entries = int((current == 0).sum())
        if cfg.fallback == "raise":
            coords = np.argwhere(current == 0)
            raise UncompletedRegionError(
                f"{len(coords)} entries remain missing", [tuple(map(int, c)) for c in coords]
            )
        log.warning("completing %d leftover entries with the nuclear-norm baseline",
                    report.fallback_entries)
        values, current = _fill_leftovers(values, current, cfg)

    restored = np.clip(values * scale, 0.0, stack.value_range)
    out = np.where(mask.astype(bool), stack.values, restored)
    report.missing_after = int((current == 0).sum())
    report.wall_time = time.perf_counter() - started
    return ImageStack(out, stack.value_range), report


def _fill_leftovers(values, current, cfg):
    rows, cols = np.nonzero((current == 0).any(axis=(2, 3)))
    margin = cfg.fallback_margin
    r0, r1 = max(rows.min() - margin, 0), min(rows.max() + margin + 1, values.shape[0])
    c0, c1 = max(cols.min() - margin, 0), min(cols.max() + margin + 1, values.shape[1])
    box = (slice(r0, r1), slice(c0, c1))
    filled, _ = halrtc_complete(values[box], current[box], cfg.solver)
    values = values.copy()
    values[box] = filled
    current = current.copy()
    current[box] = 1
    return values, current


def halrtc_inpaint(stack, mask, solver=None, normalize=True):
    """Baseline: complete the whole 4-order stack with nuclear-norm ADMM, no patches."""
    solver = solver or SolverConfig(beta=0.1, epsilon=1e-2)
    mask = check_mask(mask, stack.shape)
    scale = stack.value_range if normalize else 1.0
    filled, trace = halrtc_complete(stack.values / scale, mask, solver)
    restored = np.clip(filled * scale, 0.0, stack.value_range)
    out = np.where(mask.astype(bool), stack.values, restored)
    return ImageStack(out, stack.value_range), trace
