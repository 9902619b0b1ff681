"""
Non-local similar patch search on the working tensor.

Patches are ``w x w x b`` blocks ``W[i:i+w, v:v+w, :]`` anchored at their
top-left corner. Column anchors are restricted to multiples of the number of
times ``t`` so a patch always spans whole temporal blocks. Similarity is the
normalized cross-correlation over entries observed in both patches.
"""
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import DegenerateGroupError, ShapeError


@dataclass(frozen=True)
class PatchRef:
    """Top-left anchor ``(row, col)`` of a ``width x width`` patch (0-based)."""

    row: int
    col: int
    width: int


@dataclass
class PatchGroup:
    """Similar patches stacked along a fourth axis.

    ``values[..., p]`` is the patch at ``members[p]``; the target patch sits
    at ``members[target_index]``.
    """

    values: np.ndarray
    mask: np.ndarray
    members: list
    target_index: int = 0

    @property
    def size(self):
        return len(self.members)


@dataclass(frozen=True)
class SearchConfig:
    """Parameters of the similar-patch search.

    ``step`` is the stride of candidate anchors in both directions; column
    candidates are further restricted to temporal block boundaries.
    """

    patch_width: int = 4
    radius: int = 100
    step: int = 2
    threshold: float = 0.91
    min_group: int = 10
    min_joint_fraction: float = 0.5

    def __post_init__(self):
        if self.patch_width < 1:
            raise ValueError("patch_width must be positive")
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        if self.step < 1:
            raise ValueError("step must be at least 1")
        if not 0 < self.threshold <= 1:
            raise ValueError("threshold must lie in (0, 1]")
        if self.min_group < 1:
            raise ValueError("min_group must be at least 1")
        if not 0 < self.min_joint_fraction <= 1:
            raise ValueError("min_joint_fraction must lie in (0, 1]")

    def validate_for(self, times):
        if self.patch_width % times:
            raise ValueError(
                f"patch width {self.patch_width} must be a multiple of the number of times {times}"
            )


def ncc(a, b, mask_a=None, mask_b=None, min_fraction=0.5):
    """Normalized cross-correlation of two equally shaped patches.

    Sums and means run over the entries observed in both patches. Returns
    ``None`` when fewer than ``min_fraction`` of the entries are jointly
    observed or when either patch is constant there.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ShapeError(f"patch shapes differ: {a.shape} vs {b.shape}")
    joint = np.ones(a.shape, dtype=bool)
    if mask_a is not None:
        joint &= np.asarray(mask_a, dtype=bool)
    if mask_b is not None:
        joint &= np.asarray(mask_b, dtype=bool)
    q = _ncc_rows(a.reshape(1, -1), joint.reshape(1, -1), b.reshape(1, -1), min_fraction)[0]
    return None if np.isnan(q) else float(q)


def _ncc_rows(target, joint, cands, min_fraction):
    """NCC of one flattened target against each row of `cands`.

    `joint` holds the jointly observed entries per row; undefined results
    are NaN.
    """
    size = target.shape[-1]
    count = joint.sum(axis=1)
    safe = np.maximum(count, 1)
    mu_x = (joint * target).sum(axis=1) / safe
    mu_y = (joint * cands).sum(axis=1) / safe
    dx = np.where(joint, target - mu_x[:, None], 0.0)
    dy = np.where(joint, cands - mu_y[:, None], 0.0)
    sxy = (dx * dy).sum(axis=1)
    sxx = (dx * dx).sum(axis=1)
    syy = (dy * dy).sum(axis=1)
    # constant patches leave only rounding residue in the variance
    tiny_x = 1e-24 * np.maximum((joint * target**2).sum(axis=1), 1e-300)
    tiny_y = 1e-24 * np.maximum((joint * cands**2).sum(axis=1), 1e-300)
    ok = (count >= min_fraction * size) & (count > 0) & (sxx > tiny_x) & (syy > tiny_y)
    q = np.full(len(cands), np.nan)
    q[ok] = sxy[ok] / (np.sqrt(sxx[ok]) * np.sqrt(syy[ok]))
    return q


def candidate_anchors(shape, target, times, cfg):
    """Row and column anchors scanned around `target`.

    Returns two sorted integer arrays; every row/column combination is a
    candidate.
    """
    rows_total, cols_total = shape[0], shape[1]
    w = target.width
    reach = cfg.radius - cfg.radius % cfg.step
    offsets = np.arange(-reach, reach + 1, cfg.step)
    rows = target.row + offsets
    rows = rows[(rows >= 0) & (rows <= rows_total - w)]
    cols = target.col + offsets
    cols = cols[(cols >= 0) & (cols <= cols_total - w) & (cols % times == 0)]
    return rows, cols


def _patch_windows(array, w):
    # view of shape (rows - w + 1, cols - w + 1, b, w, w)
    return sliding_window_view(array, (w, w), axis=(0, 1))


def check_ref(ref, shape, times):
    if ref.row < 0 or ref.col < 0 or ref.row + ref.width > shape[0] or ref.col + ref.width > shape[1]:
        raise ShapeError(f"patch {ref} does not fit in a working tensor of shape {shape}")
    if ref.col % times:
        raise ShapeError(f"patch column anchor {ref.col} is not a multiple of {times}")


def search_similar(working, target, cfg):
    """Find patches similar to `target` inside the search window.

    Parameters
    ----------
    working : WorkingTensor
    target : PatchRef
    cfg : SearchConfig

    Returns
    -------
    list of PatchRef
        The target first, then every candidate with NCC at least
        ``cfg.threshold`` in row-major scan order. When fewer than
        ``cfg.min_group`` patches qualify, the best ``cfg.min_group``
        candidates by NCC are returned instead (ties keep scan order).

    Raises
    ------
    DegenerateGroupError
        If the target itself has too few observed entries, or the window
        holds other candidates but none has a defined NCC.
    """
    times = working.times
    cfg.validate_for(times)
    if target.width != cfg.patch_width:
        raise ShapeError(f"target width {target.width} differs from configured {cfg.patch_width}")
    check_ref(target, working.values.shape, times)
    w = target.width
    rows, cols = candidate_anchors(working.values.shape, target, times, cfg)

    t_vals = working.values[target.row:target.row + w, target.col:target.col + w, :]
    t_mask = working.mask[target.row:target.row + w, target.col:target.col + w, :].astype(bool)
    size = t_vals.size
    if t_mask.sum() < cfg.min_joint_fraction * size:
        raise DegenerateGroupError(f"target {target} has too few observed entries")

    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    rr, cc = rr.ravel(), cc.ravel()
    vals = _patch_windows(working.values, w)[rr, cc].reshape(len(rr), -1)
    masks = _patch_windows(working.mask, w)[rr, cc].reshape(len(rr), -1).astype(bool)
    # window layout is (b, w, w); bring the target into the same layout
    t_flat = np.moveaxis(t_vals, 2, 0).reshape(-1)
    t_mflat = np.moveaxis(t_mask, 2, 0).reshape(-1)
    q = _ncc_rows(t_flat, masks & t_mflat, vals, cfg.min_joint_fraction)

    is_target = (rr == target.row) & (cc == target.col)
    others = ~is_target
    defined = ~np.isnan(q)
    if others.any() and not (defined & others).any():
        raise DegenerateGroupError(f"no candidate around {target} has a defined similarity")

    chosen = np.flatnonzero(others & defined & (q >= cfg.threshold))
    if len(chosen) + 1 < cfg.min_group:
        pool = np.flatnonzero(others & defined)
        order = np.argsort(-q[pool], kind="stable")
        chosen = np.sort(pool[order[: cfg.min_group - 1]])
    return [target] + [PatchRef(int(rr[p]), int(cc[p]), w) for p in chosen]


def extract_patch(array, ref):
    return array[ref.row:ref.row + ref.width, ref.col:ref.col + ref.width, ...]


def group_patches(working, refs, target_index=0):
    """Stack the patches at `refs` into ``(w, w, b, n)`` value and mask tensors."""
    if not refs:
        raise ShapeError("cannot group an empty list of patches")
    w = refs[0].width
    shape = working.values.shape
    for ref in refs:
        if ref.width != w:
            raise ShapeError("all patches in a group must share one width")
        if ref.row < 0 or ref.col < 0 or ref.row + w > shape[0] or ref.col + w > shape[1]:
            raise ShapeError(f"patch {ref} does not fit in a working tensor of shape {shape}")
    values = np.stack([extract_patch(working.values, r) for r in refs], axis=-1)
    mask = np.stack([extract_patch(working.mask, r) for r in refs], axis=-1)
    return PatchGroup(values=values, mask=mask, members=list(refs), target_index=target_index)
