"""
Reshaping between a multitemporal stack ``Y[i, j, k, l]`` of shape
``(m, n, b, t)`` and the 3-order working tensor of shape ``(m, t * n, b)``.

The working tensor interleaves time inside each original column: entry
``Y[i, j, k, l]`` moves to ``W[i, j * t + l, k]`` (0-based), so the ``t``
observations of one pixel occupy ``t`` adjacent columns.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import CongruenceError, ShapeError


@dataclass(frozen=True)
class ImageStack:
    """Multitemporal multispectral image stack.

    Attributes
    ----------
    values : ndarray
        Shape ``(height, width, bands, times)``, finite and nonnegative.
    value_range : float
        Declared maximum value of the data (255 for 8-bit, 1 for
        reflectance).
    """

    values: np.ndarray
    value_range: float = 255.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 4:
            raise ShapeError(f"an image stack needs 4 dimensions, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("image stack contains non-finite values")
        if values.size and values.min() < 0:
            raise ValueError("image stack contains negative values")
        if not self.value_range > 0:
            raise ValueError(f"value_range must be positive, got {self.value_range}")
        if values.size and values.max() > self.value_range:
            raise ValueError(
                f"value_range {self.value_range} is below the data maximum {values.max()}"
            )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "value_range", float(self.value_range))

    @property
    def shape(self):
        return self.values.shape


def check_mask(mask, shape=None, band_consistent=False):
    """Validate an observation mask and return it as a uint8 array.

    1 marks an observed entry, 0 a missing one.
    """
    mask = np.asarray(mask)
    if shape is not None and mask.shape != tuple(shape):
        raise CongruenceError(f"mask shape {mask.shape} does not match data shape {tuple(shape)}")
    if not np.isin(mask, (0, 1)).all():
        raise ValueError("mask entries must be 0 or 1")
    mask = mask.astype(np.uint8)
    if band_consistent and mask.ndim == 4:
        if not (mask == mask[:, :, :1, :]).all():
            raise ValueError("mask is not band-consistent")
    return mask


@dataclass
class WorkingTensor:
    """3-order rearranged data with its mask and the source dimensions."""

    values: np.ndarray
    mask: np.ndarray
    source_shape: tuple
    value_range: float = 255.0

    @property
    def times(self):
        return self.source_shape[3]


def to_working(array, times):
    """Apply the forward index map to any ``(m, n, b, t)`` array."""
    array = np.asarray(array)
    if array.ndim != 4 or array.shape[3] != times:
        raise ShapeError(f"expected a 4-order array with {times} times, got {array.shape}")
    m, n, b, t = array.shape
    return np.ascontiguousarray(array.transpose(0, 1, 3, 2)).reshape(m, n * t, b)


def from_working(array, source_shape):
    """Apply the inverse index map to an ``(m, t * n, b)`` array."""
    m, n, b, t = source_shape
    array = np.asarray(array)
    if array.shape != (m, n * t, b):
        raise ShapeError(
            f"working array of shape {array.shape} is inconsistent with source {tuple(source_shape)}"
        )
    return np.ascontiguousarray(array.reshape(m, n, t, b).transpose(0, 1, 3, 2))


def rearrange_forward(stack, mask):
    """Rearrange a stack and its mask into a :class:`WorkingTensor`."""
    mask = check_mask(mask, stack.shape)
    shape = stack.shape
    return WorkingTensor(
        values=to_working(stack.values, shape[3]),
        mask=to_working(mask, shape[3]),
        source_shape=tuple(shape),
        value_range=stack.value_range,
    )


def rearrange_inverse(working):
    """Recover ``(ImageStack, mask)`` from a :class:`WorkingTensor`."""
    shape = tuple(working.source_shape)
    if len(shape) != 4:
        raise ShapeError(f"source shape must have 4 entries, got {shape}")
    values = from_working(working.values, shape)
    mask = from_working(working.mask, shape)
    return ImageStack(values, working.value_range), mask
