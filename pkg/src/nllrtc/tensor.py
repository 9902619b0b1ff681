"""
Dense tensor helpers: mode-n unfolding and folding, fiber counts and
numerical rank.

Modes are 0-based. Unfolding follows the lexicographic convention where
the columns of the mode-n unfolding are the mode-n fibers, ordered with the
lowest remaining index varying fastest. For a 3 x 4 x 5 tensor the entry
``T[i, j, k]`` therefore lands at ``unfold(T, 0)[i, j + 4 * k]``.
"""
import numpy as np

from .exceptions import InvalidModeError, ShapeError

MAX_ORDER = 4


def _check_order(ndim):
    if ndim < 1 or ndim > MAX_ORDER:
        raise ShapeError(f"tensor order must be between 1 and {MAX_ORDER}, got {ndim}")


def _check_mode(mode, ndim):
    if not 0 <= mode < ndim:
        raise InvalidModeError(f"mode {mode} out of range for an order-{ndim} tensor")


def unfold(tensor, mode):
    """Mode-`mode` unfolding of `tensor`.

    Parameters
    ----------
    tensor : ndarray
        Tensor of order 1 to 4.
    mode : int
        0-based mode.

    Returns
    -------
    ndarray
        Matrix of shape ``(tensor.shape[mode], prod(other dims))`` whose
        columns are the mode-`mode` fibers.
    """
    tensor = np.asarray(tensor)
    _check_order(tensor.ndim)
    _check_mode(mode, tensor.ndim)
    return np.reshape(np.moveaxis(tensor, mode, 0), (tensor.shape[mode], -1), order="F")


def fold(matrix, mode, shape):
    """Inverse of :func:`unfold`.

    Parameters
    ----------
    matrix : ndarray
        Matrix of shape ``(shape[mode], prod(other dims))``.
    mode : int
        0-based mode the matrix was unfolded along.
    shape : tuple of int
        Shape of the tensor to rebuild.

    Returns
    -------
    ndarray
    """
    matrix = np.asarray(matrix)
    shape = tuple(int(s) for s in shape)
    _check_order(len(shape))
    _check_mode(mode, len(shape))
    rest = [s for i, s in enumerate(shape) if i != mode]
    expected = (shape[mode], int(np.prod(rest, dtype=np.int64)))
    if matrix.ndim != 2 or matrix.shape != expected:
        raise ShapeError(
            f"cannot fold a matrix of shape {matrix.shape} at mode {mode} into {shape}; "
            f"expected {expected}"
        )
    moved = np.reshape(matrix, [shape[mode]] + rest, order="F")
    return np.moveaxis(moved, 0, mode)


def count_fibers(shape, mode):
    """Number of mode-`mode` fibers of a tensor with the given shape."""
    shape = tuple(int(s) for s in shape)
    _check_order(len(shape))
    _check_mode(mode, len(shape))
    if any(s < 1 for s in shape):
        raise ShapeError(f"dimensions must be positive, got {shape}")
    count = 1
    for i, s in enumerate(shape):
        if i != mode:
            count *= s
    return count


def numerical_rank(matrix, rel_tol=0.01):
    """Count singular values larger than ``rel_tol`` times the largest one.

    Returns 0 for the zero matrix.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0:
        raise ShapeError("numerical rank of an empty matrix is undefined")
    if not 0 < rel_tol < 1:
        raise ValueError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    sigma = np.linalg.svd(np.atleast_2d(matrix), compute_uv=False)
    if sigma[0] == 0:
        return 0
    return int(np.count_nonzero(sigma > rel_tol * sigma[0]))


def mode_ranks(tensor, rel_tol=0.01):
    """Fiber counts and numerical ranks of every unfolding.

    Returns a list of ``(n_fibers, rank)`` pairs, one per mode.
    """
    tensor = np.asarray(tensor, dtype=float)
    return [
        (count_fibers(tensor.shape, mode), numerical_rank(unfold(tensor, mode), rel_tol))
        for mode in range(tensor.ndim)
    ]
