"""Synthetic multitemporal scenes for experiments and tests."""
import numpy as np

from .rearrange import ImageStack


def texture_dictionary(n_classes, tile, rng):
    """Smooth oriented gratings, one ``tile x tile`` texture per class."""
    rows, cols = np.mgrid[0:tile, 0:tile] / tile
    textures = []
    for c in range(n_classes):
        theta = np.pi * c / n_classes + rng.uniform(0, np.pi / (2 * n_classes))
        freq = rng.integers(1, 3)
        phase = rng.uniform(0, 2 * np.pi)
        wave = np.cos(2 * np.pi * freq * (rows * np.cos(theta) + cols * np.sin(theta)) + phase)
        textures.append(0.5 + 0.5 * wave)
    return np.stack(textures)


def tiled_scene(height=64, width=64, bands=3, times=4, n_classes=4, tile=8, seed=0,
                value_range=1.0):
    """Scene built from a small dictionary of repeating textured tiles.

    Each tile is assigned a land-cover class. A class owns one texture and a
    per band, per acquisition gain and offset, so the same texture changes
    brightness differently from one acquisition to the next.

    Returns
    -------
    ImageStack
    labels : ndarray
        Class of every pixel, shape ``(height, width)``.
    """
    rng = np.random.default_rng(seed)
    textures = texture_dictionary(n_classes, tile, rng)
    grid = rng.integers(0, n_classes, size=(-(-height // tile), -(-width // tile)))
    labels = np.kron(grid, np.ones((tile, tile), dtype=int))[:height, :width]
    rows, cols = np.mgrid[0:height, 0:width]
    pattern = textures[labels, rows % tile, cols % tile]

    gain = rng.uniform(0.2, 0.6, size=(n_classes, bands, times))
    offset = rng.uniform(0.05, 0.35, size=(n_classes, bands, times))
    values = pattern[:, :, None, None] * gain[labels] + offset[labels]
    values = np.clip(values, 0.0, 1.0) * value_range
    return ImageStack(values, value_range), labels


def multilinear_tensor(shape, ranks, seed=0, nonnegative=True):
    """Random tensor with the given multilinear rank (Tucker form).

    With `nonnegative` the core and factors are uniform on ``[0, 1)``, which
    gives an image-like tensor dominated by its mean component. The result is
    scaled to a maximum of 1.
    """
    rng = np.random.default_rng(seed)
    draw = rng.random if nonnegative else rng.standard_normal
    x = draw(ranks)
    for mode, (dim, rank) in enumerate(zip(shape, ranks)):
        factor = draw((dim, rank))
        x = np.moveaxis(np.tensordot(factor, np.moveaxis(x, mode, 0), axes=(1, 0)), 0, mode)
    return x / np.abs(x).max()
