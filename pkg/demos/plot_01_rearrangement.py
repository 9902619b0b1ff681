"""
Rearranging a stack into the working tensor
===========================================

A multitemporal stack has shape (rows, cols, bands, times). Before patches
are matched it is reshaped so that the same pixel at every acquisition sits
in adjacent columns. A patch of width equal to the number of acquisitions
then holds a small spatial neighbourhood through time.
"""
import numpy as np

from nllrtc import ImageStack, rearrange_forward, rearrange_inverse
from nllrtc.tensor import count_fibers, mode_ranks

# A tiny stack whose values encode their own (row, col, band, time) index
m, n, b, t = 2, 3, 1, 4
i, j, k, l = np.indices((m, n, b, t))
code = 1000 * i + 100 * j + 10 * k + l
stack = ImageStack(code.astype(float), value_range=code.max())

work = rearrange_forward(stack, np.ones(stack.shape, dtype=np.uint8))
print("working tensor shape:", work.values.shape)
print("first row of band 0 (column j*t + l holds pixel j at time l):")
print(work.values[0, :, 0].astype(int))

# The inverse gives the stack back exactly
back, mask = rearrange_inverse(work)
print("roundtrip exact:", np.array_equal(back.values, stack.values))

# A group of 708 patches of size 4 x 4 x 3 has these fiber counts per mode
print("fibers per mode:", [count_fibers((4, 4, 3, 708), mode) for mode in range(4)])

# Numerical ranks of a group stacked from copies of one patch plus noise
rng = np.random.default_rng(0)
group = np.repeat(rng.random((4, 4, 3, 1)), 48, axis=3) + 1e-4 * rng.random((4, 4, 3, 48))
for mode, (fibers, rank) in enumerate(mode_ranks(group), 1):
    print(f"mode {mode}: {fibers} fibers spanning a space of dimension {rank}")
