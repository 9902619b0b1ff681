"""
Detecting a cloud by thresholding
=================================

The brightness threshold is raised step by step and the cloud set that makes
the target acquisition look most like the other acquisitions is kept. A
neighbourhood vote then clears bright isolated pixels that are not cloud.
"""
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from nllrtc import ImageStack, knn_refine, threshold_detect, threshold_scan
from nllrtc.synthetic import tiled_scene

size = 128
scene, _ = tiled_scene(height=size, width=size, seed=8)
rng = np.random.default_rng(8)
values = scene.values.copy()
# a clear acquisition resembles the mean of the others up to sensor noise
values[:, :, :, 0] = np.clip(values[:, :, :, 1:].mean(axis=3)
                             + 0.01 * rng.standard_normal(values.shape[:3]), 0, 1)

# plant a bright blob and a few bright isolated pixels
rows, cols = np.mgrid[0:size, 0:size]
blob = ((rows - 60) / 30) ** 2 + ((cols - 66) / 36) ** 2 <= 1
values[blob, :, 0] = 0.98
spots = [(5, 5), (10, 120), (120, 10), (118, 115), (100, 60)]
for i, j in spots:
    values[i, j, :, 0] = 0.98
stack = ImageStack(values, 1.0)

# The scan path: correlation against the reference mean for every threshold
path = [(g, f) for g, f in threshold_scan(stack, 0) if f is not None]
first = threshold_detect(stack, 0)
final = knn_refine(first, 0)
print("flagged after thresholding:", int((first[:, :, 0, 0] == 0).sum()))
print("flagged after refinement:  ", int((final[:, :, 0, 0] == 0).sum()), "blob size", int(blob.sum()))
print("isolated pixels still flagged:", sum(int(final[i, j, 0, 0] == 0) for i, j in spots))

out_dir = Path(__file__).with_name("output")
out_dir.mkdir(exist_ok=True)
fig, axes = plt.subplots(1, 4, figsize=(14, 3.5))
axes[0].imshow(values[:, :, :, 0])
axes[0].set_title("target acquisition")
axes[1].plot(*zip(*path))
axes[1].set_xlabel("threshold")
axes[1].set_ylabel("correlation")
axes[2].imshow(first[:, :, 0, 0] == 0, cmap="gray")
axes[2].set_title("thresholded")
axes[3].imshow(final[:, :, 0, 0] == 0, cmap="gray")
axes[3].set_title("refined")
for ax in axes[[0, 2, 3]]:
    ax.axis("off")
fig.tight_layout()
fig.savefig(out_dir / "cloud_detection.png", dpi=100)
