"""
Reading the quality metrics
===========================

PSNR and SSIM compare a reconstruction with the reference; metric Q and the
average gradient only look at the reconstruction and grow with sharp
detail. Blurring an image lowers all four.
"""
import numpy as np

from nllrtc.metrics import avg_gradient, metric_q, psnr, quality_report, scatter_data, ssim
from nllrtc.synthetic import tiled_scene

scene, _ = tiled_scene(seed=1)
ref = scene.values[:, :, 0, 0]


def box_blur(img, r):
    padded = np.pad(img, r, mode="edge")
    out = np.zeros_like(img)
    for di in range(2 * r + 1):
        for dj in range(2 * r + 1):
            out += padded[di:di + img.shape[0], dj:dj + img.shape[1]]
    return out / (2 * r + 1) ** 2


print(f"{'blur':>4} {'psnr':>8} {'ssim':>7} {'Q':>8} {'AG':>7}")
for r in range(4):
    img = box_blur(ref, r) if r else ref
    print(f"{r:4d} {psnr(img, ref, 1.0):8.2f} {ssim(img, ref, 1.0):7.4f} "
          f"{metric_q(img):8.3f} {avg_gradient(img):7.4f}")

# A report over a stack averages the per-band values
noisy = np.clip(scene.values + 0.02 * np.random.default_rng(0).standard_normal(scene.shape), 0, 1)
report = quality_report(noisy, scene.values, 1.0, time=0)
print(report.to_text())

# Scatter pairs of original and reconstructed values at missing entries
mask = np.ones(scene.shape, dtype=np.uint8)
mask[:8, :8, :, 0] = 0
pairs = scatter_data(noisy, scene.values, mask)
print("scatter pairs:", pairs.shape, "correlation", np.corrcoef(pairs.T)[0, 1].round(4))
