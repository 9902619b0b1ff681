"""
Patch-based completion against the global baseline
==================================================

A synthetic scene tiled from a few repeating textures loses part of one
acquisition to a cloud and, separately, to diagonal stripes. The patch
pipeline groups similar patches and completes each group; the baseline
completes the whole stack at once. Figures are written next to this script.
"""
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from nllrtc import DegradationSpec, SolverConfig, halrtc_inpaint, inpaint, simulate_degradation
from nllrtc.metrics import missing_psnr
from nllrtc.synthetic import tiled_scene

out_dir = Path(__file__).with_name("output")
out_dir.mkdir(exist_ok=True)

scene, labels = tiled_scene(seed=0)
cases = {
    "cloud": DegradationSpec("cloud", ellipses=[(30, 34, 12, 11)]),
    "stripes": DegradationSpec("diagonal-stripes", period=10, width=2),
}

fig, axes = plt.subplots(len(cases), 4, figsize=(12, 6))
for row, (name, spec) in enumerate(cases.items()):
    mask = simulate_degradation(scene, spec)
    ours, report = inpaint(scene, mask)
    # the baseline gets its best penalty from a small grid
    best = None
    for beta in (0.01, 0.1, 1.0, 10.0):
        base, _ = halrtc_inpaint(scene, mask, SolverConfig(beta=beta, epsilon=1e-2))
        score = missing_psnr(base.values, scene.values, mask, 1.0)
        if best is None or score > best[0]:
            best = (score, beta, base)
    score = missing_psnr(ours.values, scene.values, mask, 1.0)
    print(f"{name:8s} patch groups: {report.groups:4d}  PSNR {score:6.2f} dB   "
          f"baseline (beta={best[1]}): {best[0]:6.2f} dB")

    degraded = np.where(mask == 1, scene.values, 1.0)
    panels = [scene.values, degraded, ours.values, best[2].values]
    titles = ["original", f"{name}", "patch groups", "baseline"]
    for ax, img, title in zip(axes[row], panels, titles):
        ax.imshow(np.clip(img[:, :, :, 0], 0, 1))
        ax.set_title(title)
        ax.axis("off")
fig.tight_layout()
fig.savefig(out_dir / "pipeline_vs_halrtc.png", dpi=100)
print("figure written to", out_dir / "pipeline_vs_halrtc.png")
