"""Training walkthrough: overfit a tiny synthetic wound set, inspect the
run directory, reload the best checkpoint.

Uses a short budget (60 steps at 128x128) so it finishes in about a
minute on a laptop CPU; the acceptance suite runs the full-length version.

Run: python3 demos/04_training_overfit.py
"""

import json
import tempfile
from pathlib import Path

import cv2
import numpy as np

from woundseg.models import build_model
from woundseg.training import TrainConfig, evaluate, train
from woundseg.weights import load_weights


def wound_pair(seed, size=128):
    rng = np.random.default_rng([seed, 5])
    image = np.full((size, size, 3), np.array([0.72, 0.52, 0.42], np.float32))
    image += rng.normal(0, 0.01, image.shape).astype(np.float32)
    mask = np.zeros((size, size), np.uint8)
    center = tuple(int(v) for v in rng.uniform(0.4, 0.6, 2) * size)
    cv2.ellipse(mask, center, (int(0.3 * size), int(0.2 * size)),
                float(rng.uniform(0, 180)), 0, 360, 1, -1)
    image[mask == 1] = np.array([0.42, 0.08, 0.08], np.float32)
    return np.clip(image, 0, 1), mask


def main():
    pairs = [wound_pair(s) for s in range(12)]
    run_dir = Path(tempfile.mkdtemp(prefix="woundseg_run_"))
    config = TrainConfig(
        variant="unext_s", epochs=999, max_steps=60, resize=128,
        batch_size=4, seed=0, augment=None, val_interval=5,
    )
    result = train(config, pairs[:8], pairs[8:], run_dir)

    print("step losses (first 12):",
          [f"{l:.3f}" for l in result.step_losses[:12]])
    print(f"\nrun directory {run_dir}:")
    for child in sorted(run_dir.iterdir()):
        print(f"  {child.name} ({child.stat().st_size} bytes)")

    print("\nlast epoch log records:")
    for line in (run_dir / "log.ndjson").read_text().splitlines()[-3:]:
        print(f"  {json.dumps(json.loads(line))}")

    report = evaluate(result.network, pairs[:8], threshold=0.5, resize=128)
    print(f"\ntraining-split metrics: iou={report.iou:.3f} dsc={report.dsc:.3f} "
          f"prc={report.prc:.3f} rec={report.rec:.3f}")

    if result.best:
        reloaded = build_model(config.variant, seed=42)
        load_weights(reloaded, result.best.path)
        again = evaluate(reloaded, pairs[8:], threshold=0.5, resize=128)
        print(f"best checkpoint epoch {result.best.epoch}: recorded val_iou="
              f"{result.best.val_iou:.6f}, reloaded val_iou={again.iou:.6f}")


if __name__ == "__main__":
    main()
