"""Augmentation gallery: the training-time pipeline on one image/mask pair.

Saves a PNG grid of several seeded draws so the geometric synchrony of
image and mask is visible at a glance.

Run: python3 demos/02_augmentation_gallery.py [out.png]
"""

import sys

import cv2
import numpy as np

from woundseg.augment import AugmentConfig, augment_pair


def sample_pair(size=192):
    image = np.full((size, size, 3), np.array([0.72, 0.52, 0.42], np.float32))
    mask = np.zeros((size, size), np.uint8)
    cv2.ellipse(mask, (size // 2, size // 2), (50, 28), 20, 0, 360, 1, -1)
    image[mask == 1] = np.array([0.45, 0.09, 0.09], np.float32)
    cv2.circle(image, (40, 40), 14, (0.2, 0.4, 0.7), -1)
    return image, mask


def overlay(image, mask):
    shown = (image * 255).astype(np.uint8).copy()
    shown[mask == 1, 0] = np.minimum(255, shown[mask == 1, 0].astype(int) + 80)
    return shown


def main():
    out_path = sys.argv[1] if len(sys.argv) > 1 else "augmentation_gallery.png"
    image, mask = sample_pair()
    config = AugmentConfig()
    tiles = [overlay(image, mask)]
    for seed in range(7):
        aug_image, aug_mask = augment_pair(image, mask, config,
                                           np.random.default_rng(seed))
        assert set(np.unique(aug_mask)) <= {0, 1}  # masks stay binary
        tiles.append(overlay(aug_image, aug_mask))
    rows = [np.hstack(tiles[:4]), np.hstack(tiles[4:])]
    grid = np.vstack(rows)
    cv2.imwrite(out_path, cv2.cvtColor(grid, cv2.COLOR_RGB2BGR))
    print(f"first tile is the original pair, the rest are seeded draws")
    print(f"gallery written to {out_path}")


if __name__ == "__main__":
    main()
