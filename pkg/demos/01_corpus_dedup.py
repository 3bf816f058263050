"""Corpus curation walkthrough: hashing, duplicate groups, splits.

Builds a small synthetic corpus on disk (with planted duplicates), then
runs the full curation pipeline and prints every intermediate artifact.

Run: python3 demos/01_corpus_dedup.py
"""

import tempfile
from pathlib import Path

import cv2
import numpy as np

from woundseg.corpus import (
    deduplicate, find_duplicates, load_corpus, make_splits,
    write_split_manifest,
)
from woundseg.phash import hamming_distance


def synth_image(seed, size=128):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    canvas = np.zeros((size, size, 3))
    for _ in range(5):
        cx, cy = rng.uniform(0, size, 2)
        sx, sy = rng.uniform(size / 10, size / 3, 2)
        canvas += np.exp(-(((xx - cx) / sx) ** 2 + ((yy - cy) / sy) ** 2))[..., None] \
            * rng.uniform(40, 120, 3)
    return np.clip(canvas + 60, 0, 255).astype(np.uint8)


def main():
    root = Path(tempfile.mkdtemp(prefix="woundseg_demo_"))
    (root / "images").mkdir()
    (root / "labels").mkdir()

    print(f"corpus root: {root}\n")
    for i in range(8):
        img = synth_image(seed=i)
        cv2.imwrite(str(root / "images" / f"case{i:02d}.png"),
                    cv2.cvtColor(img, cv2.COLOR_RGB2BGR))
        label = (img[..., 0] > 120).astype(np.uint8) * 255
        cv2.imwrite(str(root / "labels" / f"case{i:02d}.png"), label)

    # plant one exact byte duplicate and one brightness-shifted near duplicate
    src = root / "images" / "case00.png"
    (root / "images" / "case00_copy.png").write_bytes(src.read_bytes())
    shifted = np.clip(synth_image(seed=1).astype(np.int16) + 9, 0, 255).astype(np.uint8)
    cv2.imwrite(str(root / "images" / "case01_shifted.png"),
                cv2.cvtColor(shifted, cv2.COLOR_RGB2BGR))

    samples = load_corpus(root)
    print(f"loaded {len(samples)} samples; per-image 64-bit perceptual hashes:")
    for s in samples:
        print(f"  {s.id:18s} {s.phash:016x}")

    print("\npairwise distance of the planted near-duplicate:")
    by_id = {s.id: s for s in samples}
    d = hamming_distance(by_id["case01"].phash, by_id["case01_shifted"].phash)
    print(f"  case01 vs case01_shifted -> {d} bits (threshold 11)")

    groups = find_duplicates(samples, max_distance=11)
    print(f"\n{len(groups)} duplicate groups:")
    for g in groups:
        print(f"  {g.members} ({g.reason})")

    retained, report = deduplicate(samples, groups)
    print(f"\ndedup report ({report.pair_count} pairs discarded):")
    print(report.to_text())

    manifest = make_splits(retained, ratios=(0.6, 0.2, 0.2), seed=7)
    out = root / "splits.csv"
    write_split_manifest(manifest, out)
    print(f"split counts (train/val/test): {manifest.counts}")
    print(f"manifest written to {out}:\n")
    print(out.read_text())


if __name__ == "__main__":
    main()
