"""64-bit DCT perceptual hashing for near-duplicate image detection.

The hash is built from the low-frequency structure of the image: grayscale
conversion, bilinear downscale to 32x32, a type-II 2-D DCT, and a 64-bit
signature taken from the 8x8 block of lowest AC frequencies. Row 0 and
column 0 of the DCT (the DC term and the pure horizontal/vertical terms
it anchors) are excluded so that global brightness shifts do not move any
bits: the selected block is ``dct[1:9, 1:9]``. Each bit is 1 iff its
coefficient strictly exceeds the median of the 64 selected coefficients.
"""

from __future__ import annotations

import numpy as np
import cv2
import scipy.fft

LUMA_WEIGHTS = (0.299, 0.587, 0.114)  # ITU-R BT.601 (R, G, B)
HASH_BITS = 64


def to_grayscale(image: np.ndarray) -> np.ndarray:
    """Collapse an RGB image to a float64 luma plane.

    Already-grayscale (2-D) inputs pass through as float64.
    """
    if image.ndim == 2:
        return image.astype(np.float64)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected HxW or HxWx3 image, got shape {image.shape}")
    r, g, b = LUMA_WEIGHTS
    return (
        r * image[..., 0].astype(np.float64)
        + g * image[..., 1].astype(np.float64)
        + b * image[..., 2].astype(np.float64)
    )


def compute_phash(image: np.ndarray) -> int:
    """Compute the 64-bit perceptual hash of a decoded image.

    `image` is an HxW grayscale or HxWx3 RGB array with nonzero size.
    Deterministic for fixed pixel content; the first selected coefficient
    (row 1, col 1) maps to the most significant bit.
    """
    if image.size == 0:
        raise ValueError("cannot hash an empty image")
    gray = to_grayscale(image)
    small = cv2.resize(gray, (32, 32), interpolation=cv2.INTER_LINEAR)
    coeffs = scipy.fft.dctn(small, type=2)
    block = coeffs[1:9, 1:9].ravel()
    median = np.median(block)
    bits = block > median
    value = 0
    for bit in bits:
        value = (value << 1) | int(bit)
    return value


def hamming_distance(a: int, b: int) -> int:
    """Number of differing bits between two 64-bit hashes (0..64)."""
    return ((a ^ b) & ((1 << HASH_BITS) - 1)).bit_count()
