"""Image tensor preparation shared by training, evaluation, and serving."""

from __future__ import annotations

import logging

import cv2
import numpy as np
import torch

logger = logging.getLogger(__name__)

# per-channel normalization applied after scaling pixels to [0, 1]
NORM_MEAN = (0.485, 0.456, 0.406)
NORM_STD = (0.229, 0.224, 0.225)

CROP_SIZE = 224


def to_float_image(image: np.ndarray) -> np.ndarray:
    """uint8 HxWx3 -> float32 in [0, 1]; float input passes through."""
    if image.dtype == np.uint8:
        return image.astype(np.float32) / 255.0
    return image.astype(np.float32)


def normalize_image(image: np.ndarray) -> torch.Tensor:
    """float [0,1] HxWx3 -> normalized 3xHxW tensor."""
    mean = np.asarray(NORM_MEAN, dtype=np.float32)
    std = np.asarray(NORM_STD, dtype=np.float32)
    out = (image - mean) / std
    return torch.from_numpy(np.ascontiguousarray(out.transpose(2, 0, 1)))


def resize_pair(image: np.ndarray, mask: np.ndarray | None, size: int):
    """Resize image bilinearly and mask by nearest neighbor to size x size."""
    out_image = cv2.resize(image, (size, size), interpolation=cv2.INTER_LINEAR)
    if mask is None:
        return out_image, None
    out_mask = cv2.resize(mask, (size, size), interpolation=cv2.INTER_NEAREST)
    return out_image, out_mask


def crop_origin(width: int, height: int, size: int = CROP_SIZE) -> tuple[int, int]:
    """Top-left corner (x, y) of the centered size x size window."""
    return (width - size) // 2, (height - size) // 2


def center_crop(image: np.ndarray, size: int = CROP_SIZE) -> np.ndarray:
    """Centered crop; frames smaller than `size` are upscaled first.

    Upscaling preserves aspect ratio (shorter side brought to `size`) and
    is logged; frames are never padded.
    """
    h, w = image.shape[:2]
    if h < size or w < size:
        scale = size / min(h, w)
        new_w = max(size, round(w * scale))
        new_h = max(size, round(h * scale))
        logger.info(
            "frame %dx%d below crop size %d; upscaling to %dx%d",
            w, h, size, new_w, new_h,
        )
        image = cv2.resize(image, (new_w, new_h), interpolation=cv2.INTER_LINEAR)
        h, w = new_h, new_w
    x0, y0 = crop_origin(w, h, size)
    return image[y0 : y0 + size, x0 : x0 + size]


def preprocess_frame(frame: np.ndarray, size: int = CROP_SIZE) -> torch.Tensor:
    """Camera frame (HxWx3, uint8 or float) -> normalized 3 x size x size."""
    cropped = center_crop(to_float_image(frame), size)
    return normalize_image(cropped)
