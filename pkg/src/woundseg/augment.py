"""Training-time augmentation for image/mask pairs.

All functions are pure: randomness comes only from the generator passed
in, so a fixed seed reproduces the exact output. Images are float32 RGB
in [0, 1] with shape HxWx3; masks are uint8 {0, 1} with shape HxW. The
geometric transforms (affine, flips) are applied identically to image and
mask; photometric ones (blur, jitter) touch the image only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import cv2
import numpy as np
import scipy.ndimage

from .errors import ConfigError, ContractError
from .phash import LUMA_WEIGHTS


@dataclass
class AugmentConfig:
    blur_kernel: int = 25
    blur_sigma_range: tuple[float, float] = (0.001, 2.0)
    max_translate_frac: float = 0.125
    max_rotate_deg: float = 180.0
    scale_range: tuple[float, float] = (0.5, 1.5)
    max_shear_deg: float = 22.5
    flip_prob: float = 0.5
    # (brightness, contrast, saturation, hue); hue is a fraction of the wheel
    jitter_strengths: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.05)

    def __post_init__(self):
        if self.blur_kernel <= 0 or self.blur_kernel % 2 == 0:
            raise ConfigError(f"blur kernel must be odd and positive, got {self.blur_kernel}")
        if not (0 < self.blur_sigma_range[0] <= self.blur_sigma_range[1]):
            raise ConfigError(f"bad blur sigma range {self.blur_sigma_range}")
        if not (0 < self.scale_range[0] <= self.scale_range[1]):
            raise ConfigError(f"bad scale range {self.scale_range}")
        if not 0 <= self.flip_prob <= 1:
            raise ConfigError(f"flip probability must be in [0,1], got {self.flip_prob}")
        if any(s < 0 for s in self.jitter_strengths):
            raise ConfigError(f"jitter strengths must be >= 0, got {self.jitter_strengths}")

    @classmethod
    def identity(cls) -> "AugmentConfig":
        """A degenerate config under which augment_pair is a no-op."""
        return cls(
            blur_sigma_range=(0.001, 0.001),
            max_translate_frac=0.0,
            max_rotate_deg=0.0,
            scale_range=(1.0, 1.0),
            max_shear_deg=0.0,
            flip_prob=0.0,
            jitter_strengths=(0.0, 0.0, 0.0, 0.0),
        )


def gaussian_kernel_1d(kernel: int, sigma: float) -> np.ndarray:
    """Normalized samples of exp(-d^2 / 2 sigma^2) on the kernel grid."""
    half = kernel // 2
    d = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(d * d) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(image: np.ndarray, kernel: int = 25, sigma: float = 1.0) -> np.ndarray:
    """Separable Gaussian blur with reflect padding at the borders."""
    if kernel <= 0 or kernel % 2 == 0:
        raise ConfigError(f"blur kernel must be odd and positive, got {kernel}")
    if sigma <= 0:
        raise ConfigError(f"blur sigma must be positive, got {sigma}")
    k = gaussian_kernel_1d(kernel, sigma)
    out = scipy.ndimage.convolve1d(image.astype(np.float32), k, axis=0, mode="reflect")
    out = scipy.ndimage.convolve1d(out, k, axis=1, mode="reflect")
    return out.astype(np.float32)


def affine_matrix(
    size: tuple[int, int],
    translate: tuple[float, float] = (0.0, 0.0),
    angle_deg: float = 0.0,
    scale: float = 1.0,
    shear_deg: float = 0.0,
) -> np.ndarray:
    """Forward 2x3 affine map about the image center ((W-1)/2, (H-1)/2)."""
    h, w = size
    theta = math.radians(angle_deg)
    sh = math.radians(shear_deg)
    rot = np.array(
        [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]]
    )
    shear = np.array([[1.0, -math.tan(sh)], [0.0, 1.0]])
    lin = rot @ shear * scale
    center = np.array([(w - 1) / 2.0, (h - 1) / 2.0])
    offset = center + np.asarray(translate, dtype=np.float64) - lin @ center
    return np.hstack([lin, offset[:, None]])


def _is_identity(translate, angle_deg, scale, shear_deg) -> bool:
    return (
        translate == (0.0, 0.0)
        and angle_deg == 0.0
        and scale == 1.0
        and shear_deg == 0.0
    )


def affine_pair(
    image: np.ndarray,
    mask: np.ndarray,
    translate: tuple[float, float] = (0.0, 0.0),
    angle_deg: float = 0.0,
    scale: float = 1.0,
    shear_deg: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Apply one affine transform to both image and mask.

    The image is resampled bilinearly, the mask by nearest neighbor so it
    stays binary; regions mapped from outside the frame are filled with 0.
    """
    if image.shape[:2] != mask.shape[:2]:
        raise ContractError(
            f"image {image.shape[:2]} and mask {mask.shape[:2]} sizes differ"
        )
    if _is_identity(translate, angle_deg, scale, shear_deg):
        return image, mask
    h, w = mask.shape[:2]
    m = affine_matrix((h, w), translate, angle_deg, scale, shear_deg)
    out_image = cv2.warpAffine(
        image, m, (w, h), flags=cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_CONSTANT, borderValue=0,
    )
    out_mask = cv2.warpAffine(
        mask, m, (w, h), flags=cv2.INTER_NEAREST,
        borderMode=cv2.BORDER_CONSTANT, borderValue=0,
    )
    return out_image, out_mask


def random_affine_pair(
    image: np.ndarray,
    mask: np.ndarray,
    config: AugmentConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    h, w = mask.shape[:2]
    angle = rng.uniform(-config.max_rotate_deg, config.max_rotate_deg)
    tx = rng.uniform(-config.max_translate_frac, config.max_translate_frac) * w
    ty = rng.uniform(-config.max_translate_frac, config.max_translate_frac) * h
    scale = rng.uniform(*config.scale_range)
    shear = rng.uniform(-config.max_shear_deg, config.max_shear_deg)
    return affine_pair(image, mask, (tx, ty), angle, scale, shear)


def _luma(image: np.ndarray) -> np.ndarray:
    r, g, b = LUMA_WEIGHTS
    return r * image[..., 0] + g * image[..., 1] + b * image[..., 2]


def _adjust_brightness(image, factor):
    return np.clip(image * factor, 0.0, 1.0)


def _adjust_contrast(image, factor):
    mean = float(_luma(image).mean())
    return np.clip(factor * image + (1.0 - factor) * mean, 0.0, 1.0)


def _adjust_saturation(image, factor):
    luma = _luma(image)[..., None]
    return np.clip(factor * image + (1.0 - factor) * luma, 0.0, 1.0)


def _adjust_hue(image, shift):
    # shift is a fraction of the color wheel; cv2 float HSV has H in [0, 360)
    hsv = cv2.cvtColor(image.astype(np.float32), cv2.COLOR_RGB2HSV)
    hsv[..., 0] = np.mod(hsv[..., 0] + shift * 360.0, 360.0)
    return np.clip(cv2.cvtColor(hsv, cv2.COLOR_HSV2RGB), 0.0, 1.0)


def color_jitter(
    image: np.ndarray,
    strengths: tuple[float, float, float, float],
    rng: np.random.Generator,
) -> np.ndarray:
    """Random brightness/contrast/saturation/hue shifts, in random order.

    Factors are drawn uniformly from [max(0, 1-s), 1+s] (hue from [-s, s]);
    factors are all drawn before any op is applied, so the rng consumption
    is independent of which ops turn out to be no-ops.
    """
    b, c, s, h = strengths
    f_brightness = rng.uniform(max(0.0, 1.0 - b), 1.0 + b)
    f_contrast = rng.uniform(max(0.0, 1.0 - c), 1.0 + c)
    f_saturation = rng.uniform(max(0.0, 1.0 - s), 1.0 + s)
    f_hue = rng.uniform(-h, h)
    order = rng.permutation(4)

    out = image.astype(np.float32)
    for idx in order:
        if idx == 0 and f_brightness != 1.0:
            out = _adjust_brightness(out, f_brightness)
        elif idx == 1 and f_contrast != 1.0:
            out = _adjust_contrast(out, f_contrast)
        elif idx == 2 and f_saturation != 1.0:
            out = _adjust_saturation(out, f_saturation)
        elif idx == 3 and f_hue != 0.0:
            out = _adjust_hue(out, f_hue)
    return out.astype(np.float32)


def random_flips_pair(
    image: np.ndarray,
    mask: np.ndarray,
    rng: np.random.Generator,
    p: float = 0.5,
) -> tuple[np.ndarray, np.ndarray]:
    """Flip image and mask together, each axis independently with prob p."""
    flip_h = rng.random() < p
    flip_v = rng.random() < p
    if flip_h:
        image, mask = image[:, ::-1], mask[:, ::-1]
    if flip_v:
        image, mask = image[::-1, :], mask[::-1, :]
    return np.ascontiguousarray(image), np.ascontiguousarray(mask)


def augment_pair(
    image: np.ndarray,
    mask: np.ndarray,
    config: AugmentConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Full pipeline: blur -> affine -> jitter -> flips."""
    sigma = rng.uniform(*config.blur_sigma_range)
    image = gaussian_blur(image, config.blur_kernel, sigma)
    image, mask = random_affine_pair(image, mask, config, rng)
    image = color_jitter(image, config.jitter_strengths, rng)
    image, mask = random_flips_pair(image, mask, rng, config.flip_prob)
    return image, mask
