"""Guidance-map-driven fusion.

Initial fusion is a per-pixel blend selected by the guidance map; the
boundary map isolates the 0.5 band; a pluggable correction image (zero,
loaded from file, or the ground-truth oracle on synthetic pairs) refines
only that band.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .image import broadcast_mask, ensure_image, load_png, same_shape, save_png


@dataclass(frozen=True)
class CorrectionSource:
    """Boundary correction: 'zero', a signed image, or the GT oracle."""

    kind: str  # 'zero' | 'image' | 'oracle'
    image: Optional[np.ndarray] = None
    gt: Optional[np.ndarray] = None

    @classmethod
    def zero(cls):
        return cls(kind="zero")

    @classmethod
    def from_image(cls, image):
        image = ensure_image(image, "correction")
        if image.min() < -1 - 1e-9 or image.max() > 1 + 1e-9:
            raise ValueError("correction values must lie in [-1, 1]")
        return cls(kind="image", image=image)

    @classmethod
    def oracle(cls, gt):
        return cls(kind="oracle", gt=ensure_image(gt, "gt"))


def initial_fusion(img_a, img_b, gmap):
    """Fusion_Ini = gmap * A + (1 - gmap) * B, per pixel per channel."""
    a = ensure_image(img_a, "img_a")
    b = ensure_image(img_b, "img_b")
    g = ensure_image(gmap, "gmap")
    same_shape(a, b, "img_a", "img_b")
    same_shape(a, g, "img_a", "gmap")
    ga = broadcast_mask(g, a)
    return ga * a + (1.0 - ga) * b


def boundary_map(gmap):
    """Bmap = 1 - |2*gmap - 1|: 1 on the 0.5 band, 0 at the 0/1 levels."""
    g = ensure_image(gmap, "gmap")
    return 1.0 - np.abs(2.0 * g - 1.0)


def final_fusion(img_a, img_b, gmap, corr: CorrectionSource):
    """Apply the boundary-masked correction to the initial fusion.

    Fusion_Fin = clamp(Fusion_Ini + Bmap * C, 0, 1); with zero correction
    the initial fusion is returned untouched (bit-exact).
    """
    ini = initial_fusion(img_a, img_b, gmap)
    if corr.kind == "zero":
        return ini
    if corr.kind == "image":
        c = corr.image
        same_shape(ini, c, "fusion", "correction")
        c = broadcast_mask(c, ini) if c.ndim < ini.ndim else c
    elif corr.kind == "oracle":
        if corr.gt is None:
            raise ValueError("oracle correction requires ground truth")
        same_shape(ini, corr.gt, "fusion", "gt")
        c = corr.gt - ini
    else:
        raise ValueError(f"unknown correction kind {corr.kind!r}")
    bmap = broadcast_mask(boundary_map(gmap), ini)
    return np.clip(ini + bmap * c, 0.0, 1.0)


def load_correction(path):
    """Read a signed correction from 16-bit PNG (0.5-bias encoding)."""
    img = load_png(path)
    return CorrectionSource.from_image(2.0 * img - 1.0)


def save_correction(corr_image, path):
    """Write a signed [-1, 1] correction as biased 16-bit PNG."""
    arr = ensure_image(corr_image, "correction")
    if arr.min() < -1 - 1e-9 or arr.max() > 1 + 1e-9:
        raise ValueError("correction values must lie in [-1, 1]")
    save_png((arr + 1.0) / 2.0, path, bit_depth=16)
