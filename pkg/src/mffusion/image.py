"""Floating-point image containers and primitives.

Images are numpy float64 arrays: (H, W) for single channel, (H, W, 3)
for RGB, values nominally in [0, 1]. All operations are pure.
"""

import math
import os

import cv2
import numpy as np


def ensure_image(img, name="image"):
    """Validate an array as an image and return it as float64."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim not in (2, 3):
        raise ValueError(f"{name}: expected 2-D or 3-D array, got shape {arr.shape}")
    if arr.ndim == 3 and arr.shape[2] != 3:
        raise ValueError(f"{name}: expected 1 or 3 channels, got {arr.shape[2]}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name}: empty image {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: contains non-finite samples")
    return arr


def same_shape(a, b, name_a="a", name_b="b"):
    if a.shape[:2] != b.shape[:2]:
        raise ValueError(
            f"dimension mismatch: {name_a} is {a.shape[:2]}, {name_b} is {b.shape[:2]}"
        )


def broadcast_mask(mask, img):
    """Expand a single-channel map so it multiplies an image of either layout."""
    if img.ndim == 3 and mask.ndim == 2:
        return mask[:, :, None]
    return mask


def gaussian_kernel(sigma):
    """1-D Gaussian taps truncated at radius ceil(3*sigma), renormalized.

    sigma = 0 yields the identity kernel [1].
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return np.array([1.0])
    radius = max(1, math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    # (x / sigma) ** 2 instead of x**2 / (2 sigma**2): stays finite for
    # subnormal sigma (underflows to a unit impulse rather than NaN).
    with np.errstate(over="ignore"):
        taps = np.exp(-0.5 * (x / sigma) ** 2)
    return taps / taps.sum()


def kernel_radius(sigma):
    """Truncation radius of the blur kernel for a given sigma."""
    if sigma == 0:
        return 0
    return max(1, math.ceil(3.0 * sigma))


def _convolve_axis(arr, taps, axis):
    # Sequential tap accumulation: deterministic summation order.
    radius = len(taps) // 2
    if radius == 0:
        return arr.copy()
    if arr.shape[axis] <= radius:
        raise ValueError(
            f"image extent {arr.shape[axis]} along axis {axis} too small for "
            f"blur radius {radius} with reflect-101 padding"
        )
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (radius, radius)
    padded = np.pad(arr, pad, mode="reflect")  # numpy 'reflect' is reflect-101
    out = np.zeros_like(arr)
    n = arr.shape[axis]
    index = [slice(None)] * arr.ndim
    for i, w in enumerate(taps):
        index[axis] = slice(i, i + n)
        out += w * padded[tuple(index)]
    return out


def gaussian_blur(img, sigma):
    """Separable Gaussian blur with reflect-101 boundary handling.

    Two 1-D passes (horizontal then vertical). sigma = 0 returns a copy.
    """
    arr = ensure_image(img)
    taps = gaussian_kernel(sigma)
    if len(taps) == 1:
        return arr.copy()
    out = _convolve_axis(arr, taps, axis=1)
    out = _convolve_axis(out, taps, axis=0)
    return out


def add_gaussian_noise(img, stddev, rng):
    """Optional additive zero-mean Gaussian noise stage (off by default upstream)."""
    arr = ensure_image(img)
    if stddev < 0:
        raise ValueError("noise stddev must be >= 0")
    if stddev == 0:
        return arr.copy()
    return arr + rng.normal(0.0, stddev, size=arr.shape)


def resize_bilinear(img, new_w, new_h):
    """Bilinear resize with center-aligned sampling and edge clamping."""
    arr = ensure_image(img)
    if new_w < 1 or new_h < 1:
        raise ValueError(f"target size must be >= 1, got {new_w}x{new_h}")
    h, w = arr.shape[:2]
    if (new_h, new_w) == (h, w):
        return arr.copy()

    def src_coords(n_dst, n_src):
        scale = n_src / n_dst
        c = (np.arange(n_dst) + 0.5) * scale - 0.5
        return np.clip(c, 0.0, n_src - 1.0)

    ys = src_coords(new_h, h)
    xs = src_coords(new_w, w)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = ys - y0
    fx = xs - x0
    if arr.ndim == 3:
        fy = fy[:, None, None]
        fx = fx[None, :, None]
    else:
        fy = fy[:, None]
        fx = fx[None, :]
    top = arr[y0][:, x0] * (1 - fx) + arr[y0][:, x1] * fx
    bot = arr[y1][:, x0] * (1 - fx) + arr[y1][:, x1] * fx
    return top * (1 - fy) + bot * fy


def to_grayscale(img):
    """RGB -> grayscale by unweighted channel mean; single channel passes through."""
    arr = ensure_image(img)
    if arr.ndim == 2:
        return arr.copy()
    return arr.mean(axis=2)


def load_png(path):
    """Load an 8- or 16-bit PNG as float64 in [0,1] (linear scale, no gamma)."""
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise OSError(f"cannot read PNG: {path}")
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise OSError(f"unsupported PNG sample type {raw.dtype}: {path}")
    if raw.ndim == 3:
        if raw.shape[2] != 3:
            raise OSError(f"unsupported channel count {raw.shape[2]}: {path}")
        raw = cv2.cvtColor(raw, cv2.COLOR_BGR2RGB)
    elif raw.ndim != 2:
        raise OSError(f"unsupported PNG layout {raw.shape}: {path}")
    return raw.astype(np.float64) / scale


def save_png(img, path, bit_depth=16):
    """Save [0,1] image as 8- or 16-bit PNG, atomically (temp file + rename)."""
    arr = ensure_image(img)
    if bit_depth == 8:
        maxval, dtype = 255, np.uint8
    elif bit_depth == 16:
        maxval, dtype = 65535, np.uint16
    else:
        raise ValueError(f"bit_depth must be 8 or 16, got {bit_depth}")
    quant = np.rint(np.clip(arr, 0.0, 1.0) * maxval).astype(dtype)
    if quant.ndim == 3:
        quant = cv2.cvtColor(quant, cv2.COLOR_RGB2BGR)
    path = str(path)
    tmp = path + ".tmp.png"
    if not cv2.imwrite(tmp, quant):
        raise OSError(f"cannot write PNG: {path}")
    os.replace(tmp, path)
