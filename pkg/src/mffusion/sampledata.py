"""Deterministic synthetic assets for desk-scale runs, demos, and tests."""

import os

import numpy as np

from .image import gaussian_blur, save_png


def textured_image(size, seed, channels=3, smooth_sigma=1.5):
    """Smooth random texture in [0.05, 0.95] with visible local contrast."""
    rng = np.random.default_rng(seed)
    shape = (size, size) if channels == 1 else (size, size, channels)
    noise = rng.random(shape)
    tex = gaussian_blur(noise, smooth_sigma)
    lo, hi = tex.min(), tex.max()
    tex = (tex - lo) / max(hi - lo, 1e-12)
    return 0.05 + 0.9 * tex


def blob_matte(size, seed, n_blobs=3):
    """Binary matte of a few random rectangles merged into one region."""
    rng = np.random.default_rng(seed)
    matte = np.zeros((size, size))
    for _ in range(n_blobs):
        h = rng.integers(size // 4, size // 2)
        w = rng.integers(size // 4, size // 2)
        r0 = rng.integers(size // 8, size - h - size // 8)
        c0 = rng.integers(size // 8, size - w - size // 8)
        matte[r0 : r0 + h, c0 : c0 + w] = 1.0
    return matte


def write_demo_catalog(root, n_foregrounds=3, n_backgrounds=4, size=128):
    """Write textured foreground/matte/background PNGs plus a catalog dict."""
    fg_dir = os.path.join(root, "fg")
    bg_dir = os.path.join(root, "bg")
    os.makedirs(fg_dir, exist_ok=True)
    os.makedirs(bg_dir, exist_ok=True)
    foregrounds = []
    for i in range(n_foregrounds):
        color = textured_image(size, seed=100 + i)
        matte = blob_matte(size, seed=200 + i)
        color_path = os.path.join(fg_dir, f"fg{i:02d}.png")
        matte_path = os.path.join(fg_dir, f"fg{i:02d}_matte.png")
        save_png(color, color_path, bit_depth=16)
        save_png(matte, matte_path, bit_depth=8)
        foregrounds.append((color_path, matte_path))
    backgrounds = []
    for i in range(n_backgrounds):
        bg = textured_image(size, seed=300 + i, smooth_sigma=1.0)
        path = os.path.join(bg_dir, f"bg{i:02d}.png")
        save_png(bg, path, bit_depth=16)
        backgrounds.append(path)
    return {"foregrounds": foregrounds, "backgrounds": backgrounds}
