"""Guidance maps: three-level {0, 0.5, 1} source-selection maps.

1 means source A is focused, 0 means source B is focused, 0.5 marks the
band around the focused/defocused boundary. For synthetic pairs the map is
derived from the blurred matte; for real pairs a Laplacian-energy focus
measure stands in for a learned estimator, and externally produced maps
can be loaded from 8-bit PNGs with the {0, 128, 255} level convention.
"""

import numpy as np
from scipy import ndimage

from .errors import ValidationError
from .image import ensure_image, load_png, save_png, same_shape, to_grayscale

LEVELS = (0.0, 0.5, 1.0)
GMAP_PNG_LEVELS = {0.0: 0, 0.5: 128, 1.0: 255}
GUIDANCE_EPS = 1e-6


def make_guidance(matte_blur, fg_focused_in="A", eps=GUIDANCE_EPS):
    """Quantize a blurred matte to guidance levels.

    With the foreground focused in A: 1 where the matte is 1, 0 where it is
    0, 0.5 in between; the swapped case exchanges 0 and 1. Equality to the
    extremes is tested with tolerance eps because blurred mattes are
    floating point.
    """
    matte = ensure_image(matte_blur, "matte_blur")
    if matte.ndim != 2:
        raise ValueError("matte must be single channel")
    if matte.min() < -eps or matte.max() > 1 + eps:
        raise ValueError("matte values must lie in [0, 1]")
    if fg_focused_in not in ("A", "B"):
        raise ValueError(f"fg_focused_in must be 'A' or 'B', got {fg_focused_in!r}")
    gmap = np.full(matte.shape, 0.5)
    hi = matte >= 1.0 - eps
    lo = matte <= eps
    if fg_focused_in == "A":
        gmap[hi] = 1.0
        gmap[lo] = 0.0
    else:
        gmap[hi] = 0.0
        gmap[lo] = 1.0
    return gmap


def estimate_guidance(img_a, img_b, window=9, band_radius=6, majority_radius=7):
    """Classical guidance estimator from a pair of registered sources.

    Per-pixel focus measure is the local sum of the squared Laplacian over
    `window`; the binary decision (A sharper -> 1, ties -> 0) is cleaned by
    a majority filter and a 0.5 band is painted within band_radius of any
    0/1 transition.
    """
    a = ensure_image(img_a, "img_a")
    b = ensure_image(img_b, "img_b")
    same_shape(a, b, "img_a", "img_b")

    def focus_measure(img):
        gray = to_grayscale(img)
        lap = ndimage.laplace(gray, mode="mirror")
        return ndimage.uniform_filter(lap * lap, size=window, mode="mirror")

    decision = (focus_measure(a) > focus_measure(b)).astype(np.float64)
    maj_size = 2 * majority_radius + 1
    if majority_radius > 0:
        frac = ndimage.uniform_filter(decision, size=maj_size, mode="mirror")
        decision = (frac > 0.5).astype(np.float64)
    band_size = 2 * band_radius + 1
    lo = ndimage.minimum_filter(decision, size=band_size, mode="mirror")
    hi = ndimage.maximum_filter(decision, size=band_size, mode="mirror")
    gmap = decision.copy()
    gmap[lo != hi] = 0.5
    return gmap


def validate_guidance(gmap, band_radius=6):
    """Check level closure and band structure; returns a report dict."""
    gmap = ensure_image(gmap, "gmap")
    if gmap.ndim != 2:
        raise ValueError("guidance map must be single channel")
    off = ~np.isin(gmap, LEVELS)
    report = {"valid": True, "off_level": [], "band_ok": True}
    if off.any():
        coords = np.argwhere(off)[:10]
        report["valid"] = False
        report["off_level"] = [
            (int(r), int(c), float(gmap[r, c])) for r, c in coords
        ]
        return report
    mid = gmap == 0.5
    if mid.any() and not (gmap == gmap.flat[0]).all():
        size = 2 * band_radius + 1
        near0 = ndimage.minimum_filter(gmap, size=size, mode="mirror") == 0.0
        near1 = ndimage.maximum_filter(gmap, size=size, mode="mirror") == 1.0
        stray = mid & ~(near0 & near1)
        if stray.any():
            report["band_ok"] = False
            report["valid"] = False
            coords = np.argwhere(stray)[:10]
            report["off_level"] = [(int(r), int(c), 0.5) for r, c in coords]
    return report


def load_guidance(path, tolerance=2):
    """Load an 8-bit grayscale PNG guidance map, snapping near-level codes.

    Values within +/-tolerance of {0, 128, 255} snap to {0, 0.5, 1}; any
    other value raises ValidationError listing the first 10 offenders.
    """
    img = load_png(path)
    if img.ndim != 2:
        raise OSError(f"guidance map must be grayscale: {path}")
    codes = np.rint(img * 255.0)
    gmap = np.full(codes.shape, np.nan)
    for level, code in GMAP_PNG_LEVELS.items():
        gmap[np.abs(codes - code) <= tolerance] = level
    bad = np.isnan(gmap)
    if bad.any():
        coords = np.argwhere(bad)[:10]
        details = [(int(r), int(c), int(codes[r, c])) for r, c in coords]
        raise ValidationError(
            f"off-level guidance pixels in {path}: "
            + ", ".join(f"({r},{c})={v}" for r, c, v in details),
            details=details,
        )
    return gmap


def save_guidance(gmap, path):
    """Write a guidance map as 8-bit PNG with the {0, 128, 255} convention."""
    gmap = ensure_image(gmap, "gmap")
    if not np.isin(gmap, LEVELS).all():
        raise ValidationError("guidance map has off-level values")
    out = np.zeros(gmap.shape, dtype=np.float64)
    for level, code in GMAP_PNG_LEVELS.items():
        out[gmap == level] = code / 255.0
    save_png(out, path, bit_depth=8)
