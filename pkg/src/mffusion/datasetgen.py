"""Synthetic multi-focus training-pair generation.

A pair is built from a foreground (premultiplied color + clear matte) over
a background: one source has the foreground in focus and the background
blurred, the other the reverse, with ground truth being the unblurred
composite. The same sigma blurs foreground, background, and matte by
default. Generation is deterministic: every random draw comes from a
counter-based key (seed, fg_index[, pair_index]), so results do not depend
on execution order.
"""

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .guidance import GMAP_PNG_LEVELS, make_guidance
from .image import (
    broadcast_mask,
    ensure_image,
    gaussian_blur,
    load_png,
    resize_bilinear,
    same_shape,
    save_png,
)


@dataclass(frozen=True)
class GenConfig:
    out_size: int = 512
    backgrounds_per_fg: int = 20
    sigma_min: float = 1.0
    sigma_max: float = 5.0
    swap_probability: float = 0.5
    seed: int = 0
    noise_stddev: float = 0.0  # off by default

    def validate(self):
        if self.out_size < 64:
            raise ValueError(f"out_size must be >= 64, got {self.out_size}")
        if not (0.5 <= self.sigma_min <= self.sigma_max <= 10.0):
            raise ValueError(
                f"sigma range must satisfy 0.5 <= min <= max <= 10, "
                f"got [{self.sigma_min}, {self.sigma_max}]"
            )
        if self.backgrounds_per_fg < 1:
            raise ValueError("backgrounds_per_fg must be >= 1")
        if not (0.0 <= self.swap_probability <= 1.0):
            raise ValueError("swap_probability must be in [0, 1]")
        return self


@dataclass(frozen=True)
class AssetCatalog:
    """Foreground (color, matte) path pairs and background image paths."""

    foregrounds: tuple  # of (color_path, matte_path)
    backgrounds: tuple

    def __post_init__(self):
        fgs = tuple((str(c), str(m)) for c, m in self.foregrounds)
        bgs = tuple(str(p) for p in self.backgrounds)
        if not fgs or not bgs:
            raise ValueError("catalog needs at least one foreground and one background")
        object.__setattr__(self, "foregrounds", fgs)
        object.__setattr__(self, "backgrounds", bgs)

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            doc = json.load(fh)
        return cls(
            foregrounds=tuple((e[0], e[1]) for e in doc["foregrounds"]),
            backgrounds=tuple(doc["backgrounds"]),
        )


@dataclass
class FusionPair:
    img_a: np.ndarray
    img_b: np.ndarray
    gt: np.ndarray
    matte_clear: np.ndarray
    matte_blur: np.ndarray
    gmap: np.ndarray
    sigma_used: float
    fg_focused_in: str  # 'A' or 'B'


def predicted_pair_count(n_foregrounds, cfg: GenConfig):
    """Pairs the generator will emit for a catalog of this size."""
    cfg.validate()
    return n_foregrounds * cfg.backgrounds_per_fg


def generate_pair(fg_surface, fg_matte, bg, sigma, swap=False, sigma_bg=None):
    """Build one multi-focus pair from premultiplied foreground assets.

    sigma blurs foreground surface, matte, and background alike (the
    default); pass sigma_bg to decouple the background blur.
    """
    fg_surface = ensure_image(fg_surface, "fg_surface")
    fg_matte = ensure_image(fg_matte, "fg_matte")
    bg = ensure_image(bg, "bg")
    same_shape(fg_surface, fg_matte, "fg_surface", "fg_matte")
    same_shape(fg_surface, bg, "fg_surface", "bg")
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma_bg is None:
        sigma_bg = sigma

    fg_blur = gaussian_blur(fg_surface, sigma)
    matte_blur = gaussian_blur(fg_matte, sigma)
    bg_blur = gaussian_blur(bg, sigma_bg)

    inv_clear = broadcast_mask(1.0 - fg_matte, bg)
    inv_blur = broadcast_mask(1.0 - matte_blur, bg)
    img_s1 = fg_surface + inv_clear * bg_blur  # FG in focus, BG defocused
    img_s2 = fg_blur + inv_blur * bg  # FG defocused, BG in focus
    gt = fg_surface + inv_clear * bg

    fg_focused_in = "B" if swap else "A"
    gmap = make_guidance(np.clip(matte_blur, 0.0, 1.0), fg_focused_in)
    if swap:
        img_a, img_b = img_s2, img_s1
    else:
        img_a, img_b = img_s1, img_s2
    return FusionPair(
        img_a=img_a,
        img_b=img_b,
        gt=gt,
        matte_clear=fg_matte,
        matte_blur=matte_blur,
        gmap=gmap,
        sigma_used=float(sigma),
        fg_focused_in=fg_focused_in,
    )


def prepare_foreground(color, matte, out_size):
    """Scale the shorter side to out_size, center-crop, premultiply."""
    same_shape(color, matte, "fg color", "fg matte")
    h, w = color.shape[:2]
    scale = out_size / min(h, w)
    new_h = max(out_size, int(round(h * scale)))
    new_w = max(out_size, int(round(w * scale)))
    color = resize_bilinear(color, new_w, new_h)
    matte = resize_bilinear(matte, new_w, new_h)
    r0 = (new_h - out_size) // 2
    c0 = (new_w - out_size) // 2
    color = color[r0 : r0 + out_size, c0 : c0 + out_size]
    matte = matte[r0 : r0 + out_size, c0 : c0 + out_size]
    matte = np.clip(matte, 0.0, 1.0)
    return color * broadcast_mask(matte, color), matte


def prepare_background(bg, out_size):
    return resize_bilinear(bg, out_size, out_size)


def _pair_rng(seed, fg_index, pair_index):
    return np.random.default_rng(np.random.SeedSequence((seed, fg_index, pair_index)))


def _fg_rng(seed, fg_index):
    return np.random.default_rng(np.random.SeedSequence((seed, fg_index)))


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def save_pair(pair: FusionPair, pair_dir):
    """Write the standard per-pair file layout, returning file paths."""
    os.makedirs(pair_dir, exist_ok=True)
    files = {}
    for name, img, depth in (
        ("a", pair.img_a, 16),
        ("b", pair.img_b, 16),
        ("gt", pair.gt, 16),
        ("matte", pair.matte_clear, 16),
    ):
        p = os.path.join(pair_dir, f"{name}.png")
        save_png(img, p, bit_depth=depth)
        files[name] = p
    gmap_path = os.path.join(pair_dir, "gmap.png")
    gmap8 = np.zeros(pair.gmap.shape, dtype=np.float64)
    for level, code in GMAP_PNG_LEVELS.items():
        gmap8[pair.gmap == level] = code / 255.0
    save_png(gmap8, gmap_path, bit_depth=8)
    files["gmap"] = gmap_path
    return files


def generate_dataset(catalog: AssetCatalog, cfg: GenConfig, out_dir):
    """Generate the full dataset and write a reproducible manifest.

    Per foreground, backgrounds are sampled without replacement; sigma is
    uniform in [sigma_min, sigma_max]; source order swaps with the
    configured probability. I/O failures skip the pair and are recorded.
    """
    cfg.validate()
    os.makedirs(out_dir, exist_ok=True)
    pairs_dir = os.path.join(out_dir, "pairs")
    os.makedirs(pairs_dir, exist_ok=True)
    records = []
    errors = []
    n_bg = len(catalog.backgrounds)
    if cfg.backgrounds_per_fg > n_bg:
        raise ValueError(
            f"backgrounds_per_fg ({cfg.backgrounds_per_fg}) exceeds catalog "
            f"backgrounds ({n_bg})"
        )
    for fg_index, (color_path, matte_path) in enumerate(catalog.foregrounds):
        bg_choice = _fg_rng(cfg.seed, fg_index).choice(
            n_bg, size=cfg.backgrounds_per_fg, replace=False
        )
        try:
            fg_color = load_png(color_path)
            fg_matte_raw = load_png(matte_path)
            if fg_matte_raw.ndim == 3:
                fg_matte_raw = fg_matte_raw.mean(axis=2)
            fg_surface, fg_matte = prepare_foreground(
                fg_color, fg_matte_raw, cfg.out_size
            )
        except (OSError, ValueError) as exc:
            errors.append({"foreground": color_path, "error": str(exc)})
            continue
        for pair_index, bg_idx in enumerate(bg_choice):
            pair_id = f"{fg_index:04d}_{pair_index:03d}"
            rng = _pair_rng(cfg.seed, fg_index, pair_index)
            sigma = float(rng.uniform(cfg.sigma_min, cfg.sigma_max))
            swap = bool(rng.random() < cfg.swap_probability)
            bg_path = catalog.backgrounds[int(bg_idx)]
            try:
                bg = prepare_background(load_png(bg_path), cfg.out_size)
                pair = generate_pair(fg_surface, fg_matte, bg, sigma, swap=swap)
                files = save_pair(pair, os.path.join(pairs_dir, pair_id))
            except (OSError, ValueError) as exc:
                errors.append({"pair": pair_id, "error": str(exc)})
                continue
            records.append(
                {
                    "id": pair_id,
                    "sigma": sigma,
                    "swap": swap,
                    "fg_focused_in": pair.fg_focused_in,
                    "foreground": color_path,
                    "matte": matte_path,
                    "background": bg_path,
                    "files": {
                        k: os.path.relpath(v, out_dir) for k, v in files.items()
                    },
                    "sha256": {
                        k: _sha256(v) for k, v in sorted(files.items())
                    },
                }
            )
    manifest = {
        "config": {
            "out_size": cfg.out_size,
            "backgrounds_per_fg": cfg.backgrounds_per_fg,
            "sigma_min": cfg.sigma_min,
            "sigma_max": cfg.sigma_max,
            "swap_probability": cfg.swap_probability,
            "seed": cfg.seed,
            "noise_stddev": cfg.noise_stddev,
        },
        "pair_count": len(records),
        "pairs": records,
        "errors": errors,
    }
    manifest_path = os.path.join(out_dir, "manifest.json")
    tmp = manifest_path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, manifest_path)
    return manifest
