"""Layered defocus models.

Three renderers with increasing fidelity around focused/defocused
boundaries:

* one-parameter: a single space-invariant Gaussian blur of the image;
* two-parameter: two half-plane regions blurred with independent sigmas
  and summed (mask-then-blur);
* alpha-matte: front-to-back layer compositing where each layer's color
  surface and transmission matte are blurred together, so an out-of-focus
  foreground spreads over the background while an in-focus foreground
  stays crisp regardless of background blur.

Layer surfaces are stored premultiplied by their clear matte, which makes
the composite a plain weighted sum and the partition-of-unity property
exact.
"""

from dataclasses import dataclass, field

import numpy as np
import yaml

from .image import (
    broadcast_mask,
    ensure_image,
    gaussian_blur,
    load_png,
    same_shape,
)


@dataclass(frozen=True)
class Layer:
    """One scene surface: premultiplied color, transmission matte, blur sigma."""

    surface: np.ndarray
    matte: np.ndarray
    sigma: float

    def __post_init__(self):
        surface = ensure_image(self.surface, "surface")
        matte = ensure_image(self.matte, "matte")
        if matte.ndim != 2:
            raise ValueError("matte must be single channel")
        same_shape(surface, matte, "surface", "matte")
        if self.sigma < 0:
            raise ValueError(f"layer sigma must be >= 0, got {self.sigma}")
        if matte.min() < -1e-9 or matte.max() > 1 + 1e-9:
            raise ValueError("matte values must lie in [0, 1]")
        if np.any(surface > broadcast_mask(matte, surface) + 1e-9):
            raise ValueError("surface must be premultiplied: channel <= matte")
        object.__setattr__(self, "surface", surface)
        object.__setattr__(self, "matte", matte)


@dataclass(frozen=True)
class Scene:
    """Ordered layers, index 0 nearest the camera, last farthest."""

    layers: tuple = field(default_factory=tuple)

    def __post_init__(self):
        layers = tuple(self.layers)
        if len(layers) < 1:
            raise ValueError("scene needs at least one layer")
        first = layers[0]
        for layer in layers[1:]:
            same_shape(first.surface, layer.surface, "layer 0", "layer")
            if layer.surface.ndim != first.surface.ndim:
                raise ValueError("all layers must share channel count")
        object.__setattr__(self, "layers", layers)

    @property
    def shape(self):
        return self.layers[0].surface.shape


@dataclass(frozen=True)
class BoundaryLineScene:
    """Two full-frame images split by the line a*x + b*y + c = 0."""

    fa: np.ndarray
    fb: np.ndarray
    line: tuple  # (a, b, c)
    sigma_a: float
    sigma_b: float

    def __post_init__(self):
        fa = ensure_image(self.fa, "fa")
        fb = ensure_image(self.fb, "fb")
        same_shape(fa, fb, "fa", "fb")
        a, b, c = self.line
        if a == 0 and b == 0:
            raise ValueError("line coefficients (a, b) must not both be zero")
        if self.sigma_a < 0 or self.sigma_b < 0:
            raise ValueError("sigmas must be >= 0")
        object.__setattr__(self, "fa", fa)
        object.__setattr__(self, "fb", fb)
        object.__setattr__(self, "line", (float(a), float(b), float(c)))


def render_one_param(img, sigma, noise_stddev=0.0, rng=None):
    """Space-invariant defocus: one Gaussian blur of the whole image."""
    out = gaussian_blur(img, sigma)
    if noise_stddev > 0:
        if rng is None:
            rng = np.random.default_rng(0)
        out = out + rng.normal(0.0, noise_stddev, size=out.shape)
    return out


def halfplane_mask(shape, line):
    """Step-function mask of the A side; boundary pixels (=0) belong to A."""
    a, b, c = line
    h, w = shape[:2]
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    return (a * xs + b * ys + c >= 0).astype(np.float64)


def render_two_param(scene: BoundaryLineScene):
    """Two-sided boundary defocus: mask each side, blur with its own sigma, sum."""
    mask_a = halfplane_mask(scene.fa.shape, scene.line)
    mask_b = 1.0 - mask_a
    term_a = gaussian_blur(scene.fa * broadcast_mask(mask_a, scene.fa), scene.sigma_a)
    term_b = gaussian_blur(scene.fb * broadcast_mask(mask_b, scene.fb), scene.sigma_b)
    return term_a + term_b


def render_alpha_matte(scene: Scene):
    """Front-to-back layered defocus composite.

    For each layer (near to far): blur matte and premultiplied surface with
    the layer sigma, attenuate by the visibility left over from nearer
    layers, and accumulate. Returns (image, effective mattes, per-layer
    contributions).
    """
    first = scene.layers[0].surface
    image = np.zeros_like(first)
    visibility = np.ones(first.shape[:2], dtype=np.float64)
    mattes = []
    layer_images = []
    for layer in scene.layers:
        matte0 = gaussian_blur(layer.matte, layer.sigma)
        surface = gaussian_blur(layer.surface, layer.sigma)
        matte_eff = matte0 * visibility
        contrib = broadcast_mask(visibility, surface) * surface
        image = image + contrib
        mattes.append(matte_eff)
        layer_images.append(contrib)
        visibility = visibility - matte_eff
    return image, mattes, layer_images


def compose_two_surface(fg: Layer, bg: Layer):
    """Two-layer composite: I = S_FG + (1 - alpha_FG) * S_BG, all blurred."""
    same_shape(fg.surface, bg.surface, "fg", "bg")
    s_fg = gaussian_blur(fg.surface, fg.sigma)
    a_fg = gaussian_blur(fg.matte, fg.sigma)
    s_bg = gaussian_blur(bg.surface, bg.sigma)
    return s_fg + broadcast_mask(1.0 - a_fg, s_bg) * s_bg


def hard_region_map(scene: Scene):
    """Front-most layer index owning each pixel (matte >= 0.5), clear mattes."""
    h, w = scene.shape[:2]
    owner = np.full((h, w), len(scene.layers) - 1, dtype=int)
    taken = np.zeros((h, w), dtype=bool)
    for n, layer in enumerate(scene.layers):
        hit = (layer.matte >= 0.5) & ~taken
        owner[hit] = n
        taken |= hit
    return owner


def render_one_param_regions(scene: Scene):
    """One-parameter model applied region-wise to a layered scene.

    Blurs the all-in-focus composite with each layer's sigma and picks the
    blurred pixels inside that layer's visible region. No spread crosses
    region boundaries, which is exactly this model's deficiency.
    """
    aif = render_all_in_focus(scene)
    owner = hard_region_map(scene)
    out = np.zeros_like(aif)
    for n, layer in enumerate(scene.layers):
        region = owner == n
        if not region.any():
            continue
        blurred = gaussian_blur(aif, layer.sigma)
        sel = broadcast_mask(region.astype(np.float64), aif)
        out = out + sel * blurred
    return out


def render_all_in_focus(scene: Scene):
    """Composite the scene with every sigma forced to zero."""
    zero = Scene(tuple(Layer(l.surface, l.matte, 0.0) for l in scene.layers))
    image, _, _ = render_alpha_matte(zero)
    return image


FIG7_RECTS = {
    1: (60, 200, 18, 108),
    2: (40, 216, 84, 176),
    3: (56, 208, 150, 238),
}
FIG7_COLORS = {
    1: (0.85, 0.20, 0.20),
    2: (0.95, 0.85, 0.20),
    3: (0.20, 0.60, 0.90),
}
FIG7_BACKDROP = (0.45, 0.45, 0.45)
FIG7_SIZE = 256
FIG7_SIGMA_NEAR = 4.0
FIG7_SIGMA_FAR = 2.0


def make_fig7_scene(focus_layer, sigma_near=FIG7_SIGMA_NEAR, sigma_far=FIG7_SIGMA_FAR):
    """Deterministic three-object fixture scene plus opaque backdrop.

    Three flat-color rectangles at three depths over a gray backdrop.
    The focused layer gets sigma 0; layers nearer the camera get
    sigma_near, farther ones sigma_far.
    """
    if focus_layer not in (1, 2, 3):
        raise ValueError(f"focus_layer must be 1, 2 or 3, got {focus_layer}")
    size = FIG7_SIZE
    layers = []
    for n in (1, 2, 3):
        r0, r1, c0, c1 = FIG7_RECTS[n]
        matte = np.zeros((size, size))
        matte[r0:r1, c0:c1] = 1.0
        color = np.array(FIG7_COLORS[n])
        surface = matte[:, :, None] * color[None, None, :]
        if n == focus_layer:
            sigma = 0.0
        elif n < focus_layer:
            sigma = sigma_near
        else:
            sigma = sigma_far
        layers.append(Layer(surface, matte, sigma))
    backdrop_matte = np.ones((size, size))
    backdrop = np.ones((size, size, 3)) * np.array(FIG7_BACKDROP)[None, None, :]
    layers.append(Layer(backdrop, backdrop_matte, sigma_far))
    return Scene(tuple(layers))


def load_scene_file(path):
    """Parse a YAML scene description.

    Layered scene:
        layers:
          - surface: fg.png
            matte: fg_matte.png
            sigma: 2.0
    Two-parameter scene:
        two_param:
          fa: a.png
          fb: b.png
          line: [1, 0, -128]
          sigma_a: 3.0
          sigma_b: 0.0

    Surface PNGs are straight color; they are premultiplied by the matte
    on load. Relative paths resolve against the scene file's directory.
    Returns a Scene or a BoundaryLineScene.
    """
    import os

    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else "?"
        raise ValueError(f"scene file parse error at line {line}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError("scene file must be a mapping")
    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(base, p)

    if "two_param" in doc:
        spec = doc["two_param"]
        try:
            return BoundaryLineScene(
                fa=load_png(resolve(spec["fa"])),
                fb=load_png(resolve(spec["fb"])),
                line=tuple(float(v) for v in spec["line"]),
                sigma_a=float(spec["sigma_a"]),
                sigma_b=float(spec["sigma_b"]),
            )
        except KeyError as exc:
            raise ValueError(f"two_param scene missing key {exc}") from exc
    if "layers" not in doc:
        raise ValueError("scene file needs a 'layers' list or a 'two_param' block")
    layers = []
    for i, entry in enumerate(doc["layers"]):
        try:
            color = load_png(resolve(entry["surface"]))
            matte = load_png(resolve(entry["matte"]))
            sigma = float(entry["sigma"])
        except KeyError as exc:
            raise ValueError(f"layer {i} missing key {exc}") from exc
        if matte.ndim == 3:
            matte = matte.mean(axis=2)
        layers.append(Layer(color * broadcast_mask(matte, color), matte, sigma))
    return Scene(tuple(layers))
