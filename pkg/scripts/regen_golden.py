"""Regenerate the checked-in golden render used by the regression tests.

The golden is the layered alpha-composite render of the built-in
three-object scene with the middle object in focus, quantized to 16-bit PNG.
Rerun this only after an intentional change to the renderer, and review the
image diff before committing.
"""

import os

import numpy as np

from mffusion.defocus import make_fig7_scene, render_alpha_matte
from mffusion.image import save_png

GOLDEN = os.path.join(os.path.dirname(__file__), os.pardir,
                      "tests", "data", "fig7_focus2_golden.png")


def main():
    image, _, _ = render_alpha_matte(make_fig7_scene(2))
    save_png(np.clip(image, 0, 1), GOLDEN, bit_depth=16)
    print(f"wrote {os.path.normpath(GOLDEN)}")


if __name__ == "__main__":
    main()
