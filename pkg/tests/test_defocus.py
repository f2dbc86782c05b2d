import numpy as np
import pytest
from scipy import ndimage

from mffusion.defocus import (
    BoundaryLineScene,
    Layer,
    Scene,
    compose_two_surface,
    halfplane_mask,
    make_fig7_scene,
    render_all_in_focus,
    render_alpha_matte,
    render_one_param,
    render_one_param_regions,
    render_two_param,
)
from mffusion.image import gaussian_blur, kernel_radius, load_png, save_png
from mffusion.sampledata import textured_image
from oracles import dense_gaussian_blur

from conftest import DATA_DIR


def random_scene(rng, size=32, n_layers=3, sigma_max=5.0, opaque_back=True):
    layers = []
    for n in range(n_layers):
        if n == n_layers - 1 and opaque_back:
            matte = np.ones((size, size))
        else:
            matte = np.zeros((size, size))
            r0, c0 = rng.integers(0, size // 2, 2)
            h, w = rng.integers(size // 4, size // 2, 2)
            matte[r0 : r0 + h, c0 : c0 + w] = 1.0
        color = rng.random(3)
        surface = matte[:, :, None] * color[None, None, :]
        sigma = float(rng.uniform(0, sigma_max))
        layers.append(Layer(surface, matte, sigma))
    return Scene(tuple(layers))


class TestLayerInvariants:
    def test_matte_range_enforced(self, rng):
        with pytest.raises(ValueError):
            Layer(np.zeros((4, 4)), np.full((4, 4), 1.5), 0.0)

    def test_premultiplication_enforced(self):
        matte = np.full((4, 4), 0.5)
        with pytest.raises(ValueError):
            Layer(np.ones((4, 4)), matte, 0.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            Layer(np.zeros((4, 4)), np.zeros((5, 4)), 0.0)


class TestOneParam:
    def test_sigma_zero_unchanged(self, rng):
        img = rng.random((10, 10))
        assert np.array_equal(render_one_param(img, 0), img)

    def test_step_edge_matches_dense_oracle(self):
        img = np.zeros((24, 24))
        img[:, 12:] = 1.0
        out = render_one_param(img, 2.0)
        assert np.abs(out - dense_gaussian_blur(img, 2.0)).max() < 1e-10

    def test_no_spread_inside_focused_region(self):
        # Region-wise one-parameter render: the in-focus object's pixels
        # are untouched, the model's documented deficiency.
        scene = make_fig7_scene(2)
        aif = render_all_in_focus(scene)
        out = render_one_param_regions(scene)
        vis2 = (scene.layers[1].matte == 1) & (scene.layers[0].matte == 0)
        diff = np.abs(out - aif).max(axis=2)
        assert diff[vis2].max() == 0.0


class TestTwoParam:
    def line_scene(self, fa, fb, sa, sb):
        return BoundaryLineScene(fa, fb, (1.0, 0.0, -float(fa.shape[1] // 2)), sa, sb)

    def test_zero_sigmas_hard_splice(self, rng):
        fa = rng.random((16, 16))
        fb = rng.random((16, 16))
        scene = self.line_scene(fa, fb, 0.0, 0.0)
        mask = halfplane_mask(fa.shape, scene.line)
        assert np.array_equal(render_two_param(scene), fa * mask + fb * (1 - mask))

    def test_partition_identity_same_image(self, rng):
        f = rng.random((20, 20))
        scene = self.line_scene(f, f, 2.0, 2.0)
        assert np.abs(render_two_param(scene) - gaussian_blur(f, 2.0)).max() < 1e-9

    def test_boundary_pixel_belongs_to_side_a(self):
        fa = np.ones((8, 8))
        fb = np.zeros((8, 8))
        scene = BoundaryLineScene(fa, fb, (1.0, 0.0, -4.0), 0.0, 0.0)
        out = render_two_param(scene)
        assert out[0, 4] == 1.0  # x = 4 is on the line, assigned to A

    def test_white_black_profile_matches_dense_oracle(self):
        fa = np.ones((24, 24))
        fb = np.zeros((24, 24))
        scene = self.line_scene(fa, fb, 3.0, 0.0)
        mask = halfplane_mask(fa.shape, scene.line)
        expected = dense_gaussian_blur(fa * mask, 3.0)  # B term is zero
        out = render_two_param(scene)
        assert np.abs(out - expected).max() < 1e-10
        # A's blur spreads symmetrically across the line on both sides.
        profile = out[12, :]
        assert profile[12 - 3] < 1.0 and profile[12 + 2] > 0.0

    def test_degenerate_line_rejected(self, rng):
        with pytest.raises(ValueError):
            BoundaryLineScene(rng.random((4, 4)), rng.random((4, 4)), (0, 0, 1), 1, 1)


class TestAlphaMatte:
    def test_binary_matte_sigma_zero_hard_composite(self, rng):
        size = 16
        matte = np.zeros((size, size))
        matte[4:10, 5:12] = 1.0
        fg_color = rng.random((size, size, 3)) * matte[:, :, None]
        bg = rng.random((size, size, 3))
        scene = Scene(
            (
                Layer(fg_color, matte, 0.0),
                Layer(bg, np.ones((size, size)), 0.0),
            )
        )
        image, _, _ = render_alpha_matte(scene)
        expected = fg_color + (1 - matte[:, :, None]) * bg
        assert np.array_equal(image, expected)

    def test_constant_color_partition_of_unity(self, rng):
        c = np.array([0.3, 0.6, 0.9])
        size = 36
        layers = []
        for n in range(4):
            if n == 3:
                matte = np.ones((size, size))
            else:
                matte = np.zeros((size, size))
                matte[4 + 3 * n : 20 + 3 * n, 6 : 20 + n] = 1.0
            surface = matte[:, :, None] * c[None, None, :]
            layers.append(Layer(surface, matte, float(rng.uniform(0, 4))))
        image, _, _ = render_alpha_matte(Scene(tuple(layers)))
        assert np.abs(image - c[None, None, :]).max() < 1e-6

    @pytest.mark.parametrize("seed", range(5))
    def test_matte_bounds_and_prefix_sums(self, seed):
        rng = np.random.default_rng(seed)
        scene = random_scene(rng, n_layers=int(rng.integers(3, 6)))
        _, mattes, _ = render_alpha_matte(scene)
        prefix = np.zeros(scene.shape[:2])
        for matte in mattes:
            assert matte.min() >= -1e-9
            assert matte.max() <= 1 + 1e-9
            prefix = prefix + matte
            assert prefix.max() <= 1 + 1e-9

    def test_partition_of_unity_opaque_back(self, rng):
        scene = random_scene(rng, n_layers=4)
        _, mattes, _ = render_alpha_matte(scene)
        total = sum(mattes)
        assert np.abs(total - 1.0).max() < 1e-6

    def test_in_focus_foreground_unaffected_by_background_blur(self, rng):
        size = 24
        matte = np.zeros((size, size))
        matte[6:16, 6:18] = 1.0
        fg = Layer(rng.random((size, size, 3)) * matte[:, :, None], matte, 0.0)
        for sigma_bg in (0.0, 1.0, 3.0):
            bg = Layer(rng.random((size, size, 3)), np.ones((size, size)), sigma_bg)
            image, _, _ = render_alpha_matte(Scene((fg, bg)))
            assert np.array_equal(
                image[6:16, 6:18], fg.surface[6:16, 6:18]
            ), f"sigma_bg={sigma_bg}"

    def test_spread_asymmetry(self, rng):
        size = 32
        matte = np.zeros((size, size))
        matte[8:20, 8:22] = 1.0
        fg_color = rng.random((size, size, 3)) * matte[:, :, None]
        bg_img = rng.random((size, size, 3))
        ones = np.ones((size, size))

        # Blurred FG changes background pixels within its spread radius.
        fg_blur = Layer(fg_color, matte, 2.0)
        bg_sharp = Layer(bg_img, ones, 0.0)
        with_fg_blur, _, _ = render_alpha_matte(Scene((fg_blur, bg_sharp)))
        ref = fg_color + (1 - matte[:, :, None]) * bg_img
        outside_near = (matte == 0) & (ndimage.maximum_filter(matte, size=5) > 0)
        assert np.abs(with_fg_blur - ref).max(axis=2)[outside_near].max() > 0.01

        # Blurred BG never changes pixels under an in-focus FG matte of 1.
        fg_sharp = Layer(fg_color, matte, 0.0)
        bg_blur = Layer(bg_img, ones, 3.0)
        with_bg_blur, _, _ = render_alpha_matte(Scene((fg_sharp, bg_blur)))
        inside = matte == 1
        assert np.array_equal(with_bg_blur[inside], ref[inside])


class TestComposeTwoSurface:
    def test_opaque_region_shows_foreground(self, rng):
        size = 20
        matte = np.ones((size, size))
        fg = Layer(rng.random((size, size)), matte, 0.0)
        bg = Layer(rng.random((size, size)), np.ones((size, size)), 4.0)
        out = compose_two_surface(fg, bg)
        assert np.array_equal(out, fg.surface)

    def test_far_empty_region_shows_background(self, rng):
        size = 32
        matte = np.zeros((size, size))
        matte[2:8, 2:8] = 1.0
        sigma = 1.5
        fg = Layer(matte * 0.8, matte, sigma)
        bg = Layer(rng.random((size, size)), np.ones((size, size)), 0.0)
        out = compose_two_surface(fg, bg)
        r = kernel_radius(sigma)
        far = ndimage.maximum_filter(matte, size=2 * r + 1) == 0
        assert np.array_equal(out[far], bg.surface[far])

    @pytest.mark.parametrize("seed", range(4))
    def test_cross_oracle_against_alpha_matte(self, seed):
        rng = np.random.default_rng(seed)
        scene = random_scene(rng, n_layers=2)
        fg, bg = scene.layers
        composed = compose_two_surface(fg, bg)
        rendered, _, _ = render_alpha_matte(scene)
        assert np.abs(composed - rendered).max() < 1e-12


class TestFig7Fixture:
    def test_focus_layer_construction(self):
        scene = make_fig7_scene(2)
        assert scene.layers[1].sigma == 0.0
        assert set(np.unique(scene.layers[1].matte)) == {0.0, 1.0}
        assert scene.layers[0].sigma == 4.0
        assert scene.layers[2].sigma == 2.0

    def test_index_out_of_range(self):
        with pytest.raises(ValueError):
            make_fig7_scene(4)

    def test_all_sigma_zero_equals_all_in_focus(self):
        scene = make_fig7_scene(2)
        zero = Scene(tuple(Layer(l.surface, l.matte, 0.0) for l in scene.layers))
        image, _, _ = render_alpha_matte(zero)
        assert np.array_equal(image, render_all_in_focus(scene))

    def test_occlusion_and_spread_patterns(self):
        scene = make_fig7_scene(2)
        image, _, _ = render_alpha_matte(scene)
        aif = render_all_in_focus(scene)
        obj1, obj2 = scene.layers[0].matte, scene.layers[1].matte
        r1 = kernel_radius(scene.layers[0].sigma)
        vis2 = (obj2 == 1) & (obj1 == 0)
        near1 = ndimage.maximum_filter(obj1, size=2 * r1 + 1) > 0
        diff = np.abs(image - aif).max(axis=2)
        # In-focus object 2 away from the blurred object 1: identical.
        assert diff[vis2 & ~near1].max() < 1e-9
        # Object-2 pixels near the object-1 boundary: defocus spread.
        assert diff[vis2 & near1].max() > 0.01

    def test_one_param_differs_near_object1_boundary(self):
        scene = make_fig7_scene(2)
        matte_render, _, _ = render_alpha_matte(scene)
        one = render_one_param_regions(scene)
        obj1, obj2 = scene.layers[0].matte, scene.layers[1].matte
        r1 = kernel_radius(scene.layers[0].sigma)
        band = (obj2 == 1) & (obj1 == 0) & (ndimage.maximum_filter(obj1, size=2 * r1 + 1) > 0)
        assert np.abs(one - matte_render).max(axis=2)[band].max() > 0.01

    def test_golden_render_byte_exact(self, tmp_path):
        golden = DATA_DIR / "fig7_focus2_golden.png"
        image, _, _ = render_alpha_matte(make_fig7_scene(2))
        out = tmp_path / "render.png"
        save_png(np.clip(image, 0, 1), out, bit_depth=16)
        assert out.read_bytes() == golden.read_bytes()


class TestModelCrossCheck:
    """Two-parameter vs alpha-matte on complementary half-plane scenes.

    The models agree exactly on the half-plane behind the boundary term
    that carries no blur bleed; near the boundary they diverge because the
    two-parameter model lets blur cross an in-focus silhouette (its
    anti-gradient defect). Full-image equality does not hold in either
    focus configuration; see the blurred-front assertion required below.
    """

    def make_pair(self, sigma_a, sigma_b, size=48):
        fa = textured_image(size, 1, channels=1)
        fb = textured_image(size, 2, channels=1)
        line = (1.0, 0.0, -float(size // 2))
        mask = halfplane_mask((size, size), line)
        two = render_two_param(BoundaryLineScene(fa, fb, line, sigma_a, sigma_b))
        scene = Scene(
            (
                Layer(fa * mask, mask, sigma_a),
                Layer(fb * (1 - mask), 1 - mask, sigma_b),
            )
        )
        alpha, _, _ = render_alpha_matte(scene)
        return two, alpha, mask

    def test_front_blurred_measurable_difference(self):
        two, alpha, _ = self.make_pair(sigma_a=2.0, sigma_b=0.0)
        assert np.abs(two - alpha).max() > 0.005

    def test_front_in_focus_agreement_behind(self):
        two, alpha, mask = self.make_pair(sigma_a=0.0, sigma_b=2.0)
        diff = np.abs(two - alpha)
        # Exact agreement on the back (B) side; disagreement is confined to
        # the in-focus silhouette where the two-parameter model bleeds.
        assert diff[mask == 0].max() == 0.0
        assert diff[mask == 1].max() > 0.005
