import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mffusion.fusion import (
    CorrectionSource,
    boundary_map,
    final_fusion,
    initial_fusion,
    load_correction,
    save_correction,
)
from oracles import scalar_initial_fusion


def three_level_gmap(shape, rng):
    return rng.choice([0.0, 0.5, 1.0], size=shape)


class TestInitialFusion:
    def test_gmap_one_returns_a_exactly(self, rng):
        a = rng.random((8, 8, 3))
        b = rng.random((8, 8, 3))
        out = initial_fusion(a, b, np.ones((8, 8)))
        assert np.array_equal(out, a)

    def test_gmap_half_is_average(self, rng):
        a = rng.random((8, 8))
        b = rng.random((8, 8))
        out = initial_fusion(a, b, np.full((8, 8), 0.5))
        assert np.abs(out - (a + b) / 2).max() < 1e-15

    def test_matches_scalar_oracle(self, rng):
        a = rng.random((8, 8, 3))
        b = rng.random((8, 8, 3))
        g = three_level_gmap((8, 8), rng)
        assert np.abs(initial_fusion(a, b, g) - scalar_initial_fusion(a, b, g)).max() < 1e-12

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            initial_fusion(rng.random((4, 4)), rng.random((5, 4)), np.ones((4, 4)))


class TestBoundaryMap:
    def test_levels(self):
        gmap = np.array([[0.0, 0.5, 1.0]])
        assert np.array_equal(boundary_map(gmap), [[0.0, 1.0, 0.0]])

    def test_indicator_of_half_level(self, rng):
        g = three_level_gmap((10, 10), rng)
        bmap = boundary_map(g)
        assert np.array_equal(bmap, (g == 0.5).astype(float))


class TestFinalFusion:
    def test_zero_correction_is_initial(self, rng):
        a, b = rng.random((8, 8)), rng.random((8, 8))
        g = three_level_gmap((8, 8), rng)
        out = final_fusion(a, b, g, CorrectionSource.zero())
        assert np.array_equal(out, initial_fusion(a, b, g))

    def test_oracle_reproduces_gt_on_band(self, rng):
        a, b = rng.random((12, 12, 3)), rng.random((12, 12, 3))
        gt = rng.random((12, 12, 3))
        g = three_level_gmap((12, 12), rng)
        out = final_fusion(a, b, g, CorrectionSource.oracle(gt))
        band = g == 0.5
        assert np.abs(out[band] - gt[band]).max() < 1e-12
        ini = initial_fusion(a, b, g)
        assert np.array_equal(out[~band], ini[~band])

    def test_correction_masked_where_gmap_decided(self, rng):
        a, b = rng.random((8, 8)), rng.random((8, 8))
        g = np.ones((8, 8))
        corr = CorrectionSource.from_image(rng.uniform(-1, 1, (8, 8)))
        out = final_fusion(a, b, g, corr)
        assert np.array_equal(out, a)

    def test_masking_locality(self, rng):
        a, b = rng.random((8, 8)), rng.random((8, 8))
        g = three_level_gmap((8, 8), rng)
        c1 = rng.uniform(-1, 1, (8, 8))
        c2 = c1.copy()
        c2[g != 0.5] = rng.uniform(-1, 1, (g != 0.5).sum())  # perturb only masked pixels
        out1 = final_fusion(a, b, g, CorrectionSource.from_image(c1))
        out2 = final_fusion(a, b, g, CorrectionSource.from_image(c2))
        assert np.array_equal(out1, out2)

    def test_swap_equivariance(self, rng):
        a, b = rng.random((8, 8)), rng.random((8, 8))
        g = three_level_gmap((8, 8), rng)
        g_flip = g.copy()
        g_flip[g == 1.0] = 0.0
        g_flip[g == 0.0] = 1.0
        corr = CorrectionSource.from_image(rng.uniform(-1, 1, (8, 8)))
        lhs = final_fusion(b, a, g_flip, corr)
        rhs = final_fusion(a, b, g, corr)
        assert np.abs(lhs - rhs).max() < 1e-15

    def test_oracle_without_gt_rejected(self, rng):
        a, b = rng.random((4, 4)), rng.random((4, 4))
        with pytest.raises(ValueError):
            final_fusion(a, b, np.ones((4, 4)), CorrectionSource(kind="oracle"))

    def test_output_clamped(self, rng):
        a, b = np.full((4, 4), 0.9), np.full((4, 4), 0.9)
        g = np.full((4, 4), 0.5)
        corr = CorrectionSource.from_image(np.full((4, 4), 0.9))
        out = final_fusion(a, b, g, corr)
        assert out.max() <= 1.0

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**31))
    def test_source_selection_property(self, seed):
        r = np.random.default_rng(seed)
        a, b = r.random((6, 6)), r.random((6, 6))
        g = r.choice([0.0, 0.5, 1.0], size=(6, 6))
        out = final_fusion(a, b, g, CorrectionSource.zero())
        assert np.array_equal(out[g == 1.0], a[g == 1.0])
        assert np.array_equal(out[g == 0.0], b[g == 0.0])


class TestCorrectionIO:
    def test_signed_roundtrip(self, rng, tmp_path):
        corr = rng.uniform(-1, 1, (8, 8))
        path = tmp_path / "corr.png"
        save_correction(corr, path)
        back = load_correction(path)
        assert back.kind == "image"
        assert np.abs(back.image - corr).max() <= 2.0 / 65535

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            CorrectionSource.from_image(np.full((4, 4), 1.5))
