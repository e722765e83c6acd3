import numpy as np
import pytest

from leafid import vein_features
from leafid.errors import FeatureError

from conftest import disk_mask


class TestGrayOpening:
    def test_constant_image_fixed_point(self):
        img = np.full((12, 12), 77, dtype=np.uint8)
        for r in (1, 2, 3, 4):
            assert np.array_equal(vein_features.gray_opening(img, r), img)

    def test_isolated_peak_removed(self):
        img = np.full((9, 9), 20, dtype=np.uint8)
        img[4, 4] = 200
        opened = vein_features.gray_opening(img, 1)
        assert opened[4, 4] == 20

    def test_anti_extensive_monotone_idempotent(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            f = rng.integers(0, 256, size=(16, 16)).astype(np.uint8)
            bump = rng.integers(0, 40, size=(16, 16)).astype(np.uint8)
            g = np.clip(f.astype(np.int32) + bump, 0, 255).astype(np.uint8)
            for r in (1, 2, 3, 4):
                of = vein_features.gray_opening(f, r)
                og = vein_features.gray_opening(g, r)
                assert (of <= f).all()                       # anti-extensive
                assert (of <= og).all()                      # increasing
                assert np.array_equal(vein_features.gray_opening(of, r), of)  # idempotent

    def test_radius_validation(self):
        img = np.zeros((4, 4), dtype=np.uint8)
        with pytest.raises(ValueError):
            vein_features.gray_opening(img, 0)
        with pytest.raises(ValueError):
            vein_features.gray_opening(img, 5)


class TestDiskElement:
    def test_radius_one_is_cross(self):
        fp = vein_features.disk_element(1)
        assert np.array_equal(fp, [[False, True, False], [True, True, True], [False, True, False]])

    def test_radius_two_shape(self):
        fp = vein_features.disk_element(2)
        assert fp.shape == (5, 5)
        assert fp[2, 2] and fp[0, 2] and not fp[0, 0]


class TestVeinFeatures:
    def test_constant_leaf_is_zero(self):
        mask = disk_mask(12)
        gray = np.where(mask, 80, 250).astype(np.uint8)
        vf = vein_features.vein_features(gray, mask)
        assert vf.v == (0.0, 0.0, 0.0, 0.0)

    def test_bright_line_is_counted(self):
        mask = disk_mask(20)
        gray = np.where(mask, 60, 250).astype(np.uint8)
        cy = mask.shape[0] // 2
        x0 = mask.shape[1] // 2 - 10
        gray[cy, x0 : x0 + 20] = 200  # interior 1-px line, length 20
        vf = vein_features.vein_features(gray, mask)
        area = int(mask.sum())
        assert vf.area == area
        assert abs(vf.a[0] - 20) <= 3
        assert abs(vf.v[0] - 20.0 / area) <= 3.0 / area
        assert all(0.0 <= v <= 1.0 for v in vf.v)
        assert all(a <= area for a in vf.a)

    def test_ratios_are_counts_over_area(self):
        rng = np.random.default_rng(1)
        mask = disk_mask(16)
        gray = np.where(mask, 70, 240).astype(np.uint8)
        noise = rng.integers(0, 50, size=gray.shape)
        gray = np.where(mask, np.clip(gray.astype(int) + noise, 0, 255), gray).astype(np.uint8)
        vf = vein_features.vein_features(gray, mask)
        for a_k, v_k in zip(vf.a, vf.v):
            assert v_k == a_k / vf.area

    def test_background_values_irrelevant(self):
        rng = np.random.default_rng(2)
        mask = disk_mask(14)
        gray = np.where(mask, 60, 230).astype(np.uint8)
        gray[mask.shape[0] // 2, 10:40] = 170
        base = vein_features.vein_features(gray, mask)
        for _ in range(5):
            g2 = gray.copy()
            bg = ~mask
            g2[bg] = rng.integers(0, 256, size=int(bg.sum()))
            got = vein_features.vein_features(g2, mask)
            assert got.v == base.v

    def test_dark_vein_polarity(self):
        mask = disk_mask(20)
        gray = np.where(mask, 180, 250).astype(np.uint8)
        cy = mask.shape[0] // 2
        gray[cy, 12:52] = 40  # dark line
        light = vein_features.vein_features(gray, mask, dark_veins=False)
        dark = vein_features.vein_features(gray, mask, dark_veins=True)
        assert dark.a[0] > 0
        assert dark.a[0] >= light.a[0]

    def test_empty_mask_errors(self):
        gray = np.full((8, 8), 100, dtype=np.uint8)
        with pytest.raises(FeatureError):
            vein_features.vein_features(gray, np.zeros((8, 8), dtype=bool))

    def test_thin_mask_erodes_away(self):
        gray = np.full((8, 8), 100, dtype=np.uint8)
        mask = np.zeros((8, 8), dtype=bool)
        mask[4, 1:7] = True  # 1-px strip has no interior
        with pytest.raises(FeatureError):
            vein_features.vein_features(gray, mask)
