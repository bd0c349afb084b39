import numpy as np
import pytest

from hspansharp.imgcore import (
    DynamicRange,
    SpectralImage,
    as_matrix,
    band_stats,
    clip_to_range,
    from_matrix,
)


def make_img(bands=3, height=2, width=4, seed=0):
    rng = np.random.default_rng(seed)
    return SpectralImage(height, width, rng.uniform(size=(bands, height * width)))


class TestDynamicRange:
    def test_span(self):
        assert DynamicRange(-1.0, 3.0).span == 4.0

    def test_rejects_empty_interval(self):
        with pytest.raises(ValueError):
            DynamicRange(1.0, 1.0)
        with pytest.raises(ValueError):
            DynamicRange(2.0, 1.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            DynamicRange(0.0, np.inf)

    def test_equality(self):
        assert DynamicRange(0, 1) == DynamicRange(0.0, 1.0)
        assert DynamicRange(0, 1) != DynamicRange(0, 2)


class TestSpectralImage:
    def test_shape_accessors(self):
        img = make_img(bands=5, height=3, width=7)
        assert img.bands == 5
        assert img.pixels == 21
        assert img.data.shape == (5, 21)

    def test_data_is_readonly_float64(self):
        img = make_img()
        assert img.data.dtype == np.float64
        with pytest.raises(ValueError):
            img.data[0, 0] = 1.0

    def test_input_array_is_copied(self):
        raw = np.ones((2, 6))
        img = SpectralImage(2, 3, raw)
        raw[0, 0] = 99.0
        assert img.data[0, 0] == 1.0

    def test_pixel_count_mismatch(self):
        with pytest.raises(ValueError):
            SpectralImage(2, 3, np.zeros((1, 5)))

    def test_rejects_bad_dims(self):
        with pytest.raises(ValueError):
            SpectralImage(0, 3, np.zeros((1, 0)))
        with pytest.raises(ValueError):
            SpectralImage(2, -1, np.zeros((1, 2)))

    def test_rejects_non_finite(self):
        data = np.ones((1, 4))
        data[0, 2] = np.nan
        with pytest.raises(ValueError):
            SpectralImage(2, 2, data)

    def test_rejects_3d_data(self):
        with pytest.raises(ValueError):
            SpectralImage(2, 2, np.zeros((1, 2, 2)))

    def test_to_cube_is_view_in_raster_order(self):
        img = SpectralImage(2, 3, np.arange(12.0).reshape(2, 6))
        cube = img.to_cube()
        assert cube.shape == (2, 2, 3)
        # row-major: pixel (row y, col x) is column y * width + x
        assert cube[1, 1, 2] == img.data[1, 1 * 3 + 2]
        assert cube.base is not None

    def test_band_image(self):
        img = make_img(bands=2, height=3, width=3)
        np.testing.assert_array_equal(img.band_image(1), img.to_cube()[1])

    def test_wavelengths_validation(self):
        SpectralImage(1, 2, np.zeros((2, 2)), wavelengths=(0.4, 0.5))
        with pytest.raises(ValueError):
            SpectralImage(1, 2, np.zeros((2, 2)), wavelengths=(0.5, 0.5))
        with pytest.raises(ValueError):
            SpectralImage(1, 2, np.zeros((2, 2)), wavelengths=(0.4,))

    def test_with_data_preserves_geometry_and_wavelengths(self):
        img = SpectralImage(1, 2, np.zeros((2, 2)), wavelengths=(0.4, 0.5))
        out = img.with_data(np.ones((2, 2)))
        assert out.height == 1 and out.width == 2
        assert out.wavelengths == (0.4, 0.5)
        assert out.data[0, 0] == 1.0

    def test_equality_covers_data_and_geometry(self):
        a = make_img(seed=1)
        b = SpectralImage(a.height, a.width, a.data)
        assert a == b
        assert a != a.with_data(a.data + 1.0)
        assert a != SpectralImage(a.width, a.height, a.data)
        assert a != "not an image"


class TestHelpers:
    def test_matrix_round_trip(self):
        img = make_img()
        again = from_matrix(as_matrix(img), img.height, img.width)
        assert again == img

    def test_as_matrix_is_not_a_copy(self):
        img = make_img()
        assert as_matrix(img) is img.data

    def test_clip_to_range(self):
        img = SpectralImage(1, 3, np.array([[-2.0, 0.5, 7.0]]))
        out = clip_to_range(img, DynamicRange(0.0, 1.0))
        np.testing.assert_array_equal(out.data, [[0.0, 0.5, 1.0]])

    def test_band_stats_matches_loops(self):
        img = make_img(bands=3, height=4, width=5, seed=7)
        for k in range(img.bands):
            mean, var = band_stats(img, k)
            row = img.data[k]
            loop_mean = sum(row) / row.size
            loop_var = sum((v - loop_mean) ** 2 for v in row) / row.size
            assert mean == pytest.approx(loop_mean, rel=1e-12)
            assert var == pytest.approx(loop_var, rel=1e-12)

    def test_band_stats_index_error(self):
        img = make_img(bands=2)
        with pytest.raises(IndexError):
            band_stats(img, 2)
        with pytest.raises(IndexError):
            band_stats(img, -1)
