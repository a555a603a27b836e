import numpy as np
import pytest

from deepgi.metrics import MetricReport, compute_report, mse, psnr, ssim


def checkerboardish(seed=0, shape=(24, 24, 3)):
    rng = np.random.default_rng(seed)
    return rng.random(shape)


class TestMse:
    def test_zero_for_identical(self):
        x = checkerboardish()
        assert mse(x, x) == 0.0

    def test_hand_value(self):
        a = np.zeros((2, 2))
        b = np.array([[1.0, 0.0], [0.0, 0.0]])
        assert abs(mse(a, b) - 0.25) < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape mismatch"):
            mse(np.zeros((4, 4)), np.zeros((4, 5)))

    def test_rank_check(self):
        with pytest.raises(ValueError, match="images must be"):
            mse(np.zeros((2, 2, 3, 1)), np.zeros((2, 2, 3, 1)))


class TestPsnr:
    def test_twenty_db_at_mse_hundredth(self):
        a = np.zeros((16, 16))
        b = np.full((16, 16), 0.1)
        assert abs(psnr(a, b) - 20.0) < 1e-9

    def test_identical_caps_at_99(self):
        x = checkerboardish()
        assert psnr(x, x) == 99.0

    def test_monotone_in_error(self):
        x = checkerboardish(1)
        vals = [psnr(x, np.clip(x + e, 0, 1)) for e in (0.02, 0.05, 0.1)]
        assert vals[0] > vals[1] > vals[2]


class TestSsim:
    def test_self_similarity_is_one(self):
        x = checkerboardish(3)
        assert abs(ssim(x, x) - 1.0) < 1e-6

    def test_constant_images_analytic(self):
        # zero variance leaves only the luminance term:
        # (2*0.5*0.25 + 1e-4) / (0.5^2 + 0.25^2 + 1e-4)
        a = np.full((16, 16), 0.5)
        b = np.full((16, 16), 0.25)
        expected = (0.25 + 1e-4) / (0.3125 + 1e-4)
        assert abs(ssim(a, b) - expected) < 1e-6

    def test_symmetry(self):
        x, y = checkerboardish(4), checkerboardish(5)
        assert abs(ssim(x, y) - ssim(y, x)) < 1e-12

    def test_bounded_above_by_one(self):
        x, y = checkerboardish(6), checkerboardish(7)
        assert ssim(x, y) <= 1.0

    def test_decreases_with_noise_level(self):
        x = checkerboardish(8, shape=(32, 32, 3))
        rng = np.random.default_rng(9)
        noise = rng.normal(size=x.shape)
        vals = [ssim(x, np.clip(x + s * noise, 0, 1)) for s in (0.01, 0.05, 0.1)]
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] < 0.97

    def test_window_must_fit(self):
        with pytest.raises(ValueError, match="smaller than the 11x11 window"):
            ssim(np.zeros((10, 16)), np.zeros((10, 16)))

    def test_single_channel_matches_replicated_rgb(self):
        x, y = checkerboardish(10, (20, 20)), checkerboardish(11, (20, 20))
        mono = ssim(x, y)
        rgb = ssim(np.stack([x] * 3, axis=-1), np.stack([y] * 3, axis=-1))
        assert abs(mono - rgb) < 1e-12


class TestReport:
    def test_fields_match_functions(self):
        x, y = checkerboardish(12), checkerboardish(13)
        r = compute_report(x, y)
        assert r == MetricReport(mse=mse(x, y), ssim=ssim(x, y), psnr=psnr(x, y))

    def test_zero_error_coherence(self):
        x = checkerboardish(14)
        r = compute_report(x, x)
        assert r.mse == 0.0 and abs(r.ssim - 1.0) < 1e-6 and r.psnr == 99.0

    def test_format_line(self):
        line = MetricReport(mse=0.01, ssim=0.5, psnr=20.0).format_line()
        assert line == "mse=0.010000 ssim=0.500000 psnr=20.00dB"
