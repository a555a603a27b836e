"""Image comparison metrics over display-space [0,1] arrays.

SSIM follows the reference construction: 11x11 Gaussian window with sigma
1.5, stability constants C1=0.01^2 and C2=0.03^2 for unit dynamic range,
computed per channel on valid windows only and averaged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["mse", "ssim", "psnr", "MetricReport", "compute_report"]

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2
PSNR_CAP_DB = 99.0


def _check_pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.ndim == 2:
        a, b = a[:, :, None], b[:, :, None]
    if a.ndim != 3:
        raise ValueError(f"images must be (H,W) or (H,W,C), got shape {a.shape}")
    return a, b


def mse(a: np.ndarray, b: np.ndarray) -> float:
    a, b = _check_pair(a, b)
    return float(np.mean((a - b) ** 2))


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB against a unit peak, capped at 99."""
    err = mse(a, b)
    if err <= 0.0:
        return PSNR_CAP_DB
    return float(min(10.0 * np.log10(1.0 / err), PSNR_CAP_DB))


def _gaussian_kernel() -> np.ndarray:
    half = (SSIM_WINDOW - 1) / 2.0
    x = np.arange(SSIM_WINDOW) - half
    g = np.exp(-(x**2) / (2.0 * SSIM_SIGMA**2))
    return g / g.sum()


def _filter_valid(img: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Separable window average over valid positions: (H,W) -> (H-10, W-10)."""
    v = np.lib.stride_tricks.sliding_window_view(img, SSIM_WINDOW, axis=0) @ g
    return np.lib.stride_tricks.sliding_window_view(v, SSIM_WINDOW, axis=1) @ g


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    a, b = _check_pair(a, b)
    h, w, c = a.shape
    if h < SSIM_WINDOW or w < SSIM_WINDOW:
        raise ValueError(
            f"image {h}x{w} is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window"
        )
    g = _gaussian_kernel()
    scores = []
    for ch in range(c):
        x, y = a[:, :, ch], b[:, :, ch]
        mu_x = _filter_valid(x, g)
        mu_y = _filter_valid(y, g)
        var_x = _filter_valid(x * x, g) - mu_x**2
        var_y = _filter_valid(y * y, g) - mu_y**2
        cov = _filter_valid(x * y, g) - mu_x * mu_y
        num = (2 * mu_x * mu_y + SSIM_C1) * (2 * cov + SSIM_C2)
        den = (mu_x**2 + mu_y**2 + SSIM_C1) * (var_x + var_y + SSIM_C2)
        scores.append(float(np.mean(num / den)))
    return float(np.mean(scores))


@dataclass(frozen=True)
class MetricReport:
    mse: float
    ssim: float
    psnr: float

    def format_line(self) -> str:
        return f"mse={self.mse:.6f} ssim={self.ssim:.6f} psnr={self.psnr:.2f}dB"


def compute_report(pred: np.ndarray, target: np.ndarray) -> MetricReport:
    return MetricReport(mse=mse(pred, target), ssim=ssim(pred, target), psnr=psnr(pred, target))
