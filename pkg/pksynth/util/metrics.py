"""
Image quality metrics on magnitude images.

Both metrics normalize the images by the maximum magnitude of the ground
truth so that the dynamic range is 1, independent of the FFT scaling and of
the phantom intensities.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
import torch
import torch.nn.functional as F

from .utility import ValidationError, require, require_finite

__all__ = ['MetricPair', 'PSNR_CAP_DB', 'psnr', 'ssim', 'evaluate',
           'gaussian_window']

PSNR_CAP_DB = 99.0

ImageLike = Union[torch.Tensor, np.ndarray]


@dataclass(frozen=True)
class MetricPair:
    psnr_db: float
    ssim: float


def _normalized_pair(recon: ImageLike, truth: ImageLike):
    recon = torch.as_tensor(recon)
    truth = torch.as_tensor(truth)
    if recon.is_complex():
        recon = recon.abs()
    if truth.is_complex():
        truth = truth.abs()
    recon = recon.to(torch.float64)
    truth = truth.to(torch.float64).to(recon.device)
    require(recon.ndim == 2 and truth.ndim == 2,
            "metrics are defined on 2D images")
    require(recon.shape == truth.shape,
            f"image dimensions differ: {tuple(recon.shape)} vs "
            f"{tuple(truth.shape)}")
    require_finite(recon, "reconstruction")
    require_finite(truth, "ground truth")
    peak = truth.abs().max()
    if peak == 0:
        raise ValidationError("ground truth is all zero")
    return recon / peak, truth / peak


def psnr(recon: ImageLike, truth: ImageLike) -> float:
    """Peak signal-to-noise ratio in dB with peak 1 after normalization.

    Identical images are reported as PSNR_CAP_DB instead of +inf.
    """
    x, y = _normalized_pair(recon, truth)
    mse = torch.mean((x - y) ** 2).item()
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * math.log10(1.0 / mse), PSNR_CAP_DB)


def gaussian_window(size: int = 11, sigma: float = 1.5,
                    dtype=torch.float64) -> torch.Tensor:
    coords = torch.arange(size, dtype=dtype) - (size - 1) / 2
    g = torch.exp(-coords ** 2 / (2 * sigma ** 2))
    g = g / g.sum()
    return torch.outer(g, g)


def ssim(recon: ImageLike, truth: ImageLike, window_size: int = 11,
         sigma: float = 1.5, k1: float = 0.01, k2: float = 0.03) -> float:
    """Mean structural similarity over all valid window positions.

    Uses the Gaussian-weighted local statistics of Wang et al. with a
    dynamic range of 1.
    """
    x, y = _normalized_pair(recon, truth)
    require(x.shape[0] >= window_size and x.shape[1] >= window_size,
            f"images of size {tuple(x.shape)} are smaller than the "
            f"{window_size}x{window_size} SSIM window")
    c1 = (k1 * 1.0) ** 2
    c2 = (k2 * 1.0) ** 2
    w = gaussian_window(window_size, sigma).to(x.device)[None, None]

    def filt(img):
        return F.conv2d(img[None, None], w)[0, 0]

    mu_x = filt(x)
    mu_y = filt(y)
    sigma_x = filt(x * x) - mu_x * mu_x
    sigma_y = filt(y * y) - mu_y * mu_y
    sigma_xy = filt(x * y) - mu_x * mu_y
    ssim_map = (((2 * mu_x * mu_y + c1) * (2 * sigma_xy + c2))
                / ((mu_x * mu_x + mu_y * mu_y + c1)
                   * (sigma_x + sigma_y + c2)))
    return ssim_map.mean().item()


def evaluate(recon: ImageLike, truth: ImageLike) -> MetricPair:
    return MetricPair(psnr_db=psnr(recon, truth), ssim=ssim(recon, truth))
