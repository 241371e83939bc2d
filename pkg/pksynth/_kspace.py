"""
Complex images, multi-coil k-space volumes and sampling masks.

Transforms are centered (the DC sample sits at index floor(n/2) on both
axes) and unitary, so masks can be described in "center = low frequency"
coordinates and Parseval holds without scale factors.
"""

from dataclasses import dataclass, field
from typing import Tuple, Union

import torch

from .util.utility import ValidationError, require, require_finite

__all__ = ['ComplexImage', 'KSpaceVolume', 'SamplingMask', 'fft2c', 'ifft2c',
           'apply_mask', 'rss_combine', 'coil_images', 'zero_filled_recon',
           'measured_R']


def _complex(data: torch.Tensor) -> torch.Tensor:
    if data.is_complex():
        return data
    return data.to(torch.complex128 if data.dtype == torch.float64
                   else torch.complex64)


@dataclass
class ComplexImage:
    data: torch.Tensor

    def __post_init__(self):
        self.data = _complex(torch.as_tensor(self.data))
        require(self.data.ndim == 2,
                f"a complex image is 2D, got shape {tuple(self.data.shape)}")
        require(self.data.numel() > 0, "empty image")
        require_finite(self.data, "image")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def magnitude(self) -> torch.Tensor:
        return self.data.abs()


@dataclass
class KSpaceVolume:
    """Multi-coil k-space indexed (coil, row, col)."""
    data: torch.Tensor

    def __post_init__(self):
        self.data = _complex(torch.as_tensor(self.data))
        require(self.data.ndim == 3,
                f"a k-space volume is indexed (coil, row, col), got shape "
                f"{tuple(self.data.shape)}")
        require(self.data.shape[0] >= 1, "a k-space volume needs a coil")
        require(self.data.shape[1] >= 1 and self.data.shape[2] >= 1,
                "empty k-space volume")
        require_finite(self.data, "k-space volume")

    @property
    def n_coils(self) -> int:
        return self.data.shape[0]

    @property
    def rows(self) -> int:
        return self.data.shape[1]

    @property
    def cols(self) -> int:
        return self.data.shape[2]

    @property
    def dims(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def transpose(self) -> 'KSpaceVolume':
        return KSpaceVolume(self.data.transpose(1, 2).contiguous())

    def clone(self) -> 'KSpaceVolume':
        return KSpaceVolume(self.data.clone())


@dataclass
class SamplingMask:
    """Acquisition indicator shared by all coils."""
    indicator: torch.Tensor
    nominal_R: float = 1.0
    seed: int = 0
    family: str = field(default="custom")

    def __post_init__(self):
        indicator = torch.as_tensor(self.indicator)
        require(indicator.ndim == 2,
                f"a sampling mask is 2D, got shape {tuple(indicator.shape)}")
        if indicator.dtype != torch.bool:
            values = indicator.to(torch.float64)
            require(bool(((values == 0) | (values == 1)).all()),
                    "mask indicator values must be exactly 0 or 1")
            indicator = values == 1
        require(bool(indicator.any()),
                "a sampling mask must acquire at least one sample")
        require(self.nominal_R >= 1, f"nominal R must be >= 1, got "
                                     f"{self.nominal_R}")
        self.indicator = indicator

    @property
    def rows(self) -> int:
        return self.indicator.shape[0]

    @property
    def cols(self) -> int:
        return self.indicator.shape[1]

    @property
    def dims(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def measured_R(self) -> float:
        return measured_R(self)

    def transpose(self) -> 'SamplingMask':
        return SamplingMask(self.indicator.t().contiguous(), self.nominal_R,
                            self.seed, self.family)


def fft2c(img: Union[ComplexImage, torch.Tensor]) -> torch.Tensor:
    """Centered unitary 2D DFT over the last two axes."""
    x = img.data if isinstance(img, ComplexImage) else _complex(img)
    require(x.ndim >= 2, "fft2c needs at least two dimensions")
    require_finite(x, "fft2c input")
    dims = (-2, -1)
    return torch.fft.fftshift(
        torch.fft.fft2(torch.fft.ifftshift(x, dim=dims), norm="ortho"),
        dim=dims)


def ifft2c(ksp: torch.Tensor) -> torch.Tensor:
    """Inverse of fft2c over the last two axes."""
    k = ksp.data if isinstance(ksp, (ComplexImage, KSpaceVolume)) \
        else _complex(ksp)
    require(k.ndim >= 2, "ifft2c needs at least two dimensions")
    require_finite(k, "ifft2c input")
    dims = (-2, -1)
    return torch.fft.fftshift(
        torch.fft.ifft2(torch.fft.ifftshift(k, dim=dims), norm="ortho"),
        dim=dims)


def apply_mask(ksp: KSpaceVolume, mask: SamplingMask) -> KSpaceVolume:
    if ksp.dims != mask.dims:
        raise ValidationError(f"mask dims {mask.dims} do not match k-space "
                              f"dims {ksp.dims}")
    indicator = mask.indicator.to(ksp.data.device)
    return KSpaceVolume(torch.where(indicator[None], ksp.data,
                                    torch.zeros_like(ksp.data)))


def coil_images(vol: KSpaceVolume) -> torch.Tensor:
    return ifft2c(vol.data)


def rss_combine(images: torch.Tensor) -> torch.Tensor:
    """Root-sum-of-squares over the leading (coil) axis."""
    images = torch.as_tensor(images)
    require(images.ndim == 3, "rss_combine expects (coil, row, col) images")
    if images.shape[0] == 0:
        raise ValidationError("rss_combine needs at least one coil")
    magnitude_sq = (images.abs() ** 2 if images.is_complex()
                    else images ** 2)
    return torch.sqrt(magnitude_sq.sum(dim=0))


def zero_filled_recon(ksp: KSpaceVolume) -> torch.Tensor:
    return rss_combine(coil_images(ksp))


def measured_R(mask: SamplingMask) -> float:
    return mask.indicator.numel() / int(mask.indicator.sum())
