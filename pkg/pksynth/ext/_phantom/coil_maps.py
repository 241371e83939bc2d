"""
Synthetic receive sensitivities and the forward acquisition model.
"""
import math
from typing import Optional

import numpy as np
import torch

from ... import (Context, ComplexImage, SamplingMask, KSpaceVolume, fft2c,
                 apply_mask)
from ...util.utility import ValidationError, require

__all__ = ['gen_coil_maps', 'simulate_acquisition']


def gen_coil_maps(n: int, n_coils: int, seed: int = 0,
                  context: Optional[Context] = None,
                  width: float = 0.6) -> torch.Tensor:
    """
    Gaussian-bump magnitudes centred on a ring around the field of view,
    each with a smooth linear phase, scaled so that their root-sum-of-squares
    is one at every pixel.
    """
    require(n >= 1, f"map size must be positive, got {n}")
    require(n_coils >= 1, f"n_coils must be >= 1, got {n_coils}")
    context = context or Context()
    rng = np.random.default_rng(seed)
    offset = rng.uniform(0, 2 * math.pi)
    slopes = rng.uniform(-math.pi / 2, math.pi / 2, size=(n_coils, 2))

    axis = torch.linspace(-1, 1, steps=n, device=context.device,
                          dtype=context.dtype)
    y, x = torch.meshgrid(axis, axis, indexing='ij')
    magnitudes, phases = [], []
    for coil in range(n_coils):
        angle = offset + 2 * math.pi * coil / n_coils
        cx, cy = math.cos(angle), math.sin(angle)
        magnitudes.append(torch.exp(-((x - cx) ** 2 + (y - cy) ** 2)
                                    / (2 * width ** 2)))
        if n_coils == 1:
            phases.append(torch.zeros_like(x))
        else:
            phases.append(slopes[coil, 0] * x + slopes[coil, 1] * y)
    magnitude = torch.stack(magnitudes)
    magnitude = magnitude / torch.sqrt((magnitude ** 2).sum(dim=0))
    return torch.polar(magnitude, torch.stack(phases))


def simulate_acquisition(image: ComplexImage, maps: torch.Tensor,
                         mask: SamplingMask) -> KSpaceVolume:
    """Per-coil k-space of the sensitivity-weighted image, masked."""
    maps = torch.as_tensor(maps)
    if maps.ndim != 3 or tuple(maps.shape[1:]) != (image.rows, image.cols):
        raise ValidationError(f"coil maps of shape {tuple(maps.shape)} do "
                              f"not match image {image.rows}x{image.cols}")
    if mask.dims != (image.rows, image.cols):
        raise ValidationError(f"mask dims {mask.dims} do not match image "
                              f"{image.rows}x{image.cols}")
    weighted = maps.to(image.data.dtype) * image.data[None]
    return apply_mask(KSpaceVolume(fft2c(weighted)), mask)
