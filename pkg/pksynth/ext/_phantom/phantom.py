"""
Shepp-Logan style anatomy rendered in three MR contrasts.

Every ellipse is a tissue label; each contrast assigns the labels its own
intensity, so the three images share geometry (and support) while their
gray levels differ the way T1-, T2- and PD-weighted scans of one subject do.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import torch

from ... import Context, ComplexImage, fft2c, ifft2c
from ...util.utility import require

__all__ = ['ELLIPSES', 'DEFAULT_CONTRASTS', 'CONTRAST_LABELS', 'PhantomSpec',
           'gen_phantom', 'tissue_labels', 'unit_disc']

log_module = logging.getLogger(__name__)

# (x0, y0, a, b, theta in degrees), painted in order; later ellipses win.
ELLIPSES: Tuple[Tuple[float, float, float, float, float], ...] = (
    (0.0, 0.0, 0.69, 0.92, 0.0),
    (0.0, -0.0184, 0.6624, 0.874, 0.0),
    (0.22, 0.0, 0.11, 0.31, -18.0),
    (-0.22, 0.0, 0.16, 0.41, 18.0),
    (0.0, 0.35, 0.21, 0.25, 0.0),
    (0.0, 0.1, 0.046, 0.046, 0.0),
    (0.0, -0.1, 0.046, 0.046, 0.0),
    (-0.08, -0.605, 0.046, 0.023, 0.0),
    (0.0, -0.605, 0.023, 0.023, 0.0),
    (0.06, -0.605, 0.023, 0.046, 0.0),
)

CONTRAST_LABELS = ('T1', 'T2', 'PD')

# scalp, white matter, two ventricles, gray matter blob, small lesions.
# PD and T2 share a long-TR dual-echo readout, so PD is nearly a rescaled
# T2. Relative to T2, T1 renders fluid darker and the scalp brighter.
DEFAULT_CONTRASTS: Dict[str, Tuple[float, ...]] = {
    'T1': (0.95, 0.62, 0.72, 0.72, 0.90, 0.70, 0.70, 0.85, 0.55, 0.50),
    'T2': (0.45, 0.30, 0.50, 0.50, 0.40, 0.45, 0.45, 0.40, 0.15, 0.35),
    'PD': (0.80, 0.54, 0.92, 0.92, 0.74, 0.80, 0.80, 0.72, 0.30, 0.62),
}


@dataclass
class PhantomSpec:
    size: int = 64
    n_coils: int = 4
    seed: int = 0
    noise_std: float = 0.0
    contrast_params: Dict[str, Sequence[float]] = field(
        default_factory=lambda: dict(DEFAULT_CONTRASTS))

    def __post_init__(self):
        require(self.size >= 32, f"phantom size must be >= 32, "
                                 f"got {self.size}")
        require(self.n_coils >= 1, f"n_coils must be >= 1, "
                                   f"got {self.n_coils}")
        require(self.seed >= 0, f"seed must be nonnegative, got {self.seed}")
        require(self.noise_std >= 0, f"noise_std must be nonnegative, "
                                     f"got {self.noise_std}")
        require(len(self.contrast_params) > 0, "no contrasts given")
        params = {}
        for label, values in self.contrast_params.items():
            values = tuple(float(v) for v in values)
            require(len(values) == len(ELLIPSES),
                    f"contrast {label} needs {len(ELLIPSES)} intensities, "
                    f"got {len(values)}")
            require(all(0 <= v <= 1 for v in values),
                    f"contrast {label} intensities must lie in [0, 1]")
            params[str(label)] = values
        self.contrast_params = params

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(self.contrast_params)


def _grid(size: int, context: Context) -> Tuple[torch.Tensor, torch.Tensor]:
    axis = torch.linspace(-1, 1, steps=size, device=context.device,
                          dtype=context.dtype)
    return torch.meshgrid(axis, axis, indexing='ij')


def unit_disc(size: int, context: Optional[Context] = None) -> torch.Tensor:
    context = context or Context()
    y, x = _grid(size, context)
    return x ** 2 + y ** 2 <= 1


def tissue_labels(size: int, context: Optional[Context] = None
                  ) -> torch.Tensor:
    """Index of the last ellipse covering each pixel, -1 outside."""
    context = context or Context()
    y, x = _grid(size, context)
    labels = torch.full((size, size), -1, dtype=torch.long,
                        device=context.device)
    for index, (x0, y0, a, b, theta) in enumerate(ELLIPSES):
        angle = math.radians(theta)
        u = (x - x0) * math.cos(angle) + (y - y0) * math.sin(angle)
        v = (x - x0) * math.sin(angle) - (y - y0) * math.cos(angle)
        labels[(u / a) ** 2 + (v / b) ** 2 <= 1] = index
    return labels


def gen_phantom(spec: PhantomSpec, context: Optional[Context] = None
                ) -> Dict[str, ComplexImage]:
    context = context or Context()
    labels = tissue_labels(spec.size, context)
    inside = labels >= 0
    index = labels.clamp(min=0)
    rng = np.random.default_rng(spec.seed)

    images = {}
    for label, values in spec.contrast_params.items():
        lookup = context.convert_to_tensor(values)
        image = torch.where(inside, lookup[index], context.zero_tensor(
            (spec.size, spec.size)))
        image = context.convert_to_complex(image)
        if spec.noise_std > 0:
            noise = rng.standard_normal((2, spec.size, spec.size)) \
                * spec.noise_std / math.sqrt(2)
            noise = context.convert_to_complex(noise[0] + 1j * noise[1])
            image = ifft2c(fft2c(image) + noise)
        images[label] = ComplexImage(image)
    log_module.debug("rendered %d contrasts at %dx%d", len(images),
                     spec.size, spec.size)
    return images
