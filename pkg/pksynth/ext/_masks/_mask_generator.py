from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import torch

from ... import SamplingMask
from ...util.utility import ValidationError, require

__all__ = ['MaskSpec', 'MaskGenerator', 'DENSITY_PROFILES']

DENSITY_PROFILES = ('uniform', 'variable')


@dataclass(frozen=True)
class MaskSpec:
    family: str
    R: float
    rows: int = 64
    cols: int = 64
    seed: int = 0
    density: str = 'variable'
    power: float = 2.0

    def __post_init__(self):
        require(self.R >= 1, f"acceleration R must be >= 1, got {self.R}")
        require(self.rows >= 8 and self.cols >= 8,
                f"masks are at least 8x8, got {self.rows}x{self.cols}")
        require(self.seed >= 0, f"seed must be nonnegative, got {self.seed}")
        require(self.density in DENSITY_PROFILES,
                f"density must be one of {DENSITY_PROFILES}, "
                f"got {self.density!r}")
        require(self.power > 0, f"power must be positive, got {self.power}")

    @property
    def dims(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def label(self) -> str:
        return self.family

    def center_distance(self) -> np.ndarray:
        """Distance of every grid point to the DC sample, scaled to [0, 1]."""
        u = np.arange(self.rows) - self.rows // 2
        v = np.arange(self.cols) - self.cols // 2
        distance = np.hypot(u[:, None], v[None, :])
        return distance / distance.max()

    def profile(self, normalized_distance: np.ndarray) -> np.ndarray:
        """Variable-density growth term 1 + (d/d_max)^power (1 if uniform)."""
        if self.density == 'uniform':
            return np.ones_like(normalized_distance)
        return 1.0 + normalized_distance ** self.power


class MaskGenerator(ABC):
    """
    Common frame of the seeded mask families. Subclasses draw the sampled
    locations; R = 1 always yields the fully-sampled mask.
    """
    family: str

    def __init__(self, spec: MaskSpec):
        if spec.family != self.family:
            raise ValidationError(f"{type(self).__name__} generates "
                                  f"{self.family!r} masks, got "
                                  f"{spec.family!r}")
        self.spec = spec

    def __call__(self) -> SamplingMask:
        if self.spec.R == 1:
            indicator = np.ones(self.spec.dims, dtype=bool)
        else:
            rng = np.random.default_rng(self.spec.seed)
            indicator = self.sample(rng)
        return SamplingMask(torch.from_numpy(indicator), self.spec.R,
                            self.spec.seed, self.family)

    @abstractmethod
    def sample(self, rng: np.random.Generator) -> np.ndarray:
        ...
