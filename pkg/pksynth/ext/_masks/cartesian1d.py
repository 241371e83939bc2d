"""
Whole phase-encode rows, without a dense calibration block.
"""
import math

import numpy as np

from ._mask_generator import MaskGenerator, MaskSpec
from ...util.utility import ValidationError

__all__ = ['Cartesian1D', 'gen_cartesian1d']


class Cartesian1D(MaskGenerator):
    family = 'cartesian1d'

    @property
    def num_rows(self) -> int:
        return math.floor(self.spec.rows / self.spec.R + 0.5)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        rows, cols = self.spec.dims
        if self.num_rows < 1:
            raise ValidationError(f"R={self.spec.R} leaves no rows of "
                                  f"{rows} selected")
        if self.spec.density == 'uniform':
            chosen = rng.choice(rows, size=self.num_rows, replace=False)
        else:
            distance = np.abs(np.arange(rows) - rows // 2)
            weight = 1.0 / self.spec.profile(distance / distance.max())
            chosen = rng.choice(rows, size=self.num_rows, replace=False,
                                p=weight / weight.sum())
        indicator = np.zeros((rows, cols), dtype=bool)
        indicator[chosen, :] = True
        return indicator


def gen_cartesian1d(spec: MaskSpec) -> 'SamplingMask':
    return Cartesian1D(spec)()
