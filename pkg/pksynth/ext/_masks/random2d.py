"""
Independent per-location Bernoulli sampling.
"""
import numpy as np

from ._mask_generator import MaskGenerator, MaskSpec

__all__ = ['Random2D', 'gen_random2d']


class Random2D(MaskGenerator):
    family = 'random2d'

    def acceptance(self, iterations: int = 200) -> np.ndarray:
        """Per-location acceptance min(1, c / profile) with mean 1/R."""
        weight = 1.0 / self.spec.profile(self.spec.center_distance())
        target = 1.0 / self.spec.R
        lo, hi = 0.0, 1.0 / weight.min()
        for _ in range(iterations):
            c = 0.5 * (lo + hi)
            if np.minimum(1.0, c * weight).mean() < target:
                lo = c
            else:
                hi = c
        return np.minimum(1.0, hi * weight)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return rng.random(self.spec.dims) < self.acceptance()


def gen_random2d(spec: MaskSpec) -> 'SamplingMask':
    return Random2D(spec)()
