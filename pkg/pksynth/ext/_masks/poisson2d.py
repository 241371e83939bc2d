"""
Variable-density Poisson-disc sampling by dart throwing.

A point p may join the mask only if every already accepted point q lies at
least max(r(p), r(q)) away, where r = scale * profile(d/d_max) grows towards
the k-space edge. The DC sample is thrown first. The global scale is
calibrated by bisection to the sparsest mask holding at least round(N/R)
points, and a seeded random subset of its surplus points is dropped so the
sampled fraction is exactly 1/R.
"""
import logging
import math
from typing import Optional

import numpy as np

from ._mask_generator import MaskGenerator, MaskSpec
from ...util.utility import MaskGenerationError

__all__ = ['Poisson2D', 'gen_poisson2d']

log_module = logging.getLogger(__name__)


class Poisson2D(MaskGenerator):
    family = 'poisson2d'
    max_calibrations: int = 50
    stop_tolerance: float = 1e-3

    def __init__(self, spec: MaskSpec):
        super().__init__(spec)
        self.scale: Optional[float] = None

    def radius_map(self, scale: float) -> np.ndarray:
        return scale * self.spec.profile(self.spec.center_distance())

    def throw(self, order: np.ndarray, scale: float) -> np.ndarray:
        rows, cols = self.spec.dims
        radius = self.radius_map(scale)
        reach = int(math.ceil(radius.max()))
        accepted = np.zeros((rows, cols), dtype=bool)
        for flat in order:
            i, j = divmod(int(flat), cols)
            i0, i1 = max(0, i - reach), min(rows, i + reach + 1)
            j0, j1 = max(0, j - reach), min(cols, j + reach + 1)
            near_i, near_j = np.nonzero(accepted[i0:i1, j0:j1])
            if near_i.size:
                near_i += i0
                near_j += j0
                distance = np.hypot(near_i - i, near_j - j)
                needed = np.maximum(radius[i, j], radius[near_i, near_j])
                if np.any(distance < needed):
                    continue
            accepted[i, j] = True
        return accepted

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        rows, cols = self.spec.dims
        count = max(1, int(round(rows * cols / self.spec.R)))
        # the DC sample is thrown first, so every mask contains it
        dc = (rows // 2) * cols + cols // 2
        order = rng.permutation(rows * cols)
        order = np.concatenate(([dc], order[order != dc]))

        lo, hi = 0.0, 1.0
        attempts = 0
        while self.throw(order, hi).sum() > count:
            lo, hi = hi, 2.0 * hi
            attempts += 1
            if attempts >= self.max_calibrations:
                raise MaskGenerationError(
                    f"no disc radius reaches density {count / order.size:.4f}")

        # invariant: throw(lo) holds at least `count` points, throw(hi) fewer
        dense = self.throw(order, lo)
        for _ in range(self.max_calibrations):
            scale = 0.5 * (lo + hi)
            mask = self.throw(order, scale)
            if mask.sum() >= count:
                lo, dense = scale, mask
            else:
                hi = scale
            if dense.sum() == count or (hi - lo) <= self.stop_tolerance * lo:
                break

        # dropping points never breaks the spacing rule at scale lo
        surplus = int(dense.sum()) - count
        if surplus > 0:
            candidates = np.flatnonzero(dense.ravel())
            candidates = candidates[candidates != dc]
            drop = rng.choice(candidates, size=surplus, replace=False)
            dense.flat[drop] = False
        log_module.debug("poisson2d scale %.4f, %d points trimmed, "
                         "fraction %.4f", lo, max(surplus, 0), dense.mean())
        self.scale = lo
        return dense


def gen_poisson2d(spec: MaskSpec) -> 'SamplingMask':
    return Poisson2D(spec)()
