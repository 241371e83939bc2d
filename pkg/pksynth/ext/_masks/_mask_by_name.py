from typing import Dict, Type, AnyStr

from . import MaskGenerator, MaskSpec, Random2D, Cartesian1D, Poisson2D
from ...util.utility import ValidationError

__all__ = ['mask_by_name', 'generate_mask']

mask_by_name: Dict[AnyStr, Type['MaskGenerator']] = {
    'random2d': Random2D,
    'cartesian1d': Cartesian1D,
    'poisson2d': Poisson2D}


def generate_mask(spec: MaskSpec) -> 'SamplingMask':
    if spec.family not in mask_by_name:
        raise ValidationError(f"unknown mask family {spec.family!r}; "
                              f"choose from {sorted(mask_by_name)}")
    return mask_by_name[spec.family](spec)()
