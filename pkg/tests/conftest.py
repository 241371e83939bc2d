import pytest
import numpy as np
import torch
from typing import Dict, List

from pksynth import *
from pksynth.ext import *


def dtype_params():
    return [torch.float64, torch.float32]


def dtype_ids():
    return ['Float64', 'Float32']


def device_params():
    return [torch.device('cpu'), torch.device('cuda')]


def device_ids():
    return ['CPU', 'CUDA']


def mask_family_params():
    return ['random2d', 'cartesian1d', 'poisson2d']


def mask_family_ids():
    return ['Random2D', 'Cartesian1D', 'Poisson2D']


def axis_params():
    return list(AXES)


def axis_ids():
    return ['Row', 'Column']


def blocks_params():
    return [2, 3, 4]


def blocks_ids():
    return [f"Partition{p}" for p in blocks_params()]


@pytest.fixture(params=dtype_params(), ids=dtype_ids())
def fix_dtype(request):
    return request.param


@pytest.fixture(params=device_params(), ids=device_ids())
def fix_device(request):
    if 'cuda' in request.param.type and not torch.cuda.is_available():
        pytest.skip(reason="CUDA is not available on this machine.",
                    allow_module_level=True)
    return request.param


@pytest.fixture(params=mask_family_params(), ids=mask_family_ids())
def fix_mask_family(request):
    return request.param


@pytest.fixture(params=axis_params(), ids=axis_ids())
def fix_axis(request):
    return request.param


@pytest.fixture(params=blocks_params(), ids=blocks_ids())
def fix_blocks(request):
    return request.param


def random_volume(n_coils: int = 4, rows: int = 32, cols: int = 32,
                  seed: int = 0, dtype=torch.complex128) -> KSpaceVolume:
    generator = torch.Generator().manual_seed(seed)
    data = torch.randn((n_coils, rows, cols), generator=generator,
                       dtype=dtype)
    return KSpaceVolume(data)


def random_mask(rows: int = 32, cols: int = 32, keep: float = 0.6,
                seed: int = 0) -> SamplingMask:
    """Exactly round(keep * rows * cols) sampled locations."""
    rng = np.random.default_rng(seed)
    indicator = np.zeros(rows * cols, dtype=bool)
    indicator[rng.permutation(rows * cols)[:round(keep * rows * cols)]] = True
    return SamplingMask(torch.from_numpy(indicator.reshape(rows, cols)))


def labeled_volume(value: float, n_coils: int = 2, rows: int = 200,
                   cols: int = 200) -> KSpaceVolume:
    return KSpaceVolume(torch.full((n_coils, rows, cols), value,
                                   dtype=torch.complex128))


def lowrank_kspace(n_coils: int = 4, rows: int = 32, cols: int = 32,
                   rank: int = 2, seed: int = 0) -> KSpaceVolume:
    """Sum of `rank` 2D complex exponentials with coil-dependent weights.

    Every window of such a signal is a combination of the same `rank`
    exponentials, so its block-Hankel lifting has rank <= `rank`.
    """
    rng = np.random.default_rng(seed)
    u = np.arange(rows)[:, None]
    v = np.arange(cols)[None, :]
    fu = np.array([0.11, 0.37, 0.23, 0.71])[:rank]
    fv = np.array([0.29, 0.07, 0.53, 0.83])[:rank]
    weights = rng.standard_normal((n_coils, rank)) \
        + 1j * rng.standard_normal((n_coils, rank))
    data = np.zeros((n_coils, rows, cols), dtype=np.complex128)
    for j in range(rank):
        mode = np.exp(2j * np.pi * (fu[j] * u + fv[j] * v))
        data += weights[:, j, None, None] * mode[None]
    return KSpaceVolume(torch.from_numpy(data))


def seeded_contrasts(size: int = 64, n_coils: int = 4, seed: int = 0
                     ) -> Dict[str, KSpaceVolume]:
    """Fully sampled multi-coil k-space of the phantom contrasts."""
    spec = PhantomSpec(size=size, n_coils=n_coils, seed=seed)
    images = gen_phantom(spec)
    maps = gen_coil_maps(size, n_coils, seed)
    full = SamplingMask(torch.ones((size, size), dtype=torch.bool))
    return {label: simulate_acquisition(image, maps, full)
            for label, image in images.items()}


def truth_magnitude(volume: KSpaceVolume) -> torch.Tensor:
    return rss_combine(ifft2c(volume.data))


def contrast_set(contrasts: Dict[str, KSpaceVolume], mask: SamplingMask,
                 auxiliaries: List[str]) -> ContrastSet:
    return ContrastSet(contrasts['T2'], mask,
                       [(label, contrasts[label]) for label in auxiliaries],
                       'T2')
