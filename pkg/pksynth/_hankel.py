"""
Block-Hankel lifting of multi-coil k-space.

Every row of the data matrix is one sliding window position (row-major
position order); its columns are the coil-major concatenation of the
row-major vectorized window. The count-averaging adjoint maps a matrix back
to k-space by giving every location the mean of the entries that reference
it, which is the orthogonal projection onto structured matrices followed by
the inverse lifting.
"""

import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import torch
import torch.nn.functional as F

from ._kspace import KSpaceVolume
from .util.utility import (ValidationError, RankClampWarning, require,
                           require_finite)

__all__ = ['HankelConfig', 'DataMatrix', 'hankel_forward',
           'hankel_adjoint_avg', 'lowrank_project', 'window_counts']


@dataclass(frozen=True)
class HankelConfig:
    win_rows: int = 6
    win_cols: int = 6
    rank_k: Optional[int] = None

    def __post_init__(self):
        require(self.win_rows >= 1 and self.win_cols >= 1,
                f"window must be positive, got "
                f"{self.win_rows}x{self.win_cols}")
        require(self.rank_k is None or self.rank_k >= 1,
                f"rank_k must be positive, got {self.rank_k}")

    @property
    def window(self) -> Tuple[int, int]:
        return self.win_rows, self.win_cols

    def rank_for(self, n_coils: int) -> int:
        """Configured rank, or 3 per coil when unset."""
        return self.rank_k if self.rank_k is not None else 3 * n_coils

    def num_windows(self, dims: Tuple[int, int]) -> int:
        return (dims[0] - self.win_rows + 1) * (dims[1] - self.win_cols + 1)

    def check_fits(self, dims: Tuple[int, int]):
        if self.win_rows > dims[0] or self.win_cols > dims[1]:
            raise ValidationError(
                f"window {self.win_rows}x{self.win_cols} does not fit a "
                f"{dims[0]}x{dims[1]} volume")


@dataclass
class DataMatrix:
    values: torch.Tensor
    dims: Optional[Tuple[int, int]] = None

    @property
    def shape(self) -> Tuple[int, int]:
        return tuple(self.values.shape)


def _unfold(x: torch.Tensor, cfg: HankelConfig) -> torch.Tensor:
    return F.unfold(x[None], kernel_size=cfg.window)[0]


def _fold(x: torch.Tensor, dims: Tuple[int, int],
          cfg: HankelConfig) -> torch.Tensor:
    return F.fold(x[None], output_size=dims, kernel_size=cfg.window)[0]


def hankel_forward(vol: KSpaceVolume, cfg: HankelConfig) -> DataMatrix:
    cfg.check_fits(vol.dims)
    data = vol.data
    lifted = torch.complex(_unfold(data.real.contiguous(), cfg),
                           _unfold(data.imag.contiguous(), cfg))
    return DataMatrix(lifted.transpose(0, 1), dims=vol.dims)


def window_counts(dims: Tuple[int, int], cfg: HankelConfig,
                  dtype=torch.float64, device=None) -> torch.Tensor:
    """Number of windows covering every k-space location."""
    cfg.check_fits(dims)
    ones = torch.ones((cfg.win_rows * cfg.win_cols, cfg.num_windows(dims)),
                      dtype=dtype, device=device)
    return _fold(ones, dims, cfg)[0]


def hankel_adjoint_avg(mat: DataMatrix, dims: Tuple[int, int],
                       cfg: HankelConfig) -> KSpaceVolume:
    cfg.check_fits(dims)
    values = mat.values
    window_size = cfg.win_rows * cfg.win_cols
    if (values.ndim != 2 or values.shape[0] != cfg.num_windows(dims)
            or values.shape[1] % window_size != 0 or values.shape[1] == 0):
        raise ValidationError(
            f"data matrix of shape {tuple(values.shape)} does not match "
            f"dims {dims} with a {cfg.win_rows}x{cfg.win_cols} window")
    columns = values.transpose(0, 1)
    counts = window_counts(dims, cfg, dtype=values.real.dtype,
                           device=values.device)
    real = _fold(columns.real.contiguous(), dims, cfg) / counts
    imag = _fold(columns.imag.contiguous(), dims, cfg) / counts
    return KSpaceVolume(torch.complex(real, imag))


def lowrank_project(mat: DataMatrix, rank_k: int) -> DataMatrix:
    """Best rank-k approximation in Frobenius norm (truncated SVD).

    The leading singular subspace is taken from the eigenvectors of the
    smaller Gram matrix, so the cost is set by the matrix shape alone.
    """
    if rank_k < 1:
        raise ValidationError(f"rank_k must be positive, got {rank_k}")
    values = mat.values
    require_finite(values, "data matrix")
    limit = min(values.shape)
    if rank_k > limit:
        warnings.warn(f"rank {rank_k} exceeds the matrix min-dimension "
                      f"{limit}; clamping to {limit}", RankClampWarning)
        rank_k = limit
    tall = values.shape[0] >= values.shape[1]
    gram = values.mH @ values if tall else values @ values.mH
    # eigenvalues ascend; the last rank_k vectors span the leading subspace
    _, vectors = torch.linalg.eigh(gram)
    basis = vectors[:, -rank_k:]
    if tall:
        projected = (values @ basis) @ basis.mH
    else:
        projected = basis @ (basis.mH @ values)
    return DataMatrix(projected, dims=mat.dims)
