import logging
import math

import torch

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from timeit import default_timer as timer
from typing import List, Optional, Tuple

from ._kspace import KSpaceVolume, SamplingMask
from ._hankel import (HankelConfig, hankel_forward, hankel_adjoint_avg,
                      lowrank_project)
from .util.utility import (ValidationError, NumericalDivergenceError,
                           require)

__all__ = ['Reporter', 'SakeConfig', 'SolveReport', 'SakeSolver',
           'sake_reconstruct', 'sake_residual']

log_module = logging.getLogger(__name__)


class Reporter(ABC):
    interval: int

    def __init__(self, interval: int):
        self.interval = interval

    @abstractmethod
    def __call__(self, solver: 'SakeSolver'):
        ...


@dataclass(frozen=True)
class SakeConfig:
    hankel: HankelConfig = field(default_factory=HankelConfig)
    max_iters: int = 30
    rel_tol: float = 1e-4
    record_history: bool = True

    def __post_init__(self):
        require(self.max_iters >= 1,
                f"max_iters must be >= 1, got {self.max_iters}")
        require(self.rel_tol >= 0,
                f"rel_tol must be nonnegative, got {self.rel_tol}")


@dataclass
class SolveReport:
    iterations_run: int
    rel_change_history: List[float]
    final_data_residual: float
    wall_time_s: float = 0.0
    converged: bool = False


def _check_consistent(x: KSpaceVolume, acquired: KSpaceVolume,
                      mask: SamplingMask):
    if x.data.shape != acquired.data.shape:
        raise ValidationError(f"volume shapes differ: "
                              f"{tuple(x.data.shape)} vs "
                              f"{tuple(acquired.data.shape)}")
    if acquired.dims != mask.dims:
        raise ValidationError(f"mask dims {mask.dims} do not match volume "
                              f"dims {acquired.dims}")


class SakeSolver:
    """Calibrationless structured low-rank completion.

    Every iteration lifts the current estimate into the block-Hankel data
    matrix, truncates it to rank k (LR), averages it back onto k-space (SC)
    and re-inserts the acquired samples (DC). The estimate starts from the
    zero-filled acquisition.
    """

    acquired: KSpaceVolume
    mask: SamplingMask
    cfg: SakeConfig
    reporter: List['Reporter']
    x: torch.Tensor
    iteration: int

    def __init__(self, acquired: KSpaceVolume, mask: SamplingMask,
                 cfg: Optional[SakeConfig] = None,
                 reporter: Optional[List['Reporter']] = None):
        self.cfg = cfg or SakeConfig()
        if acquired.dims != mask.dims:
            raise ValidationError(f"mask dims {mask.dims} do not match "
                                  f"volume dims {acquired.dims}")
        self.cfg.hankel.check_fits(acquired.dims)
        self.indicator = mask.indicator.to(acquired.data.device)[None]
        if bool((acquired.data[~self.indicator.expand_as(acquired.data)]
                 != 0).any()):
            raise ValidationError("acquired data has nonzero samples at "
                                  "unsampled mask locations")
        self.acquired = acquired
        self.mask = mask
        self.reporter = reporter or []
        self.rank = self.cfg.hankel.rank_for(acquired.n_coils)
        self.x = acquired.data.clone()
        self.iteration = 0
        self.rel_change = math.nan
        self.history: List[float] = []

    @property
    def estimate(self) -> KSpaceVolume:
        return KSpaceVolume(self.x)

    def _lowrank(self, x: torch.Tensor) -> torch.Tensor:
        dims = self.acquired.dims
        try:
            lifted = hankel_forward(KSpaceVolume(x), self.cfg.hankel)
            projected = lowrank_project(lifted, self.rank)
            return hankel_adjoint_avg(projected, dims, self.cfg.hankel).data
        except (ValidationError, torch.linalg.LinAlgError) as error:
            raise NumericalDivergenceError(
                self.iteration + 1,
                f"SAKE diverged at iteration {self.iteration + 1}: {error}")

    def step(self) -> float:
        """One LR -> SC -> DC sweep; returns the relative change."""
        structured = self._lowrank(self.x)
        x_new = torch.where(self.indicator, self.acquired.data, structured)
        if not bool(torch.isfinite(x_new).all()):
            raise NumericalDivergenceError(self.iteration + 1)
        previous = torch.linalg.vector_norm(self.x).item()
        change = torch.linalg.vector_norm(x_new - self.x).item()
        if previous > 0:
            rel_change = change / previous
        else:
            rel_change = 0.0 if change == 0 else math.inf
        self.x = x_new
        self.iteration += 1
        self.rel_change = rel_change
        return rel_change

    def _report(self):
        for reporter in self.reporter:
            if self.iteration % reporter.interval == 0:
                reporter(self)

    def data_residual(self) -> float:
        deviation = (self.x - self.acquired.data).abs()
        return deviation[self.indicator.expand_as(deviation)].max().item()

    def __call__(self) -> Tuple[KSpaceVolume, SolveReport]:
        beg = timer()
        converged = False

        if self.iteration == 0:
            self._report()

        for _ in range(self.cfg.max_iters):
            rel_change = self.step()
            if self.cfg.record_history:
                self.history.append(rel_change)
            log_module.debug("iteration %d: relative change %.3e",
                             self.iteration, rel_change)
            self._report()
            if rel_change < self.cfg.rel_tol:
                converged = True
                break

        end = timer()
        report = SolveReport(iterations_run=self.iteration,
                             rel_change_history=list(self.history),
                             final_data_residual=self.data_residual(),
                             wall_time_s=end - beg,
                             converged=converged)
        log_module.info("SAKE finished after %d iterations in %.2f s",
                        report.iterations_run, report.wall_time_s)
        return self.estimate, report


def sake_reconstruct(acquired: KSpaceVolume, mask: SamplingMask,
                     cfg: Optional[SakeConfig] = None,
                     reporter: Optional[List['Reporter']] = None
                     ) -> Tuple[KSpaceVolume, SolveReport]:
    return SakeSolver(acquired, mask, cfg, reporter)()


def sake_residual(x: KSpaceVolume, acquired: KSpaceVolume,
                  mask: SamplingMask) -> float:
    """Squared Frobenius norm of (x - acquired) on the sampled locations."""
    _check_consistent(x, acquired, mask)
    indicator = mask.indicator.to(x.data.device)[None]
    difference = torch.where(indicator, x.data - acquired.data,
                             torch.zeros_like(x.data))
    return (difference.abs() ** 2).sum().item()
