"""
Partition-based k-space synthesis.

The fully-sampled auxiliary contrasts and the under-sampled target are cut
into blocks along one k-space axis. Object i carries the target block i and
auxiliary blocks everywhere else; each object is completed by SAKE with the
auxiliary blocks pinned as acquired data, and the target is reassembled from
the target block of every object.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import torch

from ._kspace import KSpaceVolume, SamplingMask, apply_mask
from ._solver import SakeConfig, SolveReport, sake_reconstruct
from .util.utility import ValidationError, require

__all__ = ['AXES', 'PartitionSpec', 'BlockSource', 'HybridObject',
           'ContrastSet', 'decompose', 'pks_transform',
           'pks_inverse_transform', 'compose_multi_aux', 'sake_pks']

log_module = logging.getLogger(__name__)

AXES = ('row', 'column')


@dataclass(frozen=True)
class PartitionSpec:
    """Where to cut and how far target blocks reach into their neighbours.

    ``overlap_rows`` extends every target block past its trailing boundary,
    ``overlap_before`` back past its leading boundary (defaults to
    ``overlap_rows``). With ``match_scale`` every auxiliary is first
    rescaled onto the target (see ContrastSet.scale_matched).
    """
    axis: str = 'row'
    num_blocks: int = 2
    boundaries: Optional[Tuple[int, ...]] = None
    overlap_rows: int = 0
    overlap_before: Optional[int] = None
    subsplit: bool = False
    first_aux_at_edge: bool = False
    match_scale: bool = True

    def __post_init__(self):
        require(self.axis in AXES,
                f"axis must be one of {AXES}, got {self.axis!r}")
        require(self.num_blocks >= 1,
                f"num_blocks must be positive, got {self.num_blocks}")
        if self.boundaries is not None:
            object.__setattr__(self, 'boundaries',
                               tuple(int(b) for b in self.boundaries))
            require(len(self.boundaries) + 1 == self.num_blocks,
                    f"{len(self.boundaries)} boundaries make "
                    f"{len(self.boundaries) + 1} blocks, not "
                    f"{self.num_blocks}")
        require(self.overlap_rows >= 0,
                f"overlap_rows must be nonnegative, got {self.overlap_rows}")
        require(self.overlap_before is None or self.overlap_before >= 0,
                f"overlap_before must be nonnegative, "
                f"got {self.overlap_before}")

    @classmethod
    def from_ratios(cls, n: int, ratios: Sequence[float], **kwargs
                    ) -> 'PartitionSpec':
        """Boundaries from relative block sizes, e.g. (1, 2) -> n/3."""
        require(len(ratios) >= 1 and all(r > 0 for r in ratios),
                f"ratios must be positive, got {list(ratios)}")
        total = float(sum(ratios))
        boundaries, running = [], 0.0
        for ratio in ratios[:-1]:
            running += ratio
            boundaries.append(int(n * running // total))
        spec = cls(num_blocks=len(ratios), boundaries=tuple(boundaries),
                   **kwargs)
        spec.bounds(n)
        return spec

    @property
    def forward_overlap(self) -> int:
        return self.overlap_rows

    @property
    def backward_overlap(self) -> int:
        return (self.overlap_rows if self.overlap_before is None
                else self.overlap_before)

    def bounds(self, n: int) -> List[int]:
        """Block edges [0, b_1, ..., b_{p-1}, n] for an axis of length n."""
        if self.boundaries is None:
            inner = [i * n // self.num_blocks
                     for i in range(1, self.num_blocks)]
        else:
            inner = list(self.boundaries)
        edges = [0] + inner + [n]
        if any(lo >= hi for lo, hi in zip(edges[:-1], edges[1:])):
            raise ValidationError(f"boundaries {inner} are not strictly "
                                  f"increasing inside (0, {n})")
        last = self.num_blocks - 1
        for j, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
            intrusion = ((self.forward_overlap if j > 0 else 0)
                         + (self.backward_overlap if j < last else 0))
            if intrusion >= hi - lo:
                raise ValidationError(
                    f"overlap of {intrusion} rows swallows block {j} "
                    f"[{lo}, {hi})")
        return edges

    def target_span(self, i: int, n: int) -> Tuple[int, int]:
        """Rows of object i that hold target data."""
        edges = self.bounds(n)
        lo = edges[i] - (self.backward_overlap if i > 0 else 0)
        hi = edges[i + 1] + (self.forward_overlap
                             if i < self.num_blocks - 1 else 0)
        return lo, hi


@dataclass(frozen=True)
class BlockSource:
    start: int
    stop: int
    label: str


@dataclass
class HybridObject:
    volume: KSpaceVolume
    block_sources: List[BlockSource]
    mask_union: SamplingMask
    target_span: Tuple[int, int]
    axis: str = 'row'

    @property
    def labels(self) -> List[str]:
        return [source.label for source in self.block_sources]


@dataclass
class ContrastSet:
    target: KSpaceVolume
    mask: SamplingMask
    auxiliaries: List[Tuple[str, KSpaceVolume]] = field(default_factory=list)
    target_label: str = 'T2'

    def __post_init__(self):
        if self.target.dims != self.mask.dims:
            raise ValidationError(f"mask dims {self.mask.dims} do not match "
                                  f"target dims {self.target.dims}")
        for label, volume in self.auxiliaries:
            if volume.data.shape != self.target.data.shape:
                raise ValidationError(
                    f"auxiliary {label} of shape {tuple(volume.data.shape)} "
                    f"does not match target {tuple(self.target.data.shape)}")

    @property
    def labels(self) -> List[str]:
        return [label for label, _ in self.auxiliaries]

    def masked_target(self) -> KSpaceVolume:
        return apply_mask(self.target, self.mask)

    def transpose(self) -> 'ContrastSet':
        return ContrastSet(self.target.transpose(), self.mask.transpose(),
                           [(label, volume.transpose())
                            for label, volume in self.auxiliaries],
                           self.target_label)

    def select(self, labels: Sequence[str]) -> 'ContrastSet':
        """The same target with only the named auxiliaries, in that order."""
        available = dict(self.auxiliaries)
        missing = [label for label in labels if label not in available]
        if missing:
            raise ValidationError(f"auxiliary contrasts {missing} are not "
                                  f"available (have {self.labels})")
        return ContrastSet(self.target, self.mask,
                           [(label, available[label]) for label in labels],
                           self.target_label)

    def scale_matched(self) -> 'ContrastSet':
        """Every auxiliary multiplied by the complex least-squares gain
        sum(conj(a) y) / sum(|a|^2) taken over the samples the target
        acquired, pooled across coils. An auxiliary equal to the target gets
        gain 1.
        """
        sampled = self.mask.indicator.to(self.target.data.device)
        acquired = self.target.data[:, sampled].flatten()
        matched = []
        for label, volume in self.auxiliaries:
            reference = volume.data[:, sampled].flatten()
            energy = torch.vdot(reference, reference).real
            if energy == 0:
                matched.append((label, volume))
                continue
            gain = torch.vdot(reference, acquired) / energy
            log_module.debug("auxiliary %s scaled by %.4g (phase %.3f)",
                             label, gain.abs().item(), gain.angle().item())
            matched.append((label, KSpaceVolume(volume.data * gain)))
        return ContrastSet(self.target, self.mask, matched, self.target_label)


def _axis_length(vol: KSpaceVolume, axis: str) -> int:
    return vol.rows if axis == 'row' else vol.cols


def decompose(vol: KSpaceVolume, spec: PartitionSpec) -> List[torch.Tensor]:
    """Contiguous slabs of vol along the partition axis."""
    dim = 1 if spec.axis == 'row' else 2
    edges = spec.bounds(_axis_length(vol, spec.axis))
    return [vol.data.narrow(dim, lo, hi - lo)
            for lo, hi in zip(edges[:-1], edges[1:])]


def _row_segments(spec: PartitionSpec, i: int, n: int,
                  aux_layout: List[Tuple[int, int, int]]
                  ) -> List[Tuple[int, int, Optional[int]]]:
    """Segments (start, stop, aux index or None for target) of object i,
    with the target span cut out of the auxiliary layout."""
    lo, hi = spec.target_span(i, n)
    segments = []
    for start, stop, aux in aux_layout:
        if start < lo:
            segments.append((start, min(stop, lo), aux))
        if stop > hi:
            segments.append((max(start, hi), stop, aux))
    segments.append((lo, hi, None))
    return sorted(segments)


def _cycled_layout(spec: PartitionSpec, i: int, n: int, n_aux: int
                   ) -> List[Tuple[int, int, int]]:
    edges = spec.bounds(n)
    layout, k = [], 0
    for j in range(spec.num_blocks):
        if j == i:
            continue
        layout.append((edges[j], edges[j + 1], k % n_aux))
        k += 1
    return layout


def _split_layout(spec: PartitionSpec, i: int, n: int
                  ) -> List[Tuple[int, int, int]]:
    """Auxiliary half of object i cut in two; auxiliary 0 sits next to the
    target block unless ``first_aux_at_edge``."""
    edges = spec.bounds(n)
    j = 1 - i
    lo, hi = edges[j], edges[j + 1]
    mid = lo + (hi - lo) // 2
    if j == 0:
        outer, inner = (lo, mid), (mid, hi)
    else:
        inner, outer = (lo, mid), (mid, hi)
    first, second = (outer, inner) if spec.first_aux_at_edge \
        else (inner, outer)
    return sorted([(*first, 0), (*second, 1)])


def _compose_rows(cs: ContrastSet, spec: PartitionSpec,
                  layout_for) -> List[HybridObject]:
    target = cs.masked_target()
    n = target.rows
    objects = []
    for i in range(spec.num_blocks):
        data = torch.empty_like(target.data)
        indicator = torch.empty_like(cs.mask.indicator)
        sources = []
        for start, stop, aux in _row_segments(spec, i, n, layout_for(i, n)):
            if aux is None:
                label = cs.target_label
                data[:, start:stop] = target.data[:, start:stop]
                indicator[start:stop] = cs.mask.indicator[start:stop]
            else:
                label, volume = cs.auxiliaries[aux]
                data[:, start:stop] = volume.data[:, start:stop]
                indicator[start:stop] = True
            sources.append(BlockSource(start, stop, label))
        mask_union = SamplingMask(indicator, cs.mask.nominal_R, cs.mask.seed,
                                  cs.mask.family)
        objects.append(HybridObject(KSpaceVolume(data), sources, mask_union,
                                    spec.target_span(i, n), spec.axis))
    return objects


def _transposed(objects: List[HybridObject]) -> List[HybridObject]:
    return [HybridObject(obj.volume.transpose(), obj.block_sources,
                         obj.mask_union.transpose(), obj.target_span,
                         'column') for obj in objects]


def _check_transform(cs: ContrastSet, spec: PartitionSpec):
    if not cs.auxiliaries:
        raise ValidationError("k-space synthesis needs at least one "
                              "auxiliary contrast")
    spec.bounds(_axis_length(cs.target, spec.axis))


def compose_multi_aux(cs: ContrastSet, spec: PartitionSpec
                      ) -> List[HybridObject]:
    """Partition-2 objects whose auxiliary half holds one quarter of each
    of the two auxiliary contrasts."""
    if len(cs.auxiliaries) != 2:
        raise ValidationError(f"compose_multi_aux needs exactly 2 "
                              f"auxiliaries, got {len(cs.auxiliaries)}")
    require(spec.num_blocks == 2,
            f"sub-split composition is defined for 2 blocks, "
            f"got {spec.num_blocks}")
    _check_transform(cs, spec)
    if spec.axis == 'column':
        return _transposed(_compose_rows(
            cs.transpose(), spec, lambda i, n: _split_layout(spec, i, n)))
    return _compose_rows(cs, spec, lambda i, n: _split_layout(spec, i, n))


def pks_transform(cs: ContrastSet, spec: PartitionSpec
                  ) -> List[HybridObject]:
    _check_transform(cs, spec)
    if spec.subsplit and len(cs.auxiliaries) == 2:
        return compose_multi_aux(cs, spec)
    n_aux = len(cs.auxiliaries)

    def layout(i, n):
        return _cycled_layout(spec, i, n, n_aux)

    if spec.axis == 'column':
        return _transposed(_compose_rows(cs.transpose(), spec, layout))
    return _compose_rows(cs, spec, layout)


def pks_inverse_transform(recons: Sequence[KSpaceVolume],
                          spec: PartitionSpec) -> KSpaceVolume:
    """Target block i from reconstruction i; rows claimed by two objects
    are averaged."""
    if len(recons) != spec.num_blocks:
        raise ValidationError(f"expected {spec.num_blocks} reconstructions, "
                              f"got {len(recons)}")
    shape = recons[0].data.shape
    if any(r.data.shape != shape for r in recons):
        raise ValidationError("reconstructions differ in shape")
    if spec.axis == 'column':
        return pks_inverse_transform([r.transpose() for r in recons],
                                     replace(spec, axis='row')).transpose()
    n = recons[0].rows
    total = torch.zeros_like(recons[0].data)
    count = torch.zeros(n, dtype=total.real.dtype, device=total.device)
    for i, recon in enumerate(recons):
        lo, hi = spec.target_span(i, n)
        total[:, lo:hi] += recon.data[:, lo:hi]
        count[lo:hi] += 1
    return KSpaceVolume(total / count[None, :, None])


def sake_pks(cs: ContrastSet, spec: PartitionSpec,
             scfg: Optional[SakeConfig] = None, workers: int = 1
             ) -> Tuple[KSpaceVolume, List[SolveReport]]:
    """Transform, complete every hybrid object with SAKE (auxiliary blocks
    pinned through the object's mask union) and synthesize the target."""
    scfg = scfg or SakeConfig()
    if spec.match_scale:
        cs = cs.scale_matched()
    objects = pks_transform(cs, spec)
    log_module.info("synthesizing %s from %d objects (%s axis, aux %s)",
                    cs.target_label, len(objects), spec.axis, cs.labels)

    def solve(obj: HybridObject):
        return sake_reconstruct(obj.volume, obj.mask_union, scfg)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(solve, objects))
    else:
        results = [solve(obj) for obj in objects]

    recons = [recon for recon, _ in results]
    reports = [report for _, report in results]
    return pks_inverse_transform(recons, spec), reports
