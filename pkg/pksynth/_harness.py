"""
Config-driven experiment grids.

A configuration names a ground truth (synthetic phantom or raw k-space
files), a list of masks and a list of variants; every (mask, variant) cell
is reconstructed, scored against the target magnitude and exported as raw
k-space plus PNG images. One CSV row is written per cell.
"""

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from timeit import default_timer as timer
from typing import Dict, List, Optional, Sequence, Tuple, Union

import torch
import yaml

from ._context import Context
from ._kspace import KSpaceVolume, SamplingMask, ifft2c, rss_combine
from ._hankel import HankelConfig
from ._solver import SakeConfig, sake_reconstruct
from ._partition import ContrastSet, PartitionSpec, sake_pks
from .util.utility import ConfigError, PksException, ValidationError
from .util.metrics import evaluate
from .ext._masks import MaskSpec, generate_mask, mask_by_name
from .ext._phantom import (PhantomSpec, RawKSpaceFile, gen_coil_maps,
                           gen_phantom, read_raw, simulate_acquisition,
                           write_mask, write_raw)
from .ext._reporter import ErrorMap, export_png, write_comparison

__all__ = ['BASELINES', 'CSV_COLUMNS', 'VariantSpec', 'ExperimentConfig',
           'ResultRow', 'load_config', 'build_ground_truth', 'magnitude_of',
           'run_variant', 'run_experiment', 'write_results']

log_module = logging.getLogger(__name__)

BASELINES = ('zerofilled', 'sake')
CSV_COLUMNS = ('variant', 'mask', 'R', 'seed', 'psnr_db', 'ssim',
               'total_time_s', 'single_time_s', 'status')

_TOP_KEYS = {'seed', 'output_dir', 'workers', 'object_workers', 'target',
             'phantom', 'raw', 'masks', 'solver', 'variants', 'figures',
             'error_scale'}
_PHANTOM_KEYS = {'size', 'n_coils', 'seed', 'noise_std', 'contrast_params'}
_MASK_KEYS = {'family', 'R', 'seed', 'density', 'power'}
_SOLVER_KEYS = {'window', 'rank', 'max_iters', 'rel_tol', 'record_history'}
_VARIANT_KEYS = {'name', 'baseline', 'pks'}
_PKS_KEYS = {'axis', 'blocks', 'boundaries', 'ratios', 'overlap',
             'overlap_before', 'auxiliaries', 'subsplit', 'first_aux_at_edge',
             'match_scale'}


@dataclass(frozen=True)
class VariantSpec:
    name: str
    baseline: Optional[str] = None
    partition: Optional[PartitionSpec] = None
    ratios: Optional[Tuple[float, ...]] = None
    auxiliaries: Tuple[str, ...] = ()

    @property
    def is_pks(self) -> bool:
        return self.baseline is None

    def partition_for(self, n: int) -> PartitionSpec:
        if self.ratios is None:
            return self.partition
        kwargs = {key: getattr(self.partition, key) for key in (
            'axis', 'overlap_rows', 'overlap_before', 'subsplit',
            'first_aux_at_edge', 'match_scale')}
        return PartitionSpec.from_ratios(n, self.ratios, **kwargs)


@dataclass
class ExperimentConfig:
    masks: List[MaskSpec]
    variants: List[VariantSpec]
    seed: int = 0
    output_dir: Path = Path('pksynth_out')
    workers: int = 1
    object_workers: int = 1
    target: str = 'T2'
    phantom: PhantomSpec = field(default_factory=PhantomSpec)
    raw: Optional[Dict[str, Path]] = None
    solver: SakeConfig = field(default_factory=SakeConfig)
    figures: bool = False
    error_scale: float = 5.0

    @classmethod
    def from_dict(cls, document: dict) -> 'ExperimentConfig':
        try:
            return _parse(document)
        except ValidationError as error:
            raise ConfigError(str(error)) from error
        except KeyError as error:
            raise ConfigError(f"missing configuration key {error}") from error
        except (TypeError, ValueError) as error:
            raise ConfigError(f"malformed configuration: {error}") from error

    @property
    def contrasts(self) -> Tuple[str, ...]:
        if self.raw is not None:
            return tuple(self.raw)
        return self.phantom.labels


def _section(document, name: str, allowed: set) -> dict:
    section = document.get(name) or {}
    if not isinstance(section, dict):
        raise ConfigError(f"'{name}' must be a mapping")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in '{name}': {sorted(unknown)}")
    return section


def _parse_variant(entry: dict, index: int) -> VariantSpec:
    if not isinstance(entry, dict):
        raise ConfigError(f"variant {index} must be a mapping")
    unknown = set(entry) - _VARIANT_KEYS
    if unknown:
        raise ConfigError(f"unknown keys in variant {index}: "
                          f"{sorted(unknown)}")
    if ('baseline' in entry) == ('pks' in entry):
        raise ConfigError(f"variant {index} needs exactly one of "
                          f"'baseline' or 'pks'")
    if 'baseline' in entry:
        baseline = str(entry['baseline']).lower()
        if baseline not in BASELINES:
            raise ConfigError(f"unknown baseline {entry['baseline']!r}; "
                              f"choose from {BASELINES}")
        return VariantSpec(str(entry.get('name', baseline)), baseline)

    pks = _section(entry, 'pks', _PKS_KEYS)
    auxiliaries = tuple(str(label) for label in pks.get('auxiliaries',
                                                         ['T1']))
    boundaries = pks.get('boundaries')
    ratios = pks.get('ratios')
    if boundaries is not None and ratios is not None:
        raise ConfigError(f"variant {index} gives both boundaries and "
                          f"ratios")
    blocks = int(pks.get('blocks', len(ratios) if ratios else
                         len(boundaries) + 1 if boundaries else 2))
    partition = PartitionSpec(
        axis=str(pks.get('axis', 'row')).lower(),
        num_blocks=blocks,
        boundaries=tuple(boundaries) if boundaries is not None else None,
        overlap_rows=int(pks.get('overlap', 0)),
        overlap_before=(None if pks.get('overlap_before') is None
                        else int(pks['overlap_before'])),
        subsplit=bool(pks.get('subsplit', False)),
        first_aux_at_edge=bool(pks.get('first_aux_at_edge', False)),
        match_scale=bool(pks.get('match_scale', True)))
    name = entry.get('name') or f"pks{partition.num_blocks}_" \
                                f"{partition.axis}"
    return VariantSpec(str(name), None, partition,
                       tuple(float(r) for r in ratios) if ratios else None,
                       auxiliaries)


def _parse(document: dict) -> ExperimentConfig:
    if not isinstance(document, dict):
        raise ConfigError("an experiment configuration is a mapping")
    unknown = set(document) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    seed = int(document.get('seed', 0))

    phantom_doc = _section(document, 'phantom', _PHANTOM_KEYS)
    phantom = PhantomSpec(**{'seed': seed, **phantom_doc})
    raw = document.get('raw')
    if raw is not None:
        if phantom_doc:
            raise ConfigError("give either 'phantom' or 'raw', not both")
        if not isinstance(raw, dict) or not raw:
            raise ConfigError("'raw' maps contrast labels to file paths")
        raw = {str(label): Path(path) for label, path in raw.items()}

    masks = []
    entries = document.get('masks')
    if not entries:
        raise ConfigError("at least one mask is required")
    for entry in entries:
        if not isinstance(entry, dict):
            raise ConfigError("masks are mappings")
        unknown = set(entry) - _MASK_KEYS
        if unknown:
            raise ConfigError(f"unknown mask keys: {sorted(unknown)}")
        family = str(entry.get('family', '')).lower()
        if family not in mask_by_name:
            raise ConfigError(f"unknown mask family {entry.get('family')!r}; "
                              f"choose from {sorted(mask_by_name)}")
        masks.append(MaskSpec(family=family, R=float(entry['R']),
                              rows=phantom.size, cols=phantom.size,
                              seed=int(entry.get('seed', seed)),
                              density=str(entry.get('density', 'variable')),
                              power=float(entry.get('power', 2.0))))
    keys = [(m.family, m.R) for m in masks]
    if len(set(keys)) != len(keys):
        raise ConfigError("masks must differ in family or R")

    solver_doc = _section(document, 'solver', _SOLVER_KEYS)
    window = solver_doc.get('window', [6, 6])
    if isinstance(window, int):
        window = [window, window]
    rank = solver_doc.get('rank')
    solver = SakeConfig(
        hankel=HankelConfig(int(window[0]), int(window[1]),
                            None if rank is None else int(rank)),
        max_iters=int(solver_doc.get('max_iters', 30)),
        rel_tol=float(solver_doc.get('rel_tol', 1e-4)),
        record_history=bool(solver_doc.get('record_history', True)))

    variant_docs = document.get('variants')
    if not variant_docs:
        raise ConfigError("at least one variant is required")
    variants = [_parse_variant(entry, index)
                for index, entry in enumerate(variant_docs)]
    names = [variant.name for variant in variants]
    if len(set(names)) != len(names):
        raise ConfigError(f"variant names must be unique, got {names}")

    cfg = ExperimentConfig(
        masks=masks, variants=variants, seed=seed,
        output_dir=Path(document.get('output_dir', 'pksynth_out')),
        workers=int(document.get('workers', 1)),
        object_workers=int(document.get('object_workers', 1)),
        target=str(document.get('target', 'T2')),
        phantom=phantom, raw=raw, solver=solver,
        figures=bool(document.get('figures', False)),
        error_scale=float(document.get('error_scale', 5.0)))

    if cfg.workers < 1 or cfg.object_workers < 1:
        raise ConfigError("worker counts must be positive")
    if cfg.target not in cfg.contrasts:
        raise ConfigError(f"target contrast {cfg.target} is not among "
                          f"{list(cfg.contrasts)}")
    for variant in variants:
        for label in variant.auxiliaries:
            if label not in cfg.contrasts or label == cfg.target:
                raise ConfigError(f"variant {variant.name} uses auxiliary "
                                  f"{label}, which is not an available "
                                  f"non-target contrast")
    return cfg


def load_config(source: Union[str, Path, dict]) -> ExperimentConfig:
    if isinstance(source, dict):
        return ExperimentConfig.from_dict(source)
    try:
        with open(source) as fs:
            document = yaml.safe_load(fs)
    except OSError as error:
        raise ConfigError(f"cannot read configuration {source}: {error}")
    except yaml.YAMLError as error:
        raise ConfigError(f"cannot parse configuration {source}: {error}")
    return ExperimentConfig.from_dict(document or {})


@dataclass
class ResultRow:
    variant: str
    mask: str
    R: float
    seed: int
    psnr_db: float = math.nan
    ssim: float = math.nan
    total_time_s: float = math.nan
    single_time_s: float = math.nan
    status: str = 'ok'

    @property
    def wall_time_s(self) -> float:
        return self.total_time_s

    @property
    def stem(self) -> str:
        return f"{self.variant}_{self.mask}_{self.R:g}"

    def as_csv_row(self) -> List[str]:
        return [self.variant, self.mask, f"{self.R:g}", str(self.seed),
                f"{self.psnr_db:.4f}", f"{self.ssim:.6f}",
                f"{self.total_time_s:.4f}", f"{self.single_time_s:.4f}",
                self.status]


def magnitude_of(raw: RawKSpaceFile) -> torch.Tensor:
    """Coil-combined magnitude of a raw file (k-space or image domain)."""
    if raw.domain == 'image':
        return raw.volume.data[0].abs()
    return rss_combine(ifft2c(raw.volume.data))


def build_ground_truth(cfg: ExperimentConfig,
                       context: Optional[Context] = None
                       ) -> Dict[str, KSpaceVolume]:
    """Fully sampled multi-coil k-space of every contrast."""
    context = context or Context()
    if cfg.raw is not None:
        volumes = {label: read_raw(path, context).volume
                   for label, path in cfg.raw.items()}
        shapes = {tuple(v.data.shape) for v in volumes.values()}
        if len(shapes) != 1:
            raise ValidationError(f"raw contrasts differ in shape: {shapes}")
        return volumes
    images = gen_phantom(cfg.phantom, context)
    maps = gen_coil_maps(cfg.phantom.size, cfg.phantom.n_coils,
                         cfg.phantom.seed, context)
    full = SamplingMask(torch.ones((cfg.phantom.size, cfg.phantom.size),
                                   dtype=torch.bool))
    return {label: simulate_acquisition(image, maps, full)
            for label, image in images.items()}


def run_variant(variant: VariantSpec, cs: ContrastSet, solver: SakeConfig,
                object_workers: int = 1
                ) -> Tuple[KSpaceVolume, float, float]:
    """Reconstruct one cell; returns (k-space, total time, single time)."""
    if variant.baseline == 'zerofilled':
        beg = timer()
        recon = cs.masked_target()
        elapsed = timer() - beg
        return recon, elapsed, elapsed
    if variant.baseline == 'sake':
        recon, report = sake_reconstruct(cs.masked_target(), cs.mask, solver)
        return recon, report.wall_time_s, report.wall_time_s
    n = cs.target.rows if variant.partition.axis == 'row' else cs.target.cols
    recon, reports = sake_pks(cs.select(variant.auxiliaries),
                              variant.partition_for(n), solver,
                              workers=object_workers)
    total = sum(report.wall_time_s for report in reports)
    return recon, total, total / len(reports)


def _run_cell(cfg: ExperimentConfig, variant: VariantSpec, cs: ContrastSet,
              spec: MaskSpec, truth: torch.Tensor,
              zero_filled: torch.Tensor) -> ResultRow:
    row = ResultRow(variant.name, spec.family, spec.R, spec.seed)
    out = cfg.output_dir
    stage = 'reconstruct'
    try:
        recon, row.total_time_s, row.single_time_s = run_variant(
            variant, cs, cfg.solver, cfg.object_workers)
        stage = 'metrics'
        magnitude = rss_combine(ifft2c(recon.data))
        scores = evaluate(magnitude, truth)
        row.psnr_db, row.ssim = scores.psnr_db, scores.ssim
        stage = 'export'
        write_raw(out / f"{row.stem}.raw", recon, domain='kspace',
                  label=cfg.target, variant=variant.name, mask=spec.family,
                  R=f"{spec.R:g}", seed=spec.seed)
        peak = truth.abs().max()
        export_png(magnitude / peak, out / f"{row.stem}_mag.png")
        export_png(magnitude / peak, out / f"{row.stem}_err.png",
                   ErrorMap(cfg.error_scale), reference=truth / peak)
        if cfg.figures:
            error = ((magnitude - truth).abs() / peak
                     * cfg.error_scale).clamp(0, 1)
            write_comparison(out / f"{row.stem}_cmp.png",
                             {'ground truth': truth,
                              'zero-filled': zero_filled,
                              variant.name: magnitude,
                              'error': error},
                             title=f"{spec.family} R={spec.R:g}")
    except (PksException, RuntimeError, OSError) as error:
        log_module.error("%s failed at %s: %s", row.stem, stage, error)
        row.status = f"failed:{stage}"
        return row
    log_module.info("%s: PSNR %.2f dB, SSIM %.4f, %.2f s", row.stem,
                    row.psnr_db, row.ssim, row.total_time_s)
    return row


def write_results(rows: Sequence[ResultRow], path: Union[str, Path]):
    with open(path, 'w', newline='') as fs:
        writer = csv.writer(fs)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.as_csv_row())


def run_experiment(cfg: ExperimentConfig,
                   context: Optional[Context] = None) -> List[ResultRow]:
    """Run every (mask, variant) cell and write results.csv plus artifacts
    into ``cfg.output_dir``."""
    context = context or Context()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = replace(cfg, output_dir=out)

    contrasts = build_ground_truth(cfg, context)
    target = contrasts[cfg.target]
    auxiliaries = [(label, volume) for label, volume in contrasts.items()
                   if label != cfg.target]
    truth = rss_combine(ifft2c(target.data))
    write_raw(out / 'truth.raw', KSpaceVolume(truth[None]), domain='image',
              label=cfg.target)
    export_png(truth, out / 'truth.png')

    cells, rows = [], []
    for spec in cfg.masks:
        spec = replace(spec, rows=target.rows, cols=target.cols)
        try:
            mask = generate_mask(spec)
            write_mask(out / f"mask_{spec.family}_{spec.R:g}.raw", mask)
            export_png(mask.indicator.to(torch.float64),
                       out / f"mask_{spec.family}_{spec.R:g}.png")
        except (PksException, OSError) as error:
            log_module.error("mask %s R=%g failed: %s", spec.family, spec.R,
                             error)
            rows.extend(ResultRow(v.name, spec.family, spec.R, spec.seed,
                                  status='failed:mask')
                        for v in cfg.variants)
            continue
        cs = ContrastSet(target, mask, auxiliaries, cfg.target)
        zero_filled = rss_combine(ifft2c(cs.masked_target().data))
        log_module.info("mask %s R=%g: measured R %.3f", spec.family,
                        spec.R, mask.measured_R)
        cells.extend((variant, cs, spec, zero_filled)
                     for variant in cfg.variants)

    def run(cell):
        variant, cs, spec, zero_filled = cell
        return _run_cell(cfg, variant, cs, spec, truth, zero_filled)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            rows.extend(pool.map(run, cells))
    else:
        rows.extend(run(cell) for cell in cells)

    order = {(s.family, s.R): i for i, s in enumerate(cfg.masks)}
    names = {v.name: i for i, v in enumerate(cfg.variants)}
    rows.sort(key=lambda r: (order[(r.mask, r.R)], names[r.variant]))
    write_results(rows, out / 'results.csv')
    return rows
