# -*- coding: utf-8 -*-

"""Console script for pksynth.
To get help for terminal commands, open a console and type:

>>>  pksynth --help

"""

import logging
import sys
from pathlib import Path

import click
import torch
import yaml

from pksynth import *
from pksynth import __version__ as pksynth_version
from pksynth.ext import (HistoryReporter, MaskSpec, DENSITY_PROFILES,
                         PhantomSpec, gen_coil_maps, gen_phantom,
                         generate_mask, mask_by_name, read_mask, read_raw,
                         simulate_acquisition, write_mask, write_raw,
                         export_png)

CONFIG_DIR = Path(__file__).parent / 'configs'


def _failure(stage: str, error: Exception) -> click.ClickException:
    failure = click.ClickException(f"{stage} failed: {error}")
    failure.exit_code = getattr(error, 'code', 1)
    return failure


def _resolve_config(name: str) -> Path:
    path = Path(name)
    if not path.exists() and (CONFIG_DIR / f"{name}.yaml").exists():
        return CONFIG_DIR / f"{name}.yaml"
    return path


@click.group()
@click.version_option(version=pksynth_version)
@click.option("-v", "--verbose",
              count=True,
              help="Log stage progress (-v) or every solver iteration "
                   "(-vv).")
@click.option("--cuda/--no-cuda",
              default=False,
              help="Use cuda (default=False).")
@click.option("-p", "--precision",
              type=click.Choice(["single", "double"]),
              default="double",
              help="Numerical precision; 32 or 64 bit per float "
                   "(default=double).")
@click.pass_context  # pass parameters to sub-commands
def main(ctx, verbose, cuda, precision):
    """Calibrationless parallel MRI with partition-based k-space synthesis.
    """
    logging.basicConfig(level=max(logging.DEBUG,
                                  logging.WARNING - 10 * verbose),
                        format="%(levelname)s %(name)s: %(message)s")
    if cuda and not torch.cuda.is_available():
        click.echo("CUDA not found.")
        raise click.Abort
    device = torch.device("cuda" if cuda else "cpu")
    dtype = {"single": torch.float32, "double": torch.float64}[precision]
    ctx.obj = {'context': Context(device, dtype)}


@main.command("gen-phantom")
@click.option("--size", type=int, default=64, help="Matrix size n (n x n).")
@click.option("--coils", type=int, default=4, help="Number of coils.")
@click.option("--seed", type=int, default=0, help="Seed for noise and maps.")
@click.option("--noise", type=float, default=0.0,
              help="Std of complex k-space noise.")
@click.option("--out", type=click.Path(file_okay=False), default=".",
              help="Output directory.")
@click.pass_context
def gen_phantom_command(ctx, size, coils, seed, noise, out):
    """Write fully sampled multi-coil k-space of every contrast."""
    context = ctx.obj['context']
    try:
        spec = PhantomSpec(size=size, n_coils=coils, seed=seed,
                           noise_std=noise)
    except ValidationError as error:
        raise click.UsageError(str(error))
    try:
        images = gen_phantom(spec, context)
        maps = gen_coil_maps(size, coils, seed, context)
        full = SamplingMask(torch.ones((size, size), dtype=torch.bool))
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        for label, image in images.items():
            volume = simulate_acquisition(image, maps, full)
            write_raw(out / f"{label}.raw", volume, domain='kspace',
                      label=label, seed=seed)
            export_png(image.magnitude(), out / f"{label}.png")
            click.echo(f"wrote {out / f'{label}.raw'}")
    except (PksException, OSError) as error:
        raise _failure("gen-phantom", error)


@main.command("gen-mask")
@click.option("--family", type=click.Choice(sorted(mask_by_name)),
              required=True)
@click.option("--R", "R", type=float, required=True,
              help="Acceleration factor.")
@click.option("--size", type=int, default=64, help="Mask size n (n x n).")
@click.option("--seed", type=int, default=0)
@click.option("--density", type=click.Choice(DENSITY_PROFILES),
              default="variable")
@click.option("--power", type=float, default=2.0,
              help="Variable-density exponent.")
@click.option("--out", type=click.Path(dir_okay=False), default="mask.raw",
              help="Raw mask file; a PNG is written next to it.")
def gen_mask_command(family, R, size, seed, density, power, out):
    """Generate a seeded sampling mask."""
    try:
        spec = MaskSpec(family=family, R=R, rows=size, cols=size, seed=seed,
                        density=density, power=power)
    except ValidationError as error:
        raise click.UsageError(str(error))
    try:
        mask = generate_mask(spec)
        write_mask(out, mask)
        export_png(mask.indicator.to(torch.float64),
                   Path(out).with_suffix('.png'))
    except (PksException, OSError) as error:
        raise _failure("gen-mask", error)
    click.echo(f"{family} R={R:g}: measured R {mask.measured_R:.3f}, "
               f"wrote {out}")


@main.command("recon")
@click.argument("target", type=click.Path(exists=True, dir_okay=False))
@click.option("--mask", "mask_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--aux", "aux_paths", multiple=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Fully sampled auxiliary contrast; enables PKS.")
@click.option("--blocks", type=int, default=2)
@click.option("--axis", type=click.Choice(AXES), default="row")
@click.option("--overlap", type=int, default=0)
@click.option("--match-scale/--no-match-scale", default=True,
              help="Rescale auxiliaries onto the target before PKS "
                   "(default=True).")
@click.option("--window", type=int, default=6)
@click.option("--rank", type=int, default=None)
@click.option("--max-iters", type=int, default=30)
@click.option("--rel-tol", type=float, default=1e-4)
@click.option("--history", type=click.Path(dir_okay=False), default=None,
              help="CSV file for the per-iteration history (SAKE only).")
@click.option("--out", type=click.Path(dir_okay=False), default="recon.raw")
@click.pass_context
def recon_command(ctx, target, mask_path, aux_paths, blocks, axis, overlap,
                  match_scale, window, rank, max_iters, rel_tol, history, out):
    """Reconstruct one target k-space file, with SAKE or SAKE-PKS."""
    context = ctx.obj['context']
    try:
        cfg = SakeConfig(HankelConfig(window, window, rank), max_iters,
                         rel_tol)
        spec = PartitionSpec(axis=axis, num_blocks=blocks,
                             overlap_rows=overlap, match_scale=match_scale)
    except ValidationError as error:
        raise click.UsageError(str(error))

    stage = "load"
    try:
        raw = read_raw(target, context)
        mask = read_mask(mask_path)
        auxiliaries = []
        for path in aux_paths:
            aux = read_raw(path, context)
            auxiliaries.append((aux.label or Path(path).stem, aux.volume))
        cs = ContrastSet(raw.volume, mask, auxiliaries,
                         raw.label or Path(target).stem)
        stage = "reconstruct"
        if auxiliaries:
            recon, reports = sake_pks(cs, spec, cfg)
        else:
            reporter = [HistoryReporter(out=history)] if history else []
            recon, report = sake_reconstruct(cs.masked_target(), mask, cfg,
                                             reporter)
            reports = [report]
        stage = "export"
        write_raw(out, recon, domain='kspace', label=cs.target_label)
    except (PksException, OSError) as error:
        raise _failure(stage, error)
    seconds = sum(report.wall_time_s for report in reports)
    click.echo(f"reconstructed {cs.target_label} with {len(reports)} "
               f"solve(s) in {seconds:.2f} s, wrote {out}")


@main.command("experiment")
@click.option("--config", "config", required=True,
              help="YAML configuration file or the name of a shipped one "
                   "(e.g. default, mask_grid).")
@click.option("--seed", type=int, default=None, help="Override the seed.")
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Override the output directory.")
@click.option("--workers", type=int, default=None,
              help="Concurrent grid cells.")
@click.pass_context
def experiment_command(ctx, config, seed, out, workers):
    """Run a grid of masks and variants; writes results.csv and images."""
    path = _resolve_config(config)
    try:
        with open(path) as fs:
            document = yaml.safe_load(fs) or {}
        if not isinstance(document, dict):
            raise ConfigError("an experiment configuration is a mapping")
        if seed is not None:
            document['seed'] = seed
        if out is not None:
            document['output_dir'] = out
        if workers is not None:
            document['workers'] = workers
        cfg = load_config(document)
    except (OSError, yaml.YAMLError, ConfigError) as error:
        raise click.UsageError(f"config {path}: {error}")

    try:
        rows = run_experiment(cfg, ctx.obj['context'])
    except (PksException, OSError) as error:
        raise _failure("experiment", error)

    click.echo(("{:>14} " * 6).format("variant", "mask", "R", "PSNR (dB)",
                                      "SSIM", "time (s)"))
    for row in rows:
        click.echo(f"{row.variant:>14} {row.mask:>14} {row.R:14g} "
                   f"{row.psnr_db:14.2f} {row.ssim:14.4f} "
                   f"{row.total_time_s:14.2f}")
    failed = [f"{row.stem} ({row.status})" for row in rows
              if row.status != 'ok']
    if failed:
        raise click.ClickException(f"{len(failed)} cell(s) failed: "
                                   f"{', '.join(failed)}")
    click.echo(f"results in {cfg.output_dir / 'results.csv'}")


@main.command("metrics")
@click.argument("recon", type=click.Path(exists=True, dir_okay=False))
@click.argument("truth", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def metrics_command(ctx, recon, truth):
    """PSNR and SSIM of RECON against TRUTH (raw files)."""
    context = ctx.obj['context']
    try:
        scores = evaluate(magnitude_of(read_raw(recon, context)),
                          magnitude_of(read_raw(truth, context)))
    except (PksException, OSError) as error:
        raise _failure("metrics", error)
    click.echo(f"PSNR: {scores.psnr_db:.4f} dB")
    click.echo(f"SSIM: {scores.ssim:.6f}")


if __name__ == "__main__":
    sys.exit(main())
