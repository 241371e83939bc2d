import csv
import os
from pathlib import Path

import yaml

from pksynth import __file__ as pksynth_file
from tests.conftest import *


def _document(tmpdir, **overrides):
    document = {
        'seed': 0,
        'output_dir': str(tmpdir / "out"),
        'phantom': {'size': 32, 'n_coils': 2},
        'solver': {'window': 4, 'max_iters': 3, 'rel_tol': 0.0},
        'masks': [{'family': 'random2d', 'R': 2},
                  {'family': 'cartesian1d', 'R': 2}],
        'variants': [{'baseline': 'zerofilled'},
                     {'baseline': 'sake'},
                     {'name': 'pks2_T1', 'pks': {'axis': 'row', 'blocks': 2}},
                     {'name': 'pks2_T1PD',
                      'pks': {'auxiliaries': ['T1', 'PD'],
                              'subsplit': True}}],
    }
    document.update(overrides)
    return document


def test_load_config_defaults(tmpdir):
    cfg = load_config(_document(tmpdir))
    assert cfg.target == 'T2'
    assert cfg.contrasts == CONTRAST_LABELS
    assert [v.name for v in cfg.variants] == ['zerofilled', 'sake',
                                             'pks2_T1', 'pks2_T1PD']
    assert cfg.variants[2].auxiliaries == ('T1',)
    assert cfg.variants[3].partition.subsplit
    assert cfg.solver.hankel.window == (4, 4)
    assert cfg.solver.hankel.rank_k is None
    assert all(m.dims == (32, 32) for m in cfg.masks)
    assert cfg.phantom.seed == 0


def test_load_config_from_yaml(tmpdir):
    path = tmpdir / "grid.yaml"
    with open(path, 'w') as fs:
        yaml.safe_dump(_document(tmpdir, seed=4), fs)
    cfg = load_config(str(path))
    assert cfg.seed == 4 and cfg.masks[0].seed == 4


def test_shipped_configs_parse():
    configs = Path(pksynth_file).parent / 'configs'
    names = sorted(p.stem for p in configs.glob('*.yaml'))
    assert 'default' in names
    for name in names:
        cfg = load_config(configs / f"{name}.yaml")
        assert cfg.variants and cfg.masks


def test_ratio_variants():
    variant = VariantSpec('pks', None, PartitionSpec(axis='column'),
                          (1.0, 3.0), ('T1',))
    spec = variant.partition_for(64)
    assert spec.boundaries == (16,) and spec.axis == 'column'


@pytest.mark.parametrize("change", [
    dict(colour='blue'),
    dict(masks=[]),
    dict(masks=[{'family': 'radial', 'R': 2}]),
    dict(masks=[{'family': 'random2d', 'R': 2},
                {'family': 'random2d', 'R': 2, 'seed': 3}]),
    dict(masks=[{'family': 'random2d', 'R': 0.5}]),
    dict(masks=[{'family': 'random2d'}]),
    dict(variants=[]),
    dict(variants=[{'baseline': 'grappa'}]),
    dict(variants=[{'baseline': 'sake', 'pks': {}}]),
    dict(variants=[{'baseline': 'sake'}, {'baseline': 'sake'}]),
    dict(variants=[{'pks': {'auxiliaries': ['FLAIR']}}]),
    dict(variants=[{'pks': {'auxiliaries': ['T2']}}]),
    dict(variants=[{'pks': {'boundaries': [10], 'ratios': [1, 1]}}]),
    dict(variants=[{'pks': {'blocks': 2, 'shape': 'star'}}]),
    dict(target='FLAIR'),
    dict(workers=0),
    dict(solver={'max_iters': 0}),
    dict(phantom={'size': 8}),
    dict(raw={'T2': 'a.raw'}),
])
def test_config_errors(tmpdir, change):
    with pytest.raises(ConfigError):
        load_config(_document(tmpdir, **change))


def test_config_file_errors(tmpdir):
    with pytest.raises(ConfigError):
        load_config(str(tmpdir / "missing.yaml"))
    path = tmpdir / "broken.yaml"
    with open(path, 'w') as fs:
        fs.write("masks: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_run_variant_baselines():
    contrasts = seeded_contrasts(32, 2)
    full = SamplingMask(torch.ones((32, 32), dtype=torch.bool))
    cs = ContrastSet(contrasts['T2'], full, [('T1', contrasts['T1'])])
    truth = truth_magnitude(contrasts['T2'])
    recon, total, single = run_variant(VariantSpec('zerofilled',
                                                   'zerofilled'),
                                       cs, SakeConfig())
    assert psnr(zero_filled_recon(recon), truth) == PSNR_CAP_DB
    assert total == single >= 0


def test_pks_timing_sums_object_solves():
    contrasts = seeded_contrasts(32, 2)
    mask = generate_mask(MaskSpec('random2d', 2, 32, 32))
    cs = ContrastSet(contrasts['T2'], mask, [('T1', contrasts['T1'])])
    variant = VariantSpec('pks3', None, PartitionSpec(num_blocks=3),
                          auxiliaries=('T1',))
    _, total, single = run_variant(variant, cs,
                                   SakeConfig(HankelConfig(4, 4),
                                              max_iters=2, rel_tol=0.0))
    assert total == pytest.approx(3 * single)
    assert total > 0


def test_run_experiment(tmpdir):
    cfg = load_config(_document(tmpdir, figures=True))
    rows = run_experiment(cfg)
    out = tmpdir / "out"
    assert len(rows) == 8
    assert all(row.status == 'ok' for row in rows)
    assert [(row.mask, row.variant) for row in rows[:4]] == [
        ('random2d', 'zerofilled'), ('random2d', 'sake'),
        ('random2d', 'pks2_T1'), ('random2d', 'pks2_T1PD')]

    with open(out / "results.csv") as fs:
        table = list(csv.reader(fs))
    assert tuple(table[0]) == CSV_COLUMNS
    assert len(table) == 9

    for name in ("truth.raw", "truth.png", "mask_random2d_2.raw",
                 "mask_cartesian1d_2.png", "sake_random2d_2.raw",
                 "sake_random2d_2_mag.png", "sake_random2d_2_err.png",
                 "pks2_T1_cartesian1d_2_cmp.png"):
        assert os.path.isfile(out / name), name

    truth = magnitude_of(read_raw(out / "truth.raw"))
    recon = magnitude_of(read_raw(out / "sake_random2d_2.raw"))
    sake = rows[1]
    assert psnr(recon, truth) == pytest.approx(sake.psnr_db, abs=1e-3)
    assert sake.psnr_db > rows[0].psnr_db
    mask = read_mask(out / "mask_random2d_2.raw")
    assert mask.family == 'random2d' and mask.nominal_R == 2


def test_run_experiment_is_deterministic(tmpdir):
    first = run_experiment(load_config(_document(tmpdir / "a")))
    second = run_experiment(load_config(_document(tmpdir / "b",
                                                  workers=2)))

    def key(row):
        return (row.variant, row.mask, row.R, row.seed, row.psnr_db,
                row.ssim, row.status)

    assert [key(row) for row in first] == [key(row) for row in second]
    recon_a = read_raw(tmpdir / "a" / "out" / "pks2_T1_random2d_2.raw")
    recon_b = read_raw(tmpdir / "b" / "out" / "pks2_T1_random2d_2.raw")
    assert torch.equal(recon_a.volume.data, recon_b.volume.data)


def test_artifacts_do_not_depend_on_workers(tmpdir):
    serial = tmpdir / "serial"
    threaded = tmpdir / "threaded"
    run_experiment(load_config(_document(serial, figures=True)))
    run_experiment(load_config(_document(threaded, figures=True, workers=4)))
    names = sorted(p.name for p in Path(serial / "out").iterdir())
    assert sorted(p.name for p in Path(threaded / "out").iterdir()) == names
    assert sum(name.endswith("_cmp.png") for name in names) == 8
    for name in names:
        if name == "results.csv":
            continue
        assert (open(serial / "out" / name, 'rb').read()
                == open(threaded / "out" / name, 'rb').read()), name

    def untimed(path):
        with open(path) as fs:
            return [{key: value for key, value in row.items()
                     if not key.endswith('time_s')}
                    for row in csv.DictReader(fs)]

    assert untimed(serial / "out" / "results.csv") \
        == untimed(threaded / "out" / "results.csv")


def test_match_scale_is_configurable(tmpdir):
    cfg = load_config(_document(tmpdir, variants=[
        {'name': 'plain', 'pks': {'match_scale': False, 'ratios': [1, 1]}},
        {'name': 'matched', 'pks': {}}]))
    plain, matched = cfg.variants
    assert not plain.partition_for(32).match_scale
    assert matched.partition_for(32).match_scale


def test_zero_filled_full_sampling_is_capped(tmpdir):
    cfg = load_config(_document(tmpdir,
                                masks=[{'family': 'random2d', 'R': 1}],
                                variants=[{'baseline': 'zerofilled'}]))
    row, = run_experiment(cfg)
    assert row.psnr_db == PSNR_CAP_DB
    assert row.ssim == pytest.approx(1.0)


def test_failed_cell_is_reported(tmpdir):
    cfg = load_config(_document(
        tmpdir, masks=[{'family': 'cartesian1d', 'R': 2}],
        variants=[{'baseline': 'sake'},
                  {'name': 'too_much_overlap', 'pks': {'overlap': 20}}]))
    rows = run_experiment(cfg)
    assert [row.status for row in rows] == ['ok', 'failed:reconstruct']
    with open(tmpdir / "out" / "results.csv") as fs:
        table = list(csv.DictReader(fs))
    assert table[1]['status'] == 'failed:reconstruct'
    assert table[1]['psnr_db'] == 'nan'


def test_raw_ground_truth(tmpdir):
    contrasts = seeded_contrasts(32, 2)
    raw = {}
    for label in ('T1', 'T2'):
        raw[label] = str(tmpdir / f"{label}.raw")
        write_raw(raw[label], contrasts[label], label=label)
    document = _document(tmpdir, raw=raw,
                         variants=[{'baseline': 'zerofilled'},
                                   {'name': 'pks', 'pks': {}}])
    del document['phantom']
    cfg = load_config(document)
    assert cfg.contrasts == ('T1', 'T2')
    volumes = build_ground_truth(cfg)
    assert volumes['T2'].dims == (32, 32)
    rows = run_experiment(cfg)
    assert [row.status for row in rows] == ['ok'] * 4


def test_result_row_formatting():
    row = ResultRow('sake', 'poisson2d', 4.0, 0, 31.23456, 0.9, 1.5, 1.5)
    assert row.stem == 'sake_poisson2d_4'
    assert row.as_csv_row() == ['sake', 'poisson2d', '4', '0', '31.2346',
                                '0.900000', '1.5000', '1.5000', 'ok']
    assert row.wall_time_s == 1.5
