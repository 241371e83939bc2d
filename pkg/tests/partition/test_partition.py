from tests.conftest import *


def _labeled_set(mask=None, n=200, aux=('T1',), values=None):
    values = values or {'T1': 1.0, 'T2': 2.0, 'PD': 3.0}
    mask = mask or random_mask(n, n, keep=0.5, seed=1)
    return ContrastSet(labeled_volume(values['T2'], rows=n, cols=n), mask,
                       [(label, labeled_volume(values[label], rows=n, cols=n))
                        for label in aux])


def test_decompose_halves():
    vol = random_volume(2, 200, 200)
    blocks = decompose(vol, PartitionSpec())
    assert [tuple(b.shape) for b in blocks] == [(2, 100, 200), (2, 100, 200)]
    assert torch.equal(blocks[0], vol.data[:, :100])
    assert torch.equal(blocks[1], vol.data[:, 100:])


def test_decompose_single_block_is_identity():
    vol = random_volume(2, 16, 12)
    blocks = decompose(vol, PartitionSpec(num_blocks=1))
    assert len(blocks) == 1 and torch.equal(blocks[0], vol.data)


def test_decompose_concatenates_back(fix_axis, fix_blocks):
    vol = random_volume(2, 30, 26, seed=2)
    blocks = decompose(vol, PartitionSpec(axis=fix_axis,
                                          num_blocks=fix_blocks))
    dim = 1 if fix_axis == 'row' else 2
    assert len(blocks) == fix_blocks
    assert torch.equal(torch.cat(blocks, dim=dim), vol.data)


def test_decompose_invalid_boundaries():
    with pytest.raises(ValidationError):
        decompose(random_volume(1, 20, 20),
                  PartitionSpec(num_blocks=3, boundaries=(12, 8)))
    with pytest.raises(ValidationError):
        decompose(random_volume(1, 20, 20),
                  PartitionSpec(num_blocks=2, boundaries=(20,)))
    with pytest.raises(ValidationError):
        PartitionSpec(num_blocks=3, boundaries=(10,))


def test_transform_labeled_constants():
    cs = _labeled_set()
    first, second = pks_transform(cs, PartitionSpec())
    masked = 2.0 * cs.mask.indicator.to(torch.complex128)
    assert torch.equal(first.volume.data[:, :100], masked[None, :100]
                       .expand(2, -1, -1))
    assert bool((first.volume.data[:, 100:] == 1).all())
    assert bool((second.volume.data[:, :100] == 1).all())
    assert torch.equal(second.volume.data[:, 100:], masked[None, 100:]
                       .expand(2, -1, -1))
    assert first.labels == ['T2', 'T1'] and second.labels == ['T1', 'T2']
    assert first.target_span == (0, 100) and second.target_span == (100, 200)


def test_mask_union_counts_auxiliary_as_sampled():
    cs = _labeled_set()
    for obj in pks_transform(cs, PartitionSpec(num_blocks=3)):
        lo, hi = obj.target_span
        indicator = obj.mask_union.indicator
        assert torch.equal(indicator[lo:hi], cs.mask.indicator[lo:hi])
        assert bool(indicator[:lo].all()) and bool(indicator[hi:].all())
        covered = sum(source.stop - source.start
                      for source in obj.block_sources)
        assert covered == 200


def test_target_rows_equal_masked_target(fix_blocks):
    vol = random_volume(2, 40, 40, seed=3)
    mask = random_mask(40, 40, keep=0.3, seed=4)
    cs = ContrastSet(vol, mask, [('T1', random_volume(2, 40, 40, seed=5))])
    masked = cs.masked_target().data
    spec = PartitionSpec(num_blocks=fix_blocks, overlap_rows=2)
    for obj in pks_transform(cs, spec):
        lo, hi = obj.target_span
        assert torch.equal(obj.volume.data[:, lo:hi], masked[:, lo:hi])


def test_overlap_spans():
    spec = PartitionSpec(overlap_rows=5)
    assert spec.target_span(0, 200) == (0, 105)
    assert spec.target_span(1, 200) == (95, 200)
    objects = pks_transform(_labeled_set(), spec)
    assert [obj.target_span for obj in objects] == [(0, 105), (95, 200)]
    assert bool((objects[0].volume.data[:, 105:] == 1).all())


def test_overlap_too_large():
    with pytest.raises(ValidationError):
        PartitionSpec(overlap_rows=100).bounds(200)
    with pytest.raises(ValidationError):
        pks_transform(_labeled_set(), PartitionSpec(overlap_rows=150))
    with pytest.raises(ValidationError):
        PartitionSpec(overlap_rows=-1)


def test_transform_needs_auxiliary():
    with pytest.raises(ValidationError):
        pks_transform(_labeled_set(aux=()), PartitionSpec())


def test_roundtrip(fix_axis, fix_blocks):
    vol = random_volume(2, 48, 36, seed=6)
    mask = random_mask(48, 36, keep=0.4, seed=7)
    cs = ContrastSet(vol, mask, [('T1', random_volume(2, 48, 36, seed=8)),
                                 ('PD', random_volume(2, 48, 36, seed=9))])
    spec = PartitionSpec(axis=fix_axis, num_blocks=fix_blocks)
    objects = pks_transform(cs, spec)
    assert len(objects) == fix_blocks
    out = pks_inverse_transform([obj.volume for obj in objects], spec)
    assert torch.equal(out.data, cs.masked_target().data)


def test_roundtrip_with_overlap(fix_axis):
    vol = random_volume(2, 40, 40, seed=10)
    cs = ContrastSet(vol, random_mask(40, 40, seed=11),
                     [('T1', random_volume(2, 40, 40, seed=12))])
    spec = PartitionSpec(axis=fix_axis, num_blocks=3, overlap_rows=3)
    objects = pks_transform(cs, spec)
    out = pks_inverse_transform([obj.volume for obj in objects], spec)
    assert torch.allclose(out.data, cs.masked_target().data, rtol=0,
                          atol=1e-15)


def test_inverse_averages_overlap():
    spec = PartitionSpec(overlap_rows=5)
    a, b = 1.0 + 1.0j, 4.0 - 2.0j
    out = pks_inverse_transform([labeled_volume(a), labeled_volume(b)],
                                spec).data
    assert bool((out[:, :95] == a).all())
    assert bool((out[:, 95:105] == (a + b) / 2).all())
    assert bool((out[:, 105:] == b).all())


def test_inverse_partition3_floor_splits():
    spec = PartitionSpec(num_blocks=3)
    assert spec.bounds(200) == [0, 66, 133, 200]
    out = pks_inverse_transform([labeled_volume(v) for v in (1.0, 2.0, 3.0)],
                                spec).data
    assert bool((out[:, :66] == 1).all())
    assert bool((out[:, 66:133] == 2).all())
    assert bool((out[:, 133:] == 3).all())


def test_inverse_count_mismatch():
    with pytest.raises(ValidationError):
        pks_inverse_transform([labeled_volume(1.0)], PartitionSpec())
    with pytest.raises(ValidationError):
        pks_inverse_transform([labeled_volume(1.0),
                               labeled_volume(1.0, rows=100)],
                              PartitionSpec())


def test_column_axis_is_transposed_row_axis(fix_blocks):
    vol = random_volume(2, 24, 32, seed=13)
    cs = ContrastSet(vol, random_mask(24, 32, seed=14),
                     [('T1', random_volume(2, 24, 32, seed=15))])
    column = pks_transform(cs, PartitionSpec(axis='column',
                                             num_blocks=fix_blocks))
    row = pks_transform(cs.transpose(), PartitionSpec(num_blocks=fix_blocks))
    for c, r in zip(column, row):
        assert torch.equal(c.volume.data, r.volume.transpose().data)
        assert torch.equal(c.mask_union.indicator,
                           r.mask_union.indicator.t())
        assert c.axis == 'column'


def test_no_auxiliary_samples_in_synthesized_target(fix_blocks):
    sentinel = 1e6
    vol = random_volume(2, 32, 32, seed=16)
    cs = ContrastSet(vol, random_mask(32, 32, seed=17),
                     [('T1', labeled_volume(sentinel, rows=32, cols=32))])
    spec = PartitionSpec(num_blocks=fix_blocks)
    objects = pks_transform(cs, spec)
    assert any(bool((obj.volume.data == sentinel).any()) for obj in objects)
    out = pks_inverse_transform([obj.volume for obj in objects], spec)
    assert not bool((out.data == sentinel).any())


def test_multi_aux_quarters():
    cs = _labeled_set(aux=('T1', 'PD'))
    first, second = compose_multi_aux(cs, PartitionSpec())
    masked = 2.0 * cs.mask.indicator.to(torch.complex128)
    assert torch.equal(first.volume.data[0, :100], masked[:100])
    assert bool((first.volume.data[:, 100:150] == 1).all())
    assert bool((first.volume.data[:, 150:] == 3).all())
    assert first.labels == ['T2', 'T1', 'PD']
    assert bool((second.volume.data[:, :50] == 3).all())
    assert bool((second.volume.data[:, 50:100] == 1).all())
    assert torch.equal(second.volume.data[1, 100:], masked[100:])


def test_multi_aux_first_auxiliary_at_edge():
    cs = _labeled_set(aux=('T1', 'PD'))
    first, _ = compose_multi_aux(cs, PartitionSpec(first_aux_at_edge=True))
    assert bool((first.volume.data[:, 100:150] == 3).all())
    assert bool((first.volume.data[:, 150:] == 1).all())


def test_multi_aux_through_transform():
    cs = _labeled_set(aux=('T1', 'PD'))
    spec = PartitionSpec(subsplit=True)
    objects = pks_transform(cs, spec)
    assert objects[0].labels == ['T2', 'T1', 'PD']
    out = pks_inverse_transform([obj.volume for obj in objects], spec)
    assert torch.equal(out.data, cs.masked_target().data)
    assert pks_transform(cs, PartitionSpec())[0].labels == ['T2', 'T1']


def test_multi_aux_validation():
    with pytest.raises(ValidationError):
        compose_multi_aux(_labeled_set(), PartitionSpec())
    with pytest.raises(ValidationError):
        compose_multi_aux(_labeled_set(aux=('T1', 'PD')),
                          PartitionSpec(num_blocks=3))


def test_cycled_auxiliaries():
    cs = _labeled_set(aux=('T1', 'PD'))
    objects = pks_transform(cs, PartitionSpec(num_blocks=4))
    assert objects[0].labels == ['T2', 'T1', 'PD', 'T1']
    assert objects[2].labels == ['T1', 'PD', 'T2', 'T1']


def test_from_ratios():
    assert PartitionSpec.from_ratios(200, (1, 1)).boundaries == (100,)
    spec = PartitionSpec.from_ratios(300, (1, 2), axis='column')
    assert spec.boundaries == (100,) and spec.axis == 'column'
    assert PartitionSpec.from_ratios(200, (1, 1, 1)).bounds(200) \
        == [0, 66, 133, 200]
    with pytest.raises(ValidationError):
        PartitionSpec.from_ratios(200, (1, 0))


def test_contrast_set_validation():
    with pytest.raises(ValidationError):
        ContrastSet(random_volume(2, 16, 16), random_mask(16, 8))
    with pytest.raises(ValidationError):
        ContrastSet(random_volume(2, 16, 16), random_mask(16, 16),
                    [('T1', random_volume(3, 16, 16))])
    cs = _labeled_set(aux=('T1', 'PD'))
    assert cs.select(['PD']).labels == ['PD']
    with pytest.raises(ValidationError):
        cs.select(['FLAIR'])


def test_sake_pks_fully_sampled_target(fix_axis):
    vol = random_volume(2, 24, 24, seed=18)
    full = SamplingMask(torch.ones((24, 24), dtype=torch.bool))
    cs = ContrastSet(vol, full, [('T1', random_volume(2, 24, 24, seed=19))])
    out, reports = sake_pks(cs, PartitionSpec(axis=fix_axis),
                            SakeConfig(max_iters=2))
    assert torch.equal(out.data, vol.data)
    assert len(reports) == 2
    assert all(report.final_data_residual == 0 for report in reports)


def test_sake_pks_keeps_acquired_samples():
    vol = lowrank_kspace(4, 32, 32, rank=3)
    mask = random_mask(32, 32, keep=0.5, seed=20)
    cs = ContrastSet(vol, mask,
                     [('T1', lowrank_kspace(4, 32, 32, rank=3, seed=21))])
    cfg = SakeConfig(HankelConfig(5, 5), max_iters=3)
    serial, _ = sake_pks(cs, PartitionSpec(), cfg)
    threaded, _ = sake_pks(cs, PartitionSpec(), cfg, workers=2)
    assert torch.equal(serial.data, threaded.data)
    sampled = mask.indicator[None].expand_as(vol.data)
    assert torch.equal(serial.data[sampled], vol.data[sampled])


def test_identical_auxiliary_beats_plain_sake():
    contrasts = seeded_contrasts(64, 4)
    truth = truth_magnitude(contrasts['T2'])
    mask = generate_mask(MaskSpec('random2d', 3, 64, 64, seed=0))
    cs = ContrastSet(contrasts['T2'], mask, [('T2full', contrasts['T2'])])
    cfg = SakeConfig(max_iters=10)
    sake, _ = sake_reconstruct(cs.masked_target(), mask, cfg)
    pks, _ = sake_pks(cs, PartitionSpec(), cfg)
    assert (psnr(zero_filled_recon(pks), truth)
            >= psnr(zero_filled_recon(sake), truth))


def test_scale_matched_recovers_complex_gain():
    vol = random_volume(3, 16, 16, seed=30)
    mask = random_mask(16, 16, keep=0.4, seed=31)
    gain = complex(0.5, -0.3)
    cs = ContrastSet(vol, mask, [('T1', KSpaceVolume(vol.data / gain)),
                                 ('T2full', vol)])
    matched = cs.scale_matched()
    assert matched.labels == ['T1', 'T2full']
    for _, volume in matched.auxiliaries:
        assert torch.allclose(volume.data, vol.data, rtol=0, atol=1e-12)
    assert matched.target is cs.target and matched.mask is cs.mask


def test_scale_matched_fits_acquired_samples_only():
    vol = random_volume(2, 16, 16, seed=32)
    mask = random_mask(16, 16, keep=0.5, seed=33)
    aux = vol.data * 2.0
    # unsampled locations carry no weight in the fit
    aux[:, ~mask.indicator] = 7.0
    matched = ContrastSet(vol, mask, [('T1', KSpaceVolume(aux))]) \
        .scale_matched()
    scaled = matched.auxiliaries[0][1].data
    assert torch.allclose(scaled[:, mask.indicator],
                          vol.data[:, mask.indicator], rtol=0, atol=1e-12)
    assert torch.allclose(scaled[:, ~mask.indicator],
                          torch.full_like(scaled[:, ~mask.indicator], 3.5),
                          rtol=0, atol=1e-12)


def test_scale_matched_keeps_empty_auxiliary():
    vol = random_volume(2, 8, 8, seed=34)
    empty = KSpaceVolume(torch.zeros((2, 8, 8), dtype=torch.complex128))
    matched = ContrastSet(vol, random_mask(8, 8, seed=35),
                          [('T1', empty)]).scale_matched()
    assert matched.auxiliaries[0][1] is empty


def test_sake_pks_matches_auxiliary_scale():
    vol = lowrank_kspace(4, 32, 32, rank=3, seed=36)
    mask = random_mask(32, 32, keep=0.5, seed=37)
    cfg = SakeConfig(HankelConfig(5, 5), max_iters=3)
    same, _ = sake_pks(ContrastSet(vol, mask, [('T1', vol)]),
                       PartitionSpec(), cfg)
    scaled = ContrastSet(vol, mask, [('T1', KSpaceVolume(vol.data * 3j))])
    matched, _ = sake_pks(scaled, PartitionSpec(), cfg)
    assert torch.allclose(matched.data, same.data, rtol=0, atol=1e-8)
    unmatched, _ = sake_pks(scaled, PartitionSpec(match_scale=False), cfg)
    assert not torch.allclose(unmatched.data, same.data, rtol=0, atol=1e-3)
