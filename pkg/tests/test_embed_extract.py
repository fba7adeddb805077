import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wbmark import kernels
from wbmark.attack import requant_attack
from wbmark.embed import EmbedParams, assign_bits, embed, embed_bit, pair_positions
from wbmark.errors import ParameterError, SyncError
from wbmark.extract import ExtractParams, VoteTally, extract, extract_bit, extract_wb_bits
from wbmark.keystream import draw_pairs
from wbmark.metrics import normalized_correlation
from wbmark.selection import WbMap, select_wbs
from wbmark.synth import moving_objects_clip, random_payload
from wbmark.transform import DCT_MATRIX, ZIGZAG_RASTER, dct2d, from_zigzag, idct2d, round_half_away
from wbmark.video_io import LumaSequence, Payload


def coeffs_with(z1, v1, z2, v2):
    vec = np.zeros(64)
    vec[z1], vec[z2] = v1, v2
    return from_zigzag(vec)


def zz(c, z):
    return c.reshape(-1)[ZIGZAG_RASTER[z]]


# --------------------------------------------------------------------------- embed_bit


@pytest.mark.parametrize(
    "c1,c2,bit,beta,want",
    [
        (5, 9, 1, 0, 9),     # max rule
        (-5, 3, 0, 0, -3),   # min rule, sign kept
        (5, 9, 0, 2, 3),     # min{5, 9} - 2
        (9, 5, 1, 2, 11),
        (1, 9, 0, 2, 0),     # floored at zero
        (0, -4, 1, 1, 5),    # zero treated as positive
    ],
)
def test_embed_bit_examples(c1, c2, bit, beta, want):
    out = embed_bit(coeffs_with(12, c1, 20, c2), 12, 20, bit, beta)
    assert zz(out, 12) == want
    assert zz(out, 20) == c2


def test_embed_bit_touches_only_c1(rng):
    c = rng.normal(0, 30, (8, 8))
    out = embed_bit(c, 15, 30, 1, 2.0)
    diff = np.flatnonzero(out != c)
    assert set(diff) <= {ZIGZAG_RASTER[15]}


def test_embed_bit_same_positions():
    with pytest.raises(ParameterError):
        embed_bit(np.zeros((8, 8)), 11, 11, 1)


coef = st.floats(-500, 500, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(c1=coef, c2=coef, bit=st.integers(0, 1), beta=st.just(0.0) | st.floats(1e-3, 10))
def test_embed_bit_post_state(c1, c2, bit, beta):
    out = embed_bit(coeffs_with(10, c1, 35, c2), 10, 35, bit, beta)
    a1, a2 = abs(zz(out, 10)), abs(c2)
    if a1 > 0:
        assert np.sign(zz(out, 10)) == (-1 if c1 < 0 else 1)
    if bit:
        assert a1 >= a2
        if beta > 0:
            assert a1 > a2
            assert extract_bit(out, 10, 35) == 1
    else:
        assert a1 <= a2
        if beta > 0 and a2 > 0:
            assert a1 < a2
        assert extract_bit(out, 10, 35) == 0


# --------------------------------------------------------------------------- extract_bit


@pytest.mark.parametrize("c1,c2,want", [(9, 5, 1), (4, 4, 0), (4, -4, 0), (-7, 5, 1), (2, -3, 0)])
def test_extract_bit_examples(c1, c2, want):
    assert extract_bit(coeffs_with(13, c1, 22, c2), 13, 22) == want


def test_extract_bit_same_positions():
    with pytest.raises(ParameterError):
        extract_bit(np.zeros((8, 8)), 3, 3)


# --------------------------------------------------------------------------- kernels


def reference_embed(luma, refs, pairs, bits, beta):
    """Per-block path through the public single-block functions."""
    out = luma.copy()
    for (k, r, c), (z1, z2), b in zip(refs, pairs, bits):
        blk = out[k, r * 8:r * 8 + 8, c * 8:c * 8 + 8].astype(float)
        pix = idct2d(embed_bit(dct2d(blk), z1, z2, b, beta))
        out[k, r * 8:r * 8 + 8, c * 8:c * 8 + 8] = np.clip(round_half_away(pix), 0, 255)
    return out


def test_kernels_match_reference(motion_clip):
    m = select_wbs(motion_clip, 1000)
    pairs = draw_pairs(3, len(m))
    bits = random_payload(len(m), 2).bits
    p1, p2 = ZIGZAG_RASTER[pairs[:, 0]], ZIGZAG_RASTER[pairs[:, 1]]
    want = reference_embed(motion_clip.luma, m.refs, pairs, bits, 2.0)
    for fn in (kernels.embed_blocks_nb, kernels.embed_blocks_np):
        got = motion_clip.luma.copy()
        fn(got, m.refs, p1, p2, bits, 2.0, DCT_MATRIX)
        assert np.abs(got.astype(int) - want).max() <= 1
        assert np.mean(got != want) < 1e-4
    ref_bits = [
        extract_bit(dct2d(want[k, r * 8:r * 8 + 8, c * 8:c * 8 + 8]), z1, z2)
        for (k, r, c), (z1, z2) in zip(m.refs, pairs)
    ]
    for fn in (kernels.extract_blocks_nb, kernels.extract_blocks_np):
        assert fn(want, m.refs, p1, p2, DCT_MATRIX).tolist() == ref_bits


# --------------------------------------------------------------------------- embed


def one_moving_block_clip():
    rng = np.random.default_rng(0)
    luma = np.full((3, 32, 32), 120, np.uint8)
    luma[:, 8:16, 8:16] = rng.integers(60, 190, (8, 8))
    luma[2, 8:16, 8:16] = 30
    return LumaSequence.from_luma(luma)


def test_embed_locality_single_bit():
    seq = one_moving_block_clip()
    m = select_wbs(seq, 0)
    assert m.refs.tolist() == [[1, 1, 1]]
    c = dct2d(seq.luma[1, 8:16, 8:16].astype(float))
    # First key whose pair makes bit 0 a real change.
    key = next(
        k for k in range(1000)
        if abs(zz(c, draw_pairs(k, 1)[0, 0])) > abs(zz(c, draw_pairs(k, 1)[0, 1])) + 10
    )
    out, rep = embed(seq, m, Payload([0], 1, 1), EmbedParams(key, beta=0.0))
    changed = np.argwhere(out.luma != seq.luma)
    assert len(changed)
    assert set(map(tuple, changed[:, :1])) == {(1,)}
    assert changed[:, 1].min() >= 8 and changed[:, 1].max() < 16
    assert changed[:, 2].min() >= 8 and changed[:, 2].max() < 16
    assert rep.wb_count == 1


def test_cyclic_repetition_counts():
    which = assign_bits(100, 40)
    counts = np.bincount(which, minlength=40)
    assert counts[:20].tolist() == [3] * 20 and counts[20:].tolist() == [2] * 20

    seq = moving_objects_clip(16, 64, 64, seed=2)
    m = select_wbs(seq, 1000)
    m100 = WbMap(m.e_th, m.width, m.height, m.refs[:100])
    _, rep = embed(seq, m100, random_payload(40, 1), EmbedParams(1))
    assert rep.repetitions.tolist() == counts.tolist()
    assert rep.complete and rep.uncovered_bits == []


def test_incomplete_coverage_flagged(motion_clip):
    m = select_wbs(motion_clip, 1000)
    small = WbMap(m.e_th, m.width, m.height, m.refs[:10])
    _, rep = embed(motion_clip, small, random_payload(16, 3), EmbedParams(1))
    assert not rep.complete
    assert rep.uncovered_bits == list(range(10, 16))


def test_embed_preserves_chroma_and_non_wb_pixels(motion_clip, payload32):
    m = select_wbs(motion_clip, 1000)
    out, _ = embed(motion_clip, m, payload32, EmbedParams(77))
    np.testing.assert_array_equal(out.chroma, motion_clip.chroma)
    touched = np.zeros(motion_clip.luma.shape, bool)
    for k, r, c in m.refs:
        touched[k, r * 8:r * 8 + 8, c * 8:c * 8 + 8] = True
    np.testing.assert_array_equal(out.luma[~touched], motion_clip.luma[~touched])
    assert out.luma.dtype == np.uint8


def test_embed_deterministic(motion_clip, payload32):
    m = select_wbs(motion_clip, 1000)
    a, ra = embed(motion_clip, m, payload32, EmbedParams(5))
    b, rb = embed(motion_clip, m, payload32, EmbedParams(5))
    assert a == b and ra.failed_bits == rb.failed_bits


def test_embed_does_not_mutate_input(motion_clip, payload32):
    before = motion_clip.luma.copy()
    embed(motion_clip, select_wbs(motion_clip, 1000), payload32, EmbedParams(5))
    np.testing.assert_array_equal(motion_clip.luma, before)


def test_verification_pass_counts_match_extraction(motion_clip, payload32):
    m = select_wbs(motion_clip, 1000)
    out, rep = embed(motion_clip, m, payload32, EmbedParams(8))
    got = extract_wb_bits(out, m, 8)
    want = payload32.bits[assign_bits(len(m), len(payload32))]
    assert rep.failed_bits == int(np.count_nonzero(got != want))
    assert rep.failed_payload_bits == 0


@pytest.mark.parametrize("seed", range(5))
def test_rounding_losses_are_rare_and_voted_away(seed):
    seq = moving_objects_clip(16, 64, 64, seed=50 + seed)
    m = select_wbs(seq, 1000)
    out, rep = embed(seq, m, random_payload(32, seed), EmbedParams(seed, beta=2.0))
    assert rep.failed_bits / rep.wb_count < 0.1
    assert rep.failed_payload_bits == 0


@pytest.mark.xfail(strict=True, reason="sub-pixel coefficient changes are erased by integer rounding")
def test_every_wb_survives_rounding_at_beta_2():
    fails = 0
    for seed in range(5):
        seq = moving_objects_clip(16, 64, 64, seed=50 + seed)
        _, rep = embed(seq, select_wbs(seq, 1000), random_payload(32, seed), EmbedParams(seed))
        fails += rep.failed_bits
    assert fails == 0


def test_params_validation():
    with pytest.raises(ParameterError):
        EmbedParams(1, beta=-1)
    with pytest.raises(ParameterError):
        EmbedParams(1, midrange=(10, 11))
    with pytest.raises(ParameterError):
        EmbedParams(-1)


def test_embed_sync_error(payload32):
    seq = moving_objects_clip(5, 32, 32)
    with pytest.raises(SyncError):
        embed(seq, WbMap(0.0, 64, 64), payload32, EmbedParams(1))


# --------------------------------------------------------------------------- extract


def test_round_trip_identity(motion_clip, payload32):
    m = select_wbs(motion_clip, 1000)
    out, _ = embed(motion_clip, m, payload32, EmbedParams(1234))
    got, tally = extract(out, ExtractParams(1234, 8, 4), m)
    assert got == payload32
    assert tally.total == len(m)


def test_unanimous_with_wide_margin(motion_clip, payload32):
    m = select_wbs(motion_clip, 1000)
    out, rep = embed(motion_clip, m, payload32, EmbedParams(9, beta=8.0))
    got, tally = extract(out, ExtractParams(9, 8, 4), m)
    assert got == payload32
    assert rep.failed_bits == 0 or not tally.unanimous()


def test_vote_tally_majority_and_ties():
    t = VoteTally(np.array([3, 2, 0, 1]), np.array([2, 2, 0, 0]))
    assert t.decide().tolist() == [1, 0, 0, 1]
    assert t.total == 10


def test_vote_conservation(motion_clip):
    m = select_wbs(motion_clip, 1000)
    bits = extract_wb_bits(motion_clip, m, 3)
    t = VoteTally.from_votes(bits, 7)
    assert t.total == len(m)
    np.testing.assert_array_equal(t.ones + t.zeros, np.bincount(np.arange(len(m)) % 7, minlength=7))


def test_extract_deterministic(motion_clip):
    m = select_wbs(motion_clip, 1000)
    p = ExtractParams(4, 4, 4)
    a, ta = extract(motion_clip, p, m)
    b, tb = extract(motion_clip, p, m)
    assert a == b
    np.testing.assert_array_equal(ta.ones, tb.ones)


def test_extract_empty_map():
    seq = moving_objects_clip(5, 32, 32)
    got, tally = extract(seq, ExtractParams(1, 3, 2), WbMap(1000.0, 32, 32))
    assert tally.empty
    assert got.bits.tolist() == [0] * 6


def test_extract_map_mode_requires_map(motion_clip):
    with pytest.raises(ParameterError):
        extract(motion_clip, ExtractParams(1, 2, 2))


def test_extract_sync_error(motion_clip):
    with pytest.raises(SyncError):
        extract(motion_clip, ExtractParams(1, 2, 2), WbMap(0.0, 352, 288))


def test_blind_mode_no_attack(payload32):
    seq = moving_objects_clip(16, 64, 64, seed=21)
    m = select_wbs(seq, 1000)
    out, _ = embed(seq, m, payload32, EmbedParams(3))
    blind, _ = extract(out, ExtractParams(3, 8, 4, sync_mode="blind", e_th=1000), None)
    mapped, _ = extract(out, ExtractParams(3, 8, 4), m)
    assert normalized_correlation(payload32, mapped) >= normalized_correlation(payload32, blind)


def test_map_mode_not_worse_than_blind_after_attack():
    wins = 0
    for seed in range(5):
        seq = moving_objects_clip(16, 64, 64, seed=300 + seed)
        m = select_wbs(seq, 1000)
        p = random_payload(16, seed)
        out, _ = embed(seq, m, p, EmbedParams(seed))
        att = requant_attack(out, 1.0)
        mapped, _ = extract(att, ExtractParams(seed, 16, 1), m)
        blind, _ = extract(att, ExtractParams(seed, 16, 1, sync_mode="blind"), None)
        wins += normalized_correlation(p, mapped) >= normalized_correlation(p, blind)
    assert wins == 5


def test_wrong_key_near_chance(motion_clip):
    p = random_payload(256, 4, 16)
    m = select_wbs(motion_clip, 1000)
    out, _ = embed(motion_clip, m, p, EmbedParams(1))
    ncs = [normalized_correlation(p, extract(out, ExtractParams(k, 16, 16), m)[0]) for k in range(2, 30)]
    assert max(abs(v) for v in ncs) < 0.3
