import numpy as np
import pytest

from nlmrp.codec import (
    EncodedSequence, SequenceHeader, decode_sequence, encode_frame, encode_sequence, mode_decide,
)
from nlmrp.codec.bitstream import BitReader, BitWriter
from nlmrp.codec.coder import HEADER_BYTES, read_levels, write_levels
from nlmrp.errors import DimensionMismatch, MalformedBitstream
from nlmrp.frame import Frame
from nlmrp.nlm import NlmParams
from nlmrp.synthetic import SyntheticSpec, generate_synthetic


def noise_frames(rng, n, size=48):
    return [Frame(rng.integers(0, 256, (size, size)), index=i) for i in range(n)]


def same_luma(a, b):
    return len(a) == len(b) and all(np.array_equal(x.luma, y.luma) for x, y in zip(a, b))


def test_mode_decide():
    cur = np.zeros((16, 16), np.uint8)
    mc = np.zeros((16, 16), np.uint8)
    mc[0, :9] = 10  # SSD 900
    ref = np.zeros((16, 16), np.uint8)
    ref[0, :5] = 10  # SSD 500
    flag, pred = mode_decide(cur, mc, ref)
    assert flag == 1 and pred is ref
    flag, pred = mode_decide(cur, mc, mc.copy())
    assert flag == 0 and pred is mc
    assert mode_decide(cur, mc, None) == (0, mc)


def test_levels_syntax_roundtrip(rng):
    levels = rng.integers(-3, 4, (16, 4, 4)) * (rng.random((16, 4, 4)) < 0.3)
    levels[5] = 0
    w = BitWriter()
    write_levels(w, levels)
    assert np.array_equal(read_levels(BitReader(w.getvalue())), levels)


def test_header_roundtrip():
    h = SequenceHeader(64, 48, 7, 28, NlmParams(3, 25.0), True, 30)
    data = h.to_bytes()
    assert len(data) == HEADER_BYTES and data[:4] == b"NLRP"
    assert SequenceHeader.from_bytes(data) == h
    # width 64, height 48 big-endian
    assert data[5:9] == bytes([0, 64, 0, 48])
    assert int.from_bytes(data[13:15], "big") == 400


def test_static_scene():
    frame = generate_synthetic(SyntheticSpec("translating_texture", size=48, frames=1))[0]
    frames = [Frame(frame.luma, index=i) for i in range(3)]
    enc = encode_sequence(frames, 16)
    w, rec, stats = encode_frame(frames[1], Frame(frames[0].luma), 16)
    assert np.array_equal(rec.luma, frames[1].luma)
    assert stats.pred_ssd == 0 and stats.refined_mbs == 0
    assert all((mv.dx, mv.dy) == (0, 0) for mv in stats.mvs)
    # after the intra frame the P-frames reproduce their (static) reference
    assert np.array_equal(enc.recon[2].luma, enc.recon[1].luma)
    assert same_luma(decode_sequence(enc), enc.recon)


def test_drift_free_random_frames(rng):
    frames = noise_frames(rng, 10)
    for refine in (True, False):
        enc = encode_sequence(frames, 28, refine=refine)
        assert same_luma(decode_sequence(enc.data), enc.recon)


def test_gray_frame_within_quantization():
    enc = encode_sequence([Frame(np.full((32, 32), 128))], 28)
    dec = decode_sequence(enc)
    assert np.abs(dec[0].luma.astype(int) - 128).max() <= 0.5 * 12.5 + 0.5


def test_five_frame_noise_roundtrip(rng):
    frames = noise_frames(rng, 5, 32)
    enc = encode_sequence(frames, 22)
    assert same_luma(decode_sequence(EncodedSequence(enc.header, enc.data)), enc.recon)


def test_refinement_used_on_occlusion():
    frames = generate_synthetic(SyntheticSpec("occlusion", frames=6))
    enc = encode_sequence(frames, 28)
    assert sum(s.refined_mbs for s in enc.stats) > 0
    for s in enc.stats[1:]:
        assert s.pred_ssd <= s.mc_ssd
    assert same_luma(decode_sequence(enc), enc.recon)


def test_rate_monotone_in_qp():
    frames = generate_synthetic(SyntheticSpec("occlusion", frames=5))
    assert encode_sequence(frames, 40).total_bits < encode_sequence(frames, 20).total_bits


def test_flag_overhead_when_refinement_never_wins(rng):
    frames = generate_synthetic(SyntheticSpec("translating_texture", size=48, frames=4))
    on = encode_sequence(frames, 28, refine=True)
    off = encode_sequence(frames, 28, refine=False)
    eligible = sum(s.eligible_mbs for s in on.stats)
    assert all(s.refined_mbs == 0 for s in on.stats)
    assert sum(s.bits for s in on.stats) == sum(s.bits for s in off.stats) + eligible
    assert same_luma(on.recon, off.recon)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        encode_frame(Frame(np.zeros((32, 32))), Frame(np.zeros((32, 48))), 20)
    with pytest.raises(DimensionMismatch):
        encode_sequence([Frame(np.zeros((40, 32)))], 20)


@pytest.mark.parametrize("mangle", [
    lambda d: b"XLRP" + d[4:],
    lambda d: d[:4] + bytes([9]) + d[5:],
    lambda d: d[:10],
    lambda d: d[:-3],
    lambda d: d + b"\x00\x00",
])
def test_malformed(rng, mangle):
    enc = encode_sequence(noise_frames(rng, 2, 32), 30)
    with pytest.raises(MalformedBitstream):
        decode_sequence(mangle(enc.data))


def test_h_is_carried_in_sixteenths():
    frames = generate_synthetic(SyntheticSpec("occlusion", size=48, frames=3))
    enc = encode_sequence(frames, 28, NlmParams(3, 25.03))
    assert enc.header.params.h == 25.0
    dec_header = SequenceHeader.from_bytes(enc.data)
    assert dec_header.params.h == 25.0 and dec_header.refine
    off = encode_sequence(frames, 28, refine=False)
    assert not SequenceHeader.from_bytes(off.data).refine
