"""P-frame encoding loop, intra first frame and the matching decoder.

Bitstream layout (all fields MSB-first)::

    "NLRP" version:u8 width:u16 height:u16 frame_count:u16 qp:u8
    d_m:u8 h16:u16 fps:u8
    intra frame: se(level) per luma sample in raster order
    P-frame macroblocks in line-scan order:
        [refine_flag:u1]  only when refinement is enabled and the MB has
                          left, above and above-left neighbors
        se(mvd_x) se(mvd_y)
        cbp:u16           bit 15 = first 4x4 block
        per coded 4x4 block: ue(nnz - 1) then nnz x (ue(run) se(level))
                          in zig-zag order

``h16`` carries h in 1/16 units; ``h16 == 0`` signals that refinement is
disabled and no flag bits are present.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import DimensionMismatch, MalformedBitstream
from ..metrics import psnr_planes
from ..frame import MB_SIZE, Frame, MbPosition, build_processing_area, mb_grid
from ..motion import InterpolatedRef, MotionVector, motion_compensate, motion_search
from ..nlm import NlmParams, refine_block
from .bitstream import BitReader, BitWriter
from .transform import QP_MAX, ZIGZAG, check_qp, dequantize_inverse, qstep, transform_quantize

MAGIC = b"NLRP"
VERSION = 1
HEADER_BYTES = len(MAGIC) + 1 + 2 + 2 + 2 + 1 + 1 + 2 + 1
H_SCALE = 16


@dataclass(frozen=True)
class SequenceHeader:
    width: int
    height: int
    frame_count: int
    qp: int
    params: NlmParams = NlmParams()
    refine: bool = True
    fps: int = 30

    def to_bytes(self) -> bytes:
        h16 = round(self.params.h * H_SCALE) if self.refine else 0
        fields = [
            (VERSION, 1), (self.width, 2), (self.height, 2), (self.frame_count, 2),
            (self.qp, 1), (self.params.d_m, 1), (h16, 2), (self.fps, 1),
        ]
        out = bytearray(MAGIC)
        for value, size in fields:
            out += int(value).to_bytes(size, "big")
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "SequenceHeader":
        if len(data) < HEADER_BYTES:
            raise MalformedBitstream("truncated header")
        if data[:4] != MAGIC:
            raise MalformedBitstream(f"bad magic {data[:4]!r}")
        if data[4] != VERSION:
            raise MalformedBitstream(f"unsupported version {data[4]}")
        width = int.from_bytes(data[5:7], "big")
        height = int.from_bytes(data[7:9], "big")
        count = int.from_bytes(data[9:11], "big")
        qp, d_m = data[11], data[12]
        h16 = int.from_bytes(data[13:15], "big")
        fps = data[15]
        if not width or not height or width % MB_SIZE or height % MB_SIZE:
            raise MalformedBitstream(f"invalid frame size {width}x{height}")
        if count < 1 or qp > QP_MAX or fps < 1:
            raise MalformedBitstream("invalid header field")
        params = NlmParams(d_m, h16 / H_SCALE) if h16 else NlmParams(d_m)
        return cls(width, height, count, qp, params, bool(h16), fps)


@dataclass
class FrameStats:
    bits: int
    psnr: float = float("nan")
    refined_mbs: int = 0
    eligible_mbs: int = 0
    total_mbs: int = 0
    pred_ssd: int = 0
    mc_ssd: int = 0
    intra: bool = False
    mvs: list = field(default_factory=list)


@dataclass
class EncodedSequence:
    """A serialized sequence plus encoder-side bookkeeping.

    ``recon`` and ``stats`` are only filled by the encoder; ``data`` alone is
    what the decoder needs.
    """

    header: SequenceHeader
    data: bytes
    recon: list = field(default_factory=list)
    stats: list = field(default_factory=list)

    @property
    def total_bits(self) -> int:
        return 8 * len(self.data)


def ssd(a: np.ndarray, b: np.ndarray) -> int:
    d = a.astype(np.int64) - b.astype(np.int64)
    return int((d * d).sum())


def mode_decide(cur_block, mc_pred, refined_pred=None):
    """Pick the predictor with the lower SSD; ties and missing refinement keep MC."""
    if refined_pred is None:
        return 0, mc_pred
    if ssd(cur_block, refined_pred) < ssd(cur_block, mc_pred):
        return 1, refined_pred
    return 0, mc_pred


# -- residual syntax ---------------------------------------------------------

def write_levels(w: BitWriter, levels: np.ndarray) -> None:
    flat = levels.reshape(16, 16)[:, ZIGZAG]
    coded = np.any(flat != 0, axis=1)
    cbp = 0
    for c in coded:
        cbp = (cbp << 1) | int(c)
    w.write(cbp, 16)
    for blk, c in zip(flat, coded):
        if not c:
            continue
        nz = np.flatnonzero(blk)
        w.ue(len(nz) - 1)
        prev = -1
        for idx in nz:
            w.ue(int(idx - prev - 1))
            w.se(int(blk[idx]))
            prev = idx


def read_levels(r: BitReader) -> np.ndarray:
    flat = np.zeros((16, 16), dtype=np.int64)
    cbp = r.read(16)
    for b in range(16):
        if not (cbp >> (15 - b)) & 1:
            continue
        nnz = r.ue() + 1
        if nnz > 16:
            raise MalformedBitstream("too many coefficients in a 4x4 block")
        idx = -1
        for _ in range(nnz):
            idx += r.ue() + 1
            if idx > 15:
                raise MalformedBitstream("coefficient run past end of block")
            level = r.se()
            if level == 0:
                raise MalformedBitstream("zero level coded explicitly")
            flat[b, idx] = level
    out = np.zeros_like(flat)
    out[:, ZIGZAG] = flat
    return out.reshape(16, 4, 4)


# -- intra frame ----------------------------------------------------------------

def _quant_scalar(v: np.ndarray, step: float) -> np.ndarray:
    # round half away from zero
    return (np.sign(v) * np.floor(np.abs(v) / step + 0.5)).astype(np.int64)


def _dequant_scalar(levels: np.ndarray, step: float) -> np.ndarray:
    return np.floor(levels * step + 0.5).astype(np.int64)


def encode_intra(plane: np.ndarray, qp: int, w: BitWriter) -> np.ndarray:
    """Closed-loop left-neighbor DPCM; the first column predicts from above."""
    step = qstep(qp)
    cur = plane.astype(np.int64)
    rec = np.zeros_like(cur)
    levels = np.zeros_like(cur)
    above = 128
    for y in range(cur.shape[0]):
        lv = _quant_scalar(np.array([cur[y, 0] - above]), step)[0]
        levels[y, 0] = lv
        rec[y, 0] = min(255, max(0, above + _dequant_scalar(np.array([lv]), step)[0]))
        above = rec[y, 0]
    for x in range(1, cur.shape[1]):
        pred = rec[:, x - 1]
        lv = _quant_scalar(cur[:, x] - pred, step)
        levels[:, x] = lv
        rec[:, x] = np.clip(pred + _dequant_scalar(lv, step), 0, 255)
    for v in levels.ravel():
        w.se(int(v))
    return rec.astype(np.uint8)


def decode_intra(r: BitReader, width: int, height: int, qp: int) -> np.ndarray:
    step = qstep(qp)
    levels = np.array([r.se() for _ in range(width * height)], dtype=np.int64).reshape(height, width)
    rec = np.zeros((height, width), dtype=np.int64)
    above = 128
    for y in range(height):
        rec[y, 0] = min(255, max(0, above + _dequant_scalar(levels[y, :1], step)[0]))
        above = rec[y, 0]
    for x in range(1, width):
        rec[:, x] = np.clip(rec[:, x - 1] + _dequant_scalar(levels[:, x], step), 0, 255)
    return rec.astype(np.uint8)


# -- P frames -------------------------------------------------------------------

def encode_frame(
    cur: Frame,
    ref_recon: Frame,
    qp: int,
    params: NlmParams = NlmParams(),
    refine: bool = True,
    writer: Optional[BitWriter] = None,
):
    """Encode one P-frame against the previous reconstruction.

    Returns ``(writer, recon, stats)``; macroblock records are appended to
    ``writer`` (a fresh one when omitted).
    """
    if (cur.width, cur.height) != (ref_recon.width, ref_recon.height):
        raise DimensionMismatch(
            f"current {cur.width}x{cur.height} vs reference {ref_recon.width}x{ref_recon.height}"
        )
    qp = check_qp(qp)
    w = writer if writer is not None else BitWriter()
    start = w.bits_written
    ref = InterpolatedRef(ref_recon.luma)
    src = cur.luma
    rec = np.zeros_like(src)
    stats = FrameStats(bits=0)
    prev_mv = MotionVector()
    for pos in mb_grid(cur.width, cur.height):
        if pos.mb_x == 0:
            prev_mv = MotionVector()
        sl = (slice(pos.y0, pos.y0 + MB_SIZE), slice(pos.x0, pos.x0 + MB_SIZE))
        block = src[sl]
        mv, mc_pred, _ = motion_search(block, ref, pos)
        refined = None
        eligible = refine and pos.has_neighbors
        if eligible:
            area = build_processing_area(rec, mc_pred, pos)
            refined = refine_block(area, params).samples
        flag, pred = mode_decide(block, mc_pred, refined)

        levels = transform_quantize(block.astype(np.int64) - pred.astype(np.int64), qp)
        if eligible:
            w.bit(flag)
        w.se(mv.dx - prev_mv.dx)
        w.se(mv.dy - prev_mv.dy)
        write_levels(w, levels)
        rec[sl] = np.clip(pred.astype(np.int64) + dequantize_inverse(levels, qp), 0, 255)

        prev_mv = mv
        stats.mvs.append(mv)
        stats.total_mbs += 1
        stats.eligible_mbs += eligible
        stats.refined_mbs += flag
        stats.pred_ssd += ssd(block, pred)
        stats.mc_ssd += ssd(block, mc_pred)
    stats.bits = w.bits_written - start
    stats.psnr = psnr_planes(src, rec)
    return w, Frame(rec, index=cur.index), stats


def decode_frame(r: BitReader, ref_recon: Frame, qp: int, params: NlmParams, refine: bool) -> Frame:
    ref = InterpolatedRef(ref_recon.luma)
    rec = np.zeros_like(ref_recon.luma)
    prev_mv = MotionVector()
    for pos in mb_grid(ref_recon.width, ref_recon.height):
        if pos.mb_x == 0:
            prev_mv = MotionVector()
        eligible = refine and pos.has_neighbors
        flag = r.bit() if eligible else 0
        mv = MotionVector(prev_mv.dx + r.se(), prev_mv.dy + r.se())
        if not mv.in_range:
            raise MalformedBitstream(f"motion vector ({mv.dx}, {mv.dy}) out of range")
        levels = read_levels(r)
        pred = motion_compensate(ref, pos, mv)
        if flag:
            pred = refine_block(build_processing_area(rec, pred, pos), params).samples
        sl = (slice(pos.y0, pos.y0 + MB_SIZE), slice(pos.x0, pos.x0 + MB_SIZE))
        rec[sl] = np.clip(pred.astype(np.int64) + dequantize_inverse(levels, qp), 0, 255)
        prev_mv = mv
    return Frame(rec)


# -- sequences ------------------------------------------------------------------

def encode_sequence(
    frames: Sequence[Frame],
    qp: int,
    params: NlmParams = NlmParams(),
    refine: bool = True,
    fps: int = 30,
) -> EncodedSequence:
    """Intra-code the first frame, then P-code the rest in order."""
    if not frames:
        raise ValueError("need at least one frame")
    qp = check_qp(qp)
    first = frames[0]
    for f in frames:
        if (f.width, f.height) != (first.width, first.height):
            raise DimensionMismatch("all frames must share the same size")
    mb_grid(first.width, first.height)
    if len(frames) > 0xFFFF or first.width > 0xFFFF or first.height > 0xFFFF:
        raise ValueError("sequence too large for the header fields")
    if not 1 <= fps <= 255:
        raise ValueError(f"fps must fit in one byte, got {fps}")
    # the header carries h in 1/16 units; code with exactly that value
    h16 = round(params.h * H_SCALE)
    if refine and not 1 <= h16 <= 0xFFFF:
        raise ValueError(f"h={params.h} cannot be represented in the header")
    if refine:
        params = NlmParams(params.d_m, h16 / H_SCALE)
    if params.d_m > 255:
        raise ValueError("d_m must fit in one byte")
    header = SequenceHeader(first.width, first.height, len(frames), qp, params, refine, fps)

    w = BitWriter()
    rec0 = Frame(encode_intra(first.luma, qp, w), index=first.index)
    recon = [rec0]
    stats = [FrameStats(bits=w.bits_written, psnr=psnr_planes(first.luma, rec0.luma), intra=True)]
    for f in frames[1:]:
        _, rec, st = encode_frame(f, recon[-1], qp, params, refine, w)
        recon.append(rec)
        stats.append(st)
    data = header.to_bytes() + w.getvalue()
    return EncodedSequence(header, data, recon, stats)


def decode_sequence(seq) -> list[Frame]:
    """Decode an EncodedSequence or raw bitstream bytes."""
    data = seq.data if isinstance(seq, EncodedSequence) else bytes(seq)
    header = SequenceHeader.from_bytes(data)
    r = BitReader(data, 8 * HEADER_BYTES)
    frames = [Frame(decode_intra(r, header.width, header.height, header.qp), index=0)]
    for t in range(1, header.frame_count):
        f = decode_frame(r, frames[-1], header.qp, header.params, header.refine)
        frames.append(Frame(f.luma, index=t))
    if r.remaining >= 8 or (r.remaining and r.read(r.remaining)):
        raise MalformedBitstream("trailing data after last frame")
    return frames
