"""PSNR, rate-distortion curves and Bjontegaard deltas."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, InsufficientPoints, NoOverlap
from .frame import Frame

log = logging.getLogger(__name__)

PSNR_CAP = 100.0
CSV_FIELDS = ("qp", "rate_kbps", "psnr_db", "mode_flags_set", "total_mbs")


def psnr_planes(a: np.ndarray, b: np.ndarray, crop: Optional[tuple[int, int]] = None) -> float:
    """PSNR of two 8-bit planes; ``crop=(width, height)`` limits it to the top-left region."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"cannot compare {a.shape} with {b.shape}")
    if crop is not None:
        w, h = crop
        a, b = a[:h, :w], b[:h, :w]
    diff = a.astype(np.float64) - b.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * math.log10(255.0 * 255.0 / mse))


def psnr(a: Frame, b: Frame, crop: Optional[tuple[int, int]] = None) -> float:
    """Luma PSNR in dB; identical frames give ``PSNR_CAP``."""
    return psnr_planes(a.luma, b.luma, crop)


@dataclass(frozen=True)
class RdPoint:
    rate: float
    psnr: float
    qp: Optional[int] = None
    flags_set: int = 0
    total_mbs: int = 0

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")


class RdCurve:
    """RD points ordered by rate.

    Bjontegaard deltas need at least four points with strictly increasing
    rate.  Measured curves may be built with ``strict=False``, which only
    warns about repeated rates.
    """

    def __init__(self, points: Iterable[RdPoint], min_points: int = 4, strict: bool = True):
        pts = sorted(points, key=lambda p: p.rate)
        if len(pts) < min_points:
            raise InsufficientPoints(f"need at least {min_points} RD points, got {len(pts)}")
        for lo, hi in zip(pts, pts[1:]):
            if not hi.rate > lo.rate:
                if strict:
                    raise ValueError("RD point rates must be strictly increasing")
                log.warning("repeated rate %.3f kbit/s in RD curve", lo.rate)
            if hi.psnr < lo.psnr:
                log.warning("PSNR decreases with rate between %.3f and %.3f kbit/s", lo.rate, hi.rate)
        self.points = pts

    @classmethod
    def from_pairs(cls, pairs, min_points: int = 4, strict: bool = True) -> "RdCurve":
        return cls([RdPoint(float(r), float(q)) for r, q in pairs], min_points, strict)

    @property
    def rates(self) -> np.ndarray:
        return np.array([p.rate for p in self.points])

    @property
    def psnrs(self) -> np.ndarray:
        return np.array([p.psnr for p in self.points])

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            write_csv_rows(fh, self.points)

    @classmethod
    def from_csv(cls, path, min_points: int = 4, strict: bool = True) -> "RdCurve":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = set(CSV_FIELDS) - set(reader.fieldnames or ())
            if missing:
                raise ValueError(f"{path}: missing CSV columns {sorted(missing)}")
            pts = [
                RdPoint(
                    float(row["rate_kbps"]), float(row["psnr_db"]), int(row["qp"]),
                    int(row["mode_flags_set"]), int(row["total_mbs"]),
                )
                for row in reader
            ]
        return cls(pts, min_points, strict)


def write_csv_rows(fh, points: Sequence[RdPoint]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for p in sorted(points, key=lambda p: (p.qp is None, p.qp)):
        writer.writerow([p.qp, f"{p.rate:.6f}", f"{p.psnr:.6f}", p.flags_set, p.total_mbs])


def _check_pair(anchor: RdCurve, test: RdCurve) -> None:
    for c in (anchor, test):
        if len(c) < 4:
            raise InsufficientPoints("Bjontegaard deltas need at least 4 points per curve")
        if np.any(np.diff(c.rates) <= 0):
            raise ValueError("Bjontegaard deltas need strictly increasing rates")


def bd_psnr(anchor: RdCurve, test: RdCurve) -> float:
    """Average PSNR difference (dB) of ``test`` over ``anchor`` across the common log-rate range.

    Cubic fits of PSNR against log10(rate) are integrated over the
    intersection of the two rate ranges.
    """
    _check_pair(anchor, test)
    la, lt = np.log10(anchor.rates), np.log10(test.rates)
    lo, hi = max(la.min(), lt.min()), min(la.max(), lt.max())
    if not hi > lo:
        raise NoOverlap("rate ranges of the two curves do not overlap")
    pa = np.polyint(np.polyfit(la, anchor.psnrs, 3))
    pt = np.polyint(np.polyfit(lt, test.psnrs, 3))
    ia = np.polyval(pa, hi) - np.polyval(pa, lo)
    it = np.polyval(pt, hi) - np.polyval(pt, lo)
    return float((it - ia) / (hi - lo))


def bd_rate(anchor: RdCurve, test: RdCurve) -> float:
    """Average rate difference in percent; negative means ``test`` needs less rate.

    Cubic fits of log10(rate) against PSNR are integrated over the
    intersection of the two PSNR ranges.
    """
    _check_pair(anchor, test)
    qa, qt = anchor.psnrs, test.psnrs
    lo, hi = max(qa.min(), qt.min()), min(qa.max(), qt.max())
    if not hi > lo:
        raise NoOverlap("PSNR ranges of the two curves do not overlap")
    pa = np.polyint(np.polyfit(qa, np.log10(anchor.rates), 3))
    pt = np.polyint(np.polyfit(qt, np.log10(test.rates), 3))
    ia = np.polyval(pa, hi) - np.polyval(pa, lo)
    it = np.polyval(pt, hi) - np.polyval(pt, lo)
    avg = (it - ia) / (hi - lo)
    return float((10.0 ** avg - 1.0) * 100.0)


def rd_point(frames: Sequence[Frame], qp: int, params=None, refinement_on: bool = True,
             fps: int = 30, crop: Optional[tuple[int, int]] = None):
    """Encode and decode once; returns ``(RdPoint, EncodedSequence)``.

    PSNR is the mean luma PSNR of the decoded P-frames, optionally cropped
    to ``crop=(width, height)``.  Rate counts P-frame bits only:
    ``bits * fps / n_pframes / 1000`` kbit/s.
    """
    from .codec import decode_sequence, encode_sequence
    from .nlm import NlmParams

    if len(frames) < 2:
        raise ValueError("RD measurement needs at least one P-frame")
    params = params if params is not None else NlmParams()
    enc = encode_sequence(frames, qp, params, refine=refinement_on, fps=fps)
    decoded = decode_sequence(enc)
    pstats = enc.stats[1:]
    bits = sum(s.bits for s in pstats)
    quality = float(np.mean([psnr(o, d, crop) for o, d in zip(frames[1:], decoded[1:])]))
    point = RdPoint(
        rate=bits * fps / len(pstats) / 1000.0,
        psnr=quality,
        qp=qp,
        flags_set=sum(s.refined_mbs for s in pstats),
        total_mbs=sum(s.total_mbs for s in pstats),
    )
    return point, enc


def collect_rd_curve(
    frames: Sequence[Frame],
    qp_list: Sequence[int],
    params=None,
    refinement_on: bool = True,
    fps: int = 30,
    crop: Optional[tuple[int, int]] = None,
    min_points: int = 1,
) -> RdCurve:
    """Encode ``frames`` once per QP and measure one RD point per encode."""
    if any(b <= a for a, b in zip(qp_list, qp_list[1:])):
        raise ValueError("qp_list must be strictly increasing")
    points = [rd_point(frames, qp, params, refinement_on, fps, crop)[0] for qp in qp_list]
    return RdCurve(points, min_points=min_points, strict=False)
