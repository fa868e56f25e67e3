"""Exit criteria for the NLM-RP codec, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import random_area
from nlmrp.codec import decode_sequence, encode_sequence
from nlmrp.frame import Frame, MbPosition, ProcessingArea
from nlmrp.metrics import RdCurve, RdPoint, bd_psnr, bd_rate, rd_point
from nlmrp.motion import InterpolatedRef, motion_search
from nlmrp.nlm import NlmParams, nlm_weight, refine_block
from nlmrp.synthetic import SyntheticSpec, generate_synthetic
from oracles import bd_trapezoid, motion_brute_force, nlm_brute_force

RD_QPS = (16, 22, 28, 34, 40)
CORPORA = ("occlusion", "illumination_ramp", "translating_texture")


@pytest.fixture(scope="module")
def sweep():
    """MC and NLM-RP encodes of every synthetic corpus at every RD QP (64x64, 30 frames)."""
    out = {}
    for kind in CORPORA:
        frames = generate_synthetic(SyntheticSpec(kind, size=64, frames=30))
        for refine in (False, True):
            out[kind, refine] = [rd_point(frames, qp, refinement_on=refine) for qp in RD_QPS]
    return out


def test_c01_nlm_oracle_equivalence(criterion):
    rng = np.random.default_rng(101)
    worst, spent = 0.0, 0.0
    for d_m in (1, 2, 3):
        for h in (10.0, 25.0, 50.0):
            for i in range(100):
                area = random_area(rng, ("noise", "tiled", "smooth")[i % 3])
                t = time.perf_counter()
                got = refine_block(area, NlmParams(d_m, h)).values
                spent += time.perf_counter() - t
                want = nlm_brute_force(area.samples.astype(np.float64), d_m, h)
                worst = max(worst, float(np.abs(got - want).max()))
    ok = worst <= 1e-9 and spent < 30.0
    criterion(1, ok, f"max |refine - brute force| = {worst:.2e} (<= 1e-9), refine time {spent:.1f}s (< 30s)")
    assert ok


def test_c02_convexity_and_constancy(criterion):
    rng = np.random.default_rng(202)
    violations = 0
    for i in range(1000):
        area = random_area(rng, ("noise", "tiled", "smooth")[i % 3])
        v = refine_block(area).values
        violations += int(v.min() < area.samples.min() or v.max() > area.samples.max())
    for c in rng.integers(0, 256, 1000):
        blk = refine_block(ProcessingArea(np.full((32, 32), c)))
        violations += int(not (blk.samples == c).all() or np.abs(blk.values - c).max() > 1e-9)
    criterion(2, violations == 0, f"{violations} violations over 1000 random + 1000 constant areas")
    assert violations == 0


def test_c03_weight_spot_checks(criterion):
    err = abs(float(nlm_weight(625, 25)) - math.exp(-1))
    ok = all(nlm_weight(0, h) == 1.0 for h in (0.5, 10, 25, 50)) and err <= 1e-12
    criterion(3, ok, f"w(0,h) = 1; |w(625,25) - 1/e| = {err:.1e}")
    assert ok


def test_c04_drift_free(criterion):
    rng = np.random.default_rng(404)
    sequences = [
        [Frame(rng.integers(0, 256, (48, 48)), index=t) for t in range(3)] for _ in range(20)
    ]
    sequences += [generate_synthetic(SyntheticSpec(kind, size=64, frames=10)) for kind in CORPORA]
    mismatches = checked = 0
    for frames in sequences:
        for qp in (16, 28, 43):
            enc = encode_sequence(frames, qp)
            dec = decode_sequence(enc.data)
            checked += 1
            mismatches += int(not all(np.array_equal(a.luma, b.luma) for a, b in zip(enc.recon, dec)))
    criterion(4, mismatches == 0, f"{checked - mismatches}/{checked} sequence encodes decode bit-exactly")
    assert mismatches == 0


def test_c05_mode_decision_dominance(sweep, criterion):
    frames_checked = violations = 0
    for kind in CORPORA:
        on, off = sweep[kind, True], sweep[kind, False]
        for (_, enc_on), (_, enc_off) in zip(on, off):
            for st in enc_on.stats[1:]:
                frames_checked += 1
                violations += int(st.pred_ssd > st.mc_ssd)
            # the first P-frame sees the same reference in both encodes
            violations += int(enc_on.stats[1].pred_ssd > enc_off.stats[1].pred_ssd)
    ok = violations == 0
    criterion(5, ok, f"prediction SSD with refinement <= without on {frames_checked} frames, {violations} violations")
    assert ok


def _curve(points):
    return RdCurve([p for p, _ in points])


@pytest.mark.parametrize("kind", ["occlusion", "illumination_ramp"])
def test_c06_directional_gain(sweep, criterion, kind):
    anchor, test = _curve(sweep[kind, False]), _curve(sweep[kind, True])
    rate, gain = bd_rate(anchor, test), bd_psnr(anchor, test)
    ok = rate < 0
    criterion(6, ok, f"{kind}: BD-rate {rate:+.2f}% (< 0), BD-PSNR {gain:+.3f} dB")
    assert ok


def test_c07_static_null_result(sweep, criterion):
    kind = "translating_texture"
    anchor_pts, test_pts = sweep[kind, False], sweep[kind, True]
    anchor, test = _curve(anchor_pts), _curve(test_pts)
    # anchor curve charged with one flag bit per eligible macroblock
    padded = []
    for (p, _), (_, enc) in zip(anchor_pts, test_pts):
        pstats = enc.stats[1:]
        extra = sum(s.eligible_mbs for s in pstats) * 30 / len(pstats) / 1000
        padded.append(RdPoint(p.rate + extra, p.psnr, p.qp))
    bound = abs(bd_rate(anchor, RdCurve(padded)))
    rate = bd_rate(anchor, test)
    flags = sum(p.flags_set for p, _ in test_pts)
    ok = abs(rate) <= bound * (1 + 1e-9) + 1e-12
    criterion(7, ok, f"|BD-rate| {abs(rate):.4f}% <= flag overhead bound {bound:.4f}% ({flags} flags set)")
    assert ok


def test_c08_bjontegaard(criterion):
    rng = np.random.default_rng(808)
    worst_rate = worst_psnr = 0.0
    for _ in range(50):
        rates = np.sort(rng.uniform(50, 5000, 4))
        while np.any(np.diff(rates) < 1):
            rates = np.sort(rng.uniform(50, 5000, 4))
        psnrs = 20 + 6 * np.log2(rates / 50) * rng.uniform(0.8, 1.2) + rng.uniform(-0.3, 0.3, 4)
        psnrs = np.sort(psnrs)
        t_rates = np.sort(rates * rng.uniform(0.7, 1.3, 4))
        t_psnrs = np.sort(psnrs + rng.uniform(-0.8, 0.8, 4))
        a = RdCurve.from_pairs(zip(rates, psnrs))
        b = RdCurve.from_pairs(zip(t_rates, t_psnrs))
        want_rate, want_psnr = bd_trapezoid(rates, psnrs, t_rates, t_psnrs)
        worst_rate = max(worst_rate, abs(bd_rate(a, b) - want_rate))
        worst_psnr = max(worst_psnr, abs(bd_psnr(a, b) - want_psnr))

    base = RdCurve.from_pairs([(100, 30), (200, 33), (400, 36), (800, 39)])
    scaled = RdCurve.from_pairs([(r * 0.9, q) for r, q in zip(base.rates, base.psnrs)])
    analytic = max(abs(bd_rate(base, base)), abs(bd_psnr(base, base)), abs(bd_rate(base, scaled) + 10.0))
    ok = worst_rate <= 0.01 and worst_psnr <= 0.001 and analytic <= 1e-6
    criterion(8, ok, f"vs trapezoid oracle: rate {worst_rate:.1e} pp, PSNR {worst_psnr:.1e} dB; "
                     f"analytic cases {analytic:.1e}")
    assert ok


def test_c09_motion_search_optimal(criterion):
    rng = np.random.default_rng(909)
    mismatches = 0
    for i in range(50):
        ref = rng.integers(0, 256, (64, 64)).astype(np.uint8)
        if i % 2:
            # related pair: displaced and noisy copy of the reference
            shift = tuple(int(v) for v in rng.integers(-12, 13, 2))
            cur = np.clip(np.roll(ref, shift, axis=(0, 1)) + rng.normal(0, 6, ref.shape), 0, 255).astype(np.uint8)
        else:
            cur = rng.integers(0, 256, (64, 64)).astype(np.uint8)
        mb_x, mb_y = (int(v) for v in rng.integers(0, 4, 2))
        block = cur[16 * mb_y:16 * mb_y + 16, 16 * mb_x:16 * mb_x + 16]
        mv, _, sad = motion_search(block, InterpolatedRef(ref), MbPosition(mb_x, mb_y))
        mismatches += int((mv.dx, mv.dy, sad) != motion_brute_force(block, ref, mb_x, mb_y))
    criterion(9, mismatches == 0, f"{50 - mismatches}/50 searches equal the exhaustive quarter-sample argmin")
    assert mismatches == 0


def test_c10_cli_determinism(tmp_path, criterion):
    outputs = []
    for run in range(2):
        csv = tmp_path / f"rd{run}.csv"
        cmd = [sys.executable, "-m", "nlmrp.cli", "rdcurve",
               "--input", "synth:occlusion,size=48,frames=6,seed=4",
               "--qps", "16,24,32,40", "--mode", "both", "--csv", str(csv)]
        subprocess.run(cmd, check=True)
        outputs.append(csv.read_bytes())
    ok = outputs[0] == outputs[1] and len(outputs[0]) > 0
    criterion(10, ok, f"two rdcurve runs, CSVs byte-identical ({len(outputs[0])} bytes)")
    assert ok
