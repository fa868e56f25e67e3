"""Non-Local Means refinement of a motion-compensated block.

Every sample of region B is replaced by a weighted average of all admissible
samples of the processing area.  The weight of a candidate decays
exponentially with the sum of squared differences between the neighborhood
around the target and the equally shaped neighborhood around the candidate.

Neighborhoods of targets near the border of the area are clipped to the
area.  A candidate is admissible only if the target's (clipped) neighborhood
fits entirely inside the area when centered on the candidate, so all
distances for one target are taken over the same support.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .frame import AREA_SIZE, MB_SIZE, ProcessingArea

DEFAULT_DM = 3
DEFAULT_H = 25.0


@dataclass(frozen=True)
class NlmParams:
    d_m: int = DEFAULT_DM
    h: float = DEFAULT_H

    def __post_init__(self):
        if int(self.d_m) != self.d_m or self.d_m < 0:
            raise ValueError(f"d_m must be a non-negative integer, got {self.d_m}")
        if not self.h > 0:
            raise ValueError(f"h must be positive, got {self.h}")


def offset_bounds(m: int, n: int, d_m: int) -> tuple[int, int, int, int]:
    """Inclusive offset ranges ``(mu_lo, mu_hi, nu_lo, nu_hi)`` kept inside the area."""
    last = AREA_SIZE - 1
    return max(-d_m, -m), min(d_m, last - m), max(-d_m, -n), min(d_m, last - n)


def offset_set(m: int, n: int, d_m: int) -> set[tuple[int, int]]:
    mu_lo, mu_hi, nu_lo, nu_hi = offset_bounds(m, n, d_m)
    return {(mu, nu) for mu in range(mu_lo, mu_hi + 1) for nu in range(nu_lo, nu_hi + 1)}


def ssd_distance(area: ProcessingArea, target, candidate, offsets) -> float:
    s = area.samples.astype(np.int64)
    (m, n), (k, l) = target, candidate
    return float(sum((s[m + mu, n + nu] - s[k + mu, l + nu]) ** 2 for mu, nu in offsets))


def nlm_weight(d, h):
    return np.exp(-np.asarray(d, dtype=np.float64) / (float(h) * float(h)))


def refine_values(area: ProcessingArea, params: NlmParams = NlmParams()) -> np.ndarray:
    """Unrounded refined samples of region B as a 16x16 ``float64`` array.

    Targets sharing the same clipped neighborhood shape are processed
    together: the candidate patches are all windows of that shape in the
    area, and distances come from ``|t|^2 + |c|^2 - 2 t.c``.  Samples are
    integers, so the distances are exact in double precision.
    """
    s = area.samples.astype(np.float64)
    d_m, h2 = int(params.d_m), float(params.h) ** 2
    out = np.empty((MB_SIZE, MB_SIZE))

    groups: dict[tuple[int, int, int, int], list[tuple[int, int]]] = {}
    for m in range(MB_SIZE, AREA_SIZE):
        for n in range(MB_SIZE, AREA_SIZE):
            groups.setdefault(offset_bounds(m, n, d_m), []).append((m, n))

    for (mu_lo, mu_hi, nu_lo, nu_hi), targets in groups.items():
        rows, cols = mu_hi - mu_lo + 1, nu_hi - nu_lo + 1
        # windows[a, b] is the patch whose top-left sample sits at (a, b),
        # i.e. the neighborhood of candidate (a - mu_lo, b - nu_lo)
        windows = sliding_window_view(s, (rows, cols))
        cand = windows.reshape(-1, rows * cols)
        centers = windows[:, :, -mu_lo, -nu_lo].reshape(-1)

        tm = np.array([t[0] + mu_lo for t in targets])
        tn = np.array([t[1] + nu_lo for t in targets])
        tpatch = windows[tm, tn].reshape(len(targets), -1)

        dist = (tpatch * tpatch).sum(axis=1)[:, None] + (cand * cand).sum(axis=1)[None, :]
        dist -= 2.0 * (tpatch @ cand.T)
        np.maximum(dist, 0.0, out=dist)
        w = np.exp(-dist / h2)
        values = (w * centers).sum(axis=1) / w.sum(axis=1)
        # a convex combination stays in the candidate range; clip ulp-level overshoot
        np.clip(values, centers.min(), centers.max(), out=values)
        out[tm - mu_lo - MB_SIZE, tn - nu_lo - MB_SIZE] = values
    return out


def round_samples(values: np.ndarray) -> np.ndarray:
    """Round half-up and clamp to 8 bit."""
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class RefinedBlock:
    values: np.ndarray

    @property
    def samples(self) -> np.ndarray:
        """The refined block as an 8-bit predictor."""
        return round_samples(self.values)


def refine_block(area: ProcessingArea, params: NlmParams = NlmParams()) -> RefinedBlock:
    return RefinedBlock(refine_values(area, params))
