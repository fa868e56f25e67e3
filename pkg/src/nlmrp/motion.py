"""Block motion estimation and quarter-sample motion compensation.

Sub-sample values come from bilinear interpolation in integer arithmetic::

    v = ((4-fx)(4-fy) A + fx (4-fy) B + (4-fx) fy C + fx fy D + 8) >> 4

where ``A``..``D`` are the four surrounding integer samples and ``fx, fy`` the
quarter-sample fractions.  Reference samples outside the frame repeat the
nearest border sample.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit

from .errors import DimensionMismatch, MvOutOfRange
from .frame import MB_SIZE, MbPosition

SEARCH_RANGE = 16
MV_LIMIT = 4 * SEARCH_RANGE
# border wide enough for a full-range displacement plus the interpolation tap
_PAD = SEARCH_RANGE + 1


@dataclass(frozen=True)
class MotionVector:
    """Displacement in quarter samples."""

    dx: int = 0
    dy: int = 0

    @property
    def in_range(self) -> bool:
        return abs(self.dx) <= MV_LIMIT and abs(self.dy) <= MV_LIMIT


def interp_weights(fx: int, fy: int) -> tuple[int, int, int, int]:
    return (4 - fx) * (4 - fy), fx * (4 - fy), (4 - fx) * fy, fx * fy


class InterpolatedRef:
    """A reference plane with quarter-sample access.

    The sixteen fractional-phase planes are built lazily on first use and
    shared by every block searched in the same reference.
    """

    def __init__(self, plane: np.ndarray):
        self.plane = np.asarray(plane, dtype=np.uint8)
        self.height, self.width = self.plane.shape
        self._padded = np.pad(self.plane, _PAD, mode="edge").astype(np.int32)

    def at(self, x4: int, y4: int) -> int:
        """Sample at quarter-sample position ``(x4, y4)``."""
        xi, fx = x4 >> 2, x4 & 3
        yi, fy = y4 >> 2, y4 & 3
        p = self.plane
        x0, x1 = _clamp(xi, self.width), _clamp(xi + 1, self.width)
        y0, y1 = _clamp(yi, self.height), _clamp(yi + 1, self.height)
        wa, wb, wc, wd = interp_weights(fx, fy)
        acc = wa * int(p[y0, x0]) + wb * int(p[y0, x1]) + wc * int(p[y1, x0]) + wd * int(p[y1, x1])
        return (acc + 8) >> 4

    @cached_property
    def phases(self) -> np.ndarray:
        """``phases[fy, fx, Y, X]`` = sample at padded integer ``(Y, X)`` plus ``(fy, fx)`` quarters."""
        p = self._padded
        a, b = p[:-1, :-1], p[:-1, 1:]
        c, d = p[1:, :-1], p[1:, 1:]
        out = np.empty((4, 4) + a.shape, dtype=np.int32)
        for fy in range(4):
            for fx in range(4):
                wa, wb, wc, wd = interp_weights(fx, fy)
                out[fy, fx] = (wa * a + wb * b + wc * c + wd * d + 8) >> 4
        return out

    def block(self, x: int, y: int, fx: int, fy: int, size: int = MB_SIZE) -> np.ndarray:
        """``size`` x ``size`` block at integer origin ``(x, y)`` plus a fractional phase."""
        Y, X = y + _PAD, x + _PAD
        return self.phases[fy, fx, Y:Y + size, X:X + size]


def _clamp(v: int, n: int) -> int:
    return 0 if v < 0 else n - 1 if v >= n else v


def interpolate_at(ref: InterpolatedRef, x4: int, y4: int) -> int:
    return ref.at(x4, y4)


def motion_compensate(ref: InterpolatedRef, pos: MbPosition, mv: MotionVector) -> np.ndarray:
    """Predict the macroblock at ``pos`` from ``ref`` displaced by ``mv``."""
    if not mv.in_range:
        raise MvOutOfRange(f"motion vector ({mv.dx}, {mv.dy}) exceeds +/-{MV_LIMIT} quarter samples")
    blk = ref.block(pos.x0 + (mv.dx >> 2), pos.y0 + (mv.dy >> 2), mv.dx & 3, mv.dy & 3)
    return blk.astype(np.uint8)


def _tie_key(dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
    # lexicographic (|dx|+|dy|, dy, dx) packed into one integer
    span = 2 * MV_LIMIT + 1
    return ((np.abs(dx) + np.abs(dy)) * span + (dy + MV_LIMIT)) * span + (dx + MV_LIMIT)


@njit(cache=True)
def _sad_kernel(phases, cur, top, left, table):
    for fy in range(4):
        ny = 2 * SEARCH_RANGE + (1 if fy == 0 else 0)
        for fx in range(4):
            nx = 2 * SEARCH_RANGE + (1 if fx == 0 else 0)
            for iy in range(ny):
                for ix in range(nx):
                    acc = 0
                    for i in range(MB_SIZE):
                        for j in range(MB_SIZE):
                            d = phases[fy, fx, top + iy + i, left + ix + j] - cur[i, j]
                            acc += d if d >= 0 else -d
                    # integer step iy maps to displacement 4 * (iy - 16) + fy
                    table[fy + 4 * iy, fx + 4 * ix] = acc


def sad_table(cur_block: np.ndarray, ref: InterpolatedRef, pos: MbPosition) -> np.ndarray:
    """SAD of every quarter-sample displacement within range.

    Entry ``[dy + 64, dx + 64]`` holds the SAD for motion vector ``(dx, dy)``.
    """
    span = 2 * MV_LIMIT + 1
    table = np.empty((span, span), dtype=np.int64)
    cur = np.ascontiguousarray(cur_block, dtype=np.int32)
    _sad_kernel(ref.phases, cur, pos.y0 - SEARCH_RANGE + _PAD, pos.x0 - SEARCH_RANGE + _PAD, table)
    return table


def motion_search(cur_block: np.ndarray, ref: InterpolatedRef, pos: MbPosition):
    """Exhaustive quarter-sample search within +/-16 samples.

    Returns ``(mv, predicted_block, sad)``.  Among equal SADs the vector with
    the smallest ``|dx| + |dy|`` wins, then the smaller ``dy``, then the
    smaller ``dx``.
    """
    cur_block = np.asarray(cur_block)
    if cur_block.shape != (MB_SIZE, MB_SIZE):
        raise DimensionMismatch(f"current block must be 16x16, got {cur_block.shape}")
    pos.check_inside(ref.width, ref.height)
    table = sad_table(cur_block, ref, pos)
    best = table.min()
    iy, ix = np.nonzero(table == best)
    dy, dx = iy - MV_LIMIT, ix - MV_LIMIT
    k = int(np.argmin(_tie_key(dx, dy)))
    mv = MotionVector(int(dx[k]), int(dy[k]))
    return mv, motion_compensate(ref, pos, mv), int(best)
