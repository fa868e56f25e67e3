"""Frame storage, macroblock geometry and the 32x32 processing area.

Planes are plain 2-D ``uint8`` numpy arrays indexed ``[row, column]``.

The processing area is the 2x2 macroblock window whose top-left, top-right
and bottom-left quadrants (region R) hold already reconstructed samples of
the current frame, and whose bottom-right quadrant (region B) holds the
motion-compensated prediction of the macroblock being coded.  Local
coordinates ``(m, n)`` are ``(row, column)`` with the origin at the top-left
of the window, so B covers rows 16..31 and columns 16..31.  A local sample
``(m, n)`` maps to the frame sample at row ``y0 - 16 + m`` and column
``x0 - 16 + n`` where ``(x0, y0)`` is the macroblock origin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, NeighborsUnavailable, OutOfBounds

MB_SIZE = 16
AREA_SIZE = 2 * MB_SIZE

REGION_R = "R"
REGION_B = "B"


def as_plane(data, name: str = "plane") -> np.ndarray:
    """Validate ``data`` as an 8-bit sample grid and return it as ``uint8``."""
    arr = np.asarray(data)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError(f"{name} samples must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


@dataclass(frozen=True)
class Frame:
    """One picture: luma plane, optional 4:2:0 chroma planes, temporal index."""

    luma: np.ndarray
    cb: Optional[np.ndarray] = None
    cr: Optional[np.ndarray] = None
    index: int = 0

    def __post_init__(self):
        luma = as_plane(self.luma, "luma")
        object.__setattr__(self, "luma", luma)
        if (self.cb is None) != (self.cr is None):
            raise ValueError("cb and cr must both be present or both absent")
        if self.cb is not None:
            want = ((luma.shape[0] + 1) // 2, (luma.shape[1] + 1) // 2)
            for name in ("cb", "cr"):
                plane = as_plane(getattr(self, name), name)
                if plane.shape != want:
                    raise DimensionMismatch(
                        f"{name} shape {plane.shape} does not match 4:2:0 size {want}"
                    )
                object.__setattr__(self, name, plane)

    @property
    def width(self) -> int:
        return self.luma.shape[1]

    @property
    def height(self) -> int:
        return self.luma.shape[0]

    @property
    def has_chroma(self) -> bool:
        return self.cb is not None


@dataclass(frozen=True)
class MbPosition:
    mb_x: int
    mb_y: int

    @property
    def x0(self) -> int:
        return self.mb_x * MB_SIZE

    @property
    def y0(self) -> int:
        return self.mb_y * MB_SIZE

    @property
    def has_neighbors(self) -> bool:
        """True when left, above and above-left macroblocks exist."""
        return self.mb_x >= 1 and self.mb_y >= 1

    def check_inside(self, width: int, height: int) -> None:
        if self.mb_x < 0 or self.mb_y < 0 or self.x0 + MB_SIZE > width or self.y0 + MB_SIZE > height:
            raise OutOfBounds(f"macroblock ({self.mb_x}, {self.mb_y}) outside {width}x{height} frame")


def mb_grid(width: int, height: int) -> list[MbPosition]:
    """Macroblock positions of a frame in line-scan order."""
    if width % MB_SIZE or height % MB_SIZE:
        raise DimensionMismatch(f"frame size {width}x{height} is not a multiple of {MB_SIZE}")
    return [MbPosition(x, y) for y in range(height // MB_SIZE) for x in range(width // MB_SIZE)]


def _region_mask() -> np.ndarray:
    mask = np.zeros((AREA_SIZE, AREA_SIZE), dtype=bool)
    mask[MB_SIZE:, MB_SIZE:] = True
    mask.flags.writeable = False
    return mask


_B_MASK = _region_mask()


@dataclass(frozen=True)
class ProcessingArea:
    """32x32 window of R samples plus the motion-compensated block B."""

    samples: np.ndarray

    def __post_init__(self):
        samples = as_plane(self.samples, "samples")
        if samples.shape != (AREA_SIZE, AREA_SIZE):
            raise DimensionMismatch(f"processing area must be 32x32, got {samples.shape}")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def b_mask(self) -> np.ndarray:
        """Boolean map that is True on region B."""
        return _B_MASK

    @property
    def region_map(self) -> np.ndarray:
        return np.where(_B_MASK, REGION_B, REGION_R)

    def region_of(self, m: int, n: int) -> str:
        return region_of(m, n)

    @property
    def mc_block(self) -> np.ndarray:
        return self.samples[MB_SIZE:, MB_SIZE:]


def region_of(m: int, n: int) -> str:
    if not (0 <= m < AREA_SIZE and 0 <= n < AREA_SIZE):
        raise OutOfBounds(f"local coordinate ({m}, {n}) outside the processing area")
    return REGION_B if m >= MB_SIZE and n >= MB_SIZE else REGION_R


def build_processing_area(recon, mc_block: np.ndarray, pos: MbPosition) -> ProcessingArea:
    """Cut the processing area for ``pos`` out of the current reconstruction.

    ``recon`` is a Frame or a bare luma plane. Only the three R quadrants are
    read from it; the macroblock's own position is filled from ``mc_block``.
    The result is an independent copy.
    """
    if not pos.has_neighbors:
        raise NeighborsUnavailable(
            f"macroblock ({pos.mb_x}, {pos.mb_y}) has no left/above neighbors"
        )
    recon_luma = recon.luma if isinstance(recon, Frame) else np.asarray(recon)
    pos.check_inside(recon_luma.shape[1], recon_luma.shape[0])
    mc_block = np.asarray(mc_block)
    if mc_block.shape != (MB_SIZE, MB_SIZE):
        raise DimensionMismatch(f"mc_block must be 16x16, got {mc_block.shape}")
    y, x = pos.y0 - MB_SIZE, pos.x0 - MB_SIZE
    window = np.array(recon_luma[y:y + AREA_SIZE, x:x + AREA_SIZE], dtype=np.uint8)
    window[MB_SIZE:, MB_SIZE:] = mc_block
    return ProcessingArea(window)
