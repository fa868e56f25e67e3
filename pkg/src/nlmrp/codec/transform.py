"""4x4 integer transform and dead-zone scalar quantization of residuals.

The core transform is the separable H.264-style integer DCT approximation
``Y = C X C^T``.  Coefficients are scaled to an orthonormal basis before
quantization, so one step size applies uniformly to every frequency.
Quantization truncates toward zero.
"""

from __future__ import annotations

import numpy as np

from ..frame import MB_SIZE

QP_MIN, QP_MAX = 0, 51

CORE = np.array(
    [[1, 1, 1, 1],
     [2, 1, -1, -2],
     [1, -1, -1, 1],
     [1, -2, 2, -1]],
    dtype=np.int64,
)
_ROW_NORM = np.sqrt((CORE * CORE).sum(axis=1).astype(np.float64))
_NORM2 = np.outer(_ROW_NORM, _ROW_NORM)

ZIGZAG = np.array([0, 1, 4, 8, 5, 2, 3, 6, 9, 12, 13, 10, 7, 11, 14, 15])


def check_qp(qp: int) -> int:
    if int(qp) != qp or not QP_MIN <= qp <= QP_MAX:
        raise ValueError(f"qp must be an integer in [{QP_MIN}, {QP_MAX}], got {qp}")
    return int(qp)


def qstep(qp: int) -> float:
    """Quantizer step; doubles every 6 QP and equals 0.625 at qp 4."""
    return 0.625 * 2.0 ** ((check_qp(qp) - 4) / 6.0)


def split_blocks(mb: np.ndarray) -> np.ndarray:
    """16x16 -> (16, 4, 4), 4x4 blocks in raster order."""
    return mb.reshape(4, 4, 4, 4).transpose(0, 2, 1, 3).reshape(16, 4, 4)


def merge_blocks(blocks: np.ndarray) -> np.ndarray:
    return blocks.reshape(4, 4, 4, 4).transpose(0, 2, 1, 3).reshape(MB_SIZE, MB_SIZE)


def forward(blocks: np.ndarray) -> np.ndarray:
    """Orthonormally scaled coefficients of a stack of 4x4 blocks."""
    y = CORE @ blocks.astype(np.int64) @ CORE.T
    return y / _NORM2


def inverse(coeffs: np.ndarray) -> np.ndarray:
    return CORE.T @ (coeffs / _NORM2) @ CORE


def transform_quantize(residual: np.ndarray, qp: int) -> np.ndarray:
    """Quantized levels, shape (16, 4, 4), for a 16x16 residual."""
    residual = np.asarray(residual)
    if residual.shape != (MB_SIZE, MB_SIZE):
        raise ValueError(f"residual must be 16x16, got {residual.shape}")
    coeffs = forward(split_blocks(residual))
    return np.trunc(coeffs / qstep(qp)).astype(np.int64)


def dequantize_inverse(levels: np.ndarray, qp: int) -> np.ndarray:
    """Reconstructed 16x16 integer residual; shared by encoder and decoder."""
    rec = inverse(np.asarray(levels, dtype=np.float64) * qstep(qp))
    return merge_blocks(np.floor(rec + 0.5).astype(np.int64))
