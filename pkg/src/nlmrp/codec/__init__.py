from .bitstream import BitReader, BitWriter
from .coder import (
    EncodedSequence,
    FrameStats,
    SequenceHeader,
    decode_sequence,
    encode_frame,
    encode_sequence,
    mode_decide,
)
from .transform import dequantize_inverse, qstep, transform_quantize

__all__ = [
    "BitReader",
    "BitWriter",
    "EncodedSequence",
    "FrameStats",
    "SequenceHeader",
    "decode_sequence",
    "dequantize_inverse",
    "encode_frame",
    "encode_sequence",
    "mode_decide",
    "qstep",
    "transform_quantize",
]
