"""Hybrid video codec with Non-Local Means refined motion-compensated prediction."""

from .codec import EncodedSequence, decode_sequence, encode_frame, encode_sequence, mode_decide
from .errors import NlmrpError
from .frame import Frame, MbPosition, ProcessingArea, build_processing_area, region_of
from .metrics import RdCurve, RdPoint, bd_psnr, bd_rate, collect_rd_curve, psnr
from .motion import InterpolatedRef, MotionVector, interpolate_at, motion_compensate, motion_search
from .nlm import NlmParams, RefinedBlock, nlm_weight, offset_set, refine_block, ssd_distance
from .synthetic import SyntheticSpec, generate_synthetic

__version__ = "0.1.0"
