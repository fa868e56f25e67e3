"""YUV4MPEG2 and raw planar 4:2:0 reading/writing, plus padding to whole macroblocks."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import GeometryError, ParseError
from .frame import MB_SIZE, Frame

Y4M_MAGIC = b"YUV4MPEG2"
_C420 = {"420", "420jpeg", "420paldv", "420mpeg2"}


@dataclass
class Video:
    """Decoded frames plus the geometry they had before padding."""

    frames: list
    fps: int = 30
    width: int = 0
    height: int = 0
    mono: bool = False

    def __post_init__(self):
        if self.frames and not self.width:
            self.width, self.height = self.frames[0].width, self.frames[0].height

    @property
    def crop(self) -> tuple[int, int]:
        return self.width, self.height

    def __len__(self) -> int:
        return len(self.frames)


@dataclass
class SequenceSource:
    """Where frames come from: ``y4m``, ``raw`` or ``synthetic``."""

    kind: str
    path: Optional[str] = None
    width: int = 0
    height: int = 0
    frame_count: Optional[int] = None
    fps: int = 30
    synthetic: Optional[dict] = field(default=None)


def pad_plane(plane: np.ndarray, multiple: int) -> np.ndarray:
    h, w = plane.shape
    ph, pw = -h % multiple, -w % multiple
    if not ph and not pw:
        return plane
    return np.pad(plane, ((0, ph), (0, pw)), mode="edge")


def pad_frame(frame: Frame, multiple: int = MB_SIZE) -> Frame:
    """Edge-replicate a frame so luma dimensions become multiples of ``multiple``."""
    luma = pad_plane(frame.luma, multiple)
    cb = cr = None
    if frame.has_chroma:
        want = ((luma.shape[0] + 1) // 2, (luma.shape[1] + 1) // 2)
        cb, cr = (
            np.pad(p, ((0, want[0] - p.shape[0]), (0, want[1] - p.shape[1])), mode="edge")
            for p in (frame.cb, frame.cr)
        )
    return Frame(luma, cb, cr, frame.index)


def _parse_header(line: bytes):
    tokens = line.split()
    if not tokens or tokens[0] != Y4M_MAGIC:
        raise ParseError("not a YUV4MPEG2 stream")
    width = height = None
    fps = Fraction(30)
    colour = "420jpeg"
    for tok in tokens[1:]:
        key, val = chr(tok[0]), tok[1:].decode("ascii", "replace")
        try:
            if key == "W":
                width = int(val)
            elif key == "H":
                height = int(val)
            elif key == "F":
                num, den = val.split(":")
                fps = Fraction(int(num), int(den))
            elif key == "C":
                colour = val
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad y4m header token {tok!r}") from exc
    if not width or not height or width < 0 or height < 0:
        raise ParseError("y4m header lacks a valid W/H")
    if colour != "mono" and colour not in _C420:
        raise ParseError(f"unsupported y4m colour space C{colour}; need C420 or Cmono")
    return width, height, fps, colour == "mono"


def read_y4m(path, max_frames: Optional[int] = None) -> Video:
    with open(path, "rb") as fh:
        data = fh.read()
    nl = data.find(b"\n")
    if nl < 0:
        raise ParseError("y4m header is not terminated")
    width, height, fps, mono = _parse_header(data[:nl])
    cw, ch = (width + 1) // 2, (height + 1) // 2
    ysize, csize = width * height, 0 if mono else cw * ch
    frames = []
    pos = nl + 1
    while pos < len(data) and (max_frames is None or len(frames) < max_frames):
        end = data.find(b"\n", pos)
        if end < 0 or not data.startswith(b"FRAME", pos):
            raise ParseError(f"expected FRAME marker at byte {pos}")
        pos = end + 1
        if pos + ysize + 2 * csize > len(data):
            raise ParseError("truncated y4m frame")
        buf = np.frombuffer(data, np.uint8, ysize + 2 * csize, pos)
        pos += ysize + 2 * csize
        luma = buf[:ysize].reshape(height, width)
        if mono:
            frames.append(Frame(luma.copy(), index=len(frames)))
        else:
            cb = buf[ysize:ysize + csize].reshape(ch, cw)
            cr = buf[ysize + csize:].reshape(ch, cw)
            frames.append(Frame(luma.copy(), cb.copy(), cr.copy(), len(frames)))
    return Video(frames, fps=max(1, round(fps)), width=width, height=height, mono=mono)


def write_y4m(path, frames, fps: int = 30, mono: Optional[bool] = None) -> None:
    """Write frames as YUV4MPEG2; frames without chroma get neutral 128 chroma unless ``mono``."""
    if not frames:
        raise ValueError("nothing to write")
    first = frames[0]
    if mono is None:
        mono = False
    colour = "mono" if mono else "420jpeg"
    with open(path, "wb") as fh:
        fh.write(f"YUV4MPEG2 W{first.width} H{first.height} F{fps}:1 Ip A1:1 C{colour}\n".encode())
        for f in frames:
            fh.write(b"FRAME\n")
            fh.write(np.ascontiguousarray(f.luma).tobytes())
            if mono:
                continue
            if f.has_chroma:
                fh.write(np.ascontiguousarray(f.cb).tobytes())
                fh.write(np.ascontiguousarray(f.cr).tobytes())
            else:
                gray = np.full(((f.height + 1) // 2, (f.width + 1) // 2), 128, np.uint8)
                fh.write(gray.tobytes() * 2)


def read_raw(path, width: int, height: int, max_frames: Optional[int] = None, fps: int = 30) -> Video:
    """Planar 8-bit 4:2:0 frames with no headers."""
    if width <= 0 or height <= 0:
        raise GeometryError("raw input needs a positive width and height")
    cw, ch = (width + 1) // 2, (height + 1) // 2
    fsize = width * height + 2 * cw * ch
    size = os.path.getsize(path)
    if size == 0 or size % fsize:
        raise GeometryError(f"{path}: {size} bytes is not a whole number of {width}x{height} 4:2:0 frames")
    data = np.fromfile(path, dtype=np.uint8)
    count = size // fsize
    if max_frames is not None:
        count = min(count, max_frames)
    frames = []
    for i in range(count):
        buf = data[i * fsize:(i + 1) * fsize]
        luma = buf[:width * height].reshape(height, width)
        cb = buf[width * height:width * height + cw * ch].reshape(ch, cw)
        cr = buf[width * height + cw * ch:].reshape(ch, cw)
        frames.append(Frame(luma.copy(), cb.copy(), cr.copy(), i))
    return Video(frames, fps=fps, width=width, height=height)


def load_sequence(source: SequenceSource) -> Video:
    """Resolve a source into frames padded to whole macroblocks.

    The returned Video keeps the unpadded size so quality can be measured
    on the original picture area.
    """
    if source.kind == "y4m":
        video = read_y4m(source.path, source.frame_count)
    elif source.kind == "raw":
        video = read_raw(source.path, source.width, source.height, source.frame_count, source.fps)
    elif source.kind == "synthetic":
        from .synthetic import SyntheticSpec, generate_synthetic

        spec = SyntheticSpec(**(source.synthetic or {}))
        video = Video(generate_synthetic(spec), fps=source.fps)
    else:
        raise ValueError(f"unknown source kind {source.kind!r}")
    if not video.frames:
        raise ParseError("source contains no frames")
    video.frames = [pad_frame(f) for f in video.frames]
    return video
