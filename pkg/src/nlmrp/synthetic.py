"""Deterministic synthetic test sequences.

``translating_texture``
    A seeded i.i.d. noise texture rolled by ``(dx, dy)`` whole samples per
    frame with wraparound.  Motion compensation is exact away from the
    wrapped border, so refinement has nothing to add.
``occlusion``
    A rigid textured square sliding over a static, self-similar background,
    plus optional temporal sensor noise.
``illumination_ramp``
    The self-similar background under a global gain that changes every
    frame, plus optional temporal sensor noise.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .frame import Frame

KINDS = ("translating_texture", "occlusion", "illumination_ramp")

# unset motion/noise fields fall back to these per-kind values
_DEFAULTS = {
    "translating_texture": {"dx": 1, "dy": 0, "noise": 0.0},
    "occlusion": {"dx": 2, "dy": 1, "noise": 2.0},
    "illumination_ramp": {"dx": 0, "dy": 0, "noise": 2.0},
}


@dataclass(frozen=True)
class SyntheticSpec:
    kind: str = "occlusion"
    seed: int = 0
    size: int = 64
    frames: int = 30
    dx: Optional[int] = None
    dy: Optional[int] = None
    noise: Optional[float] = None
    fg_size: int = 24
    gain_step: float = 0.02

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown synthetic kind {self.kind!r}; choose from {KINDS}")
        for key, value in _DEFAULTS[self.kind].items():
            if getattr(self, key) is None:
                object.__setattr__(self, key, value)
        if self.size < 16 or self.frames < 1:
            raise ValueError("size must be >= 16 and frames >= 1")
        if self.kind == "occlusion" and not 0 < self.fg_size < self.size:
            raise ValueError("fg_size must be smaller than the frame")
        if self.noise < 0:
            raise ValueError("noise must be non-negative")

    def describe(self) -> str:
        return ",".join([self.kind] + [f"{k}={v}" for k, v in asdict(self).items() if k != "kind"])

    @classmethod
    def parse(cls, text: str) -> "SyntheticSpec":
        """Parse ``kind[,key=value,...]``, e.g. ``occlusion,size=64,frames=30,seed=3``."""
        kind, *items = [t.strip() for t in text.split(",") if t.strip()]
        kwargs: dict = {}
        for item in items:
            key, sep, value = item.partition("=")
            if not sep or key not in cls.__dataclass_fields__ or key == "kind":
                raise ValueError(f"bad synthetic spec item {item!r}")
            kwargs[key] = float(value) if key in ("noise", "gain_step") else int(value)
        return cls(kind, **kwargs)


def noise_texture(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.integers(0, 256, (size, size)).astype(np.float64)


def background(rng: np.random.Generator, size: int) -> np.ndarray:
    """Periodic background: a random 8x8 tile, smoothed, repeated over the frame."""
    tile = rng.integers(0, 256, (8, 8)).astype(np.float64)
    reps = -(-size // 8) + 2
    big = np.tile(tile, (reps, reps))
    k = np.array([1.0, 2.0, 1.0]) / 4.0
    big = np.apply_along_axis(lambda r: np.convolve(r, k, mode="same"), 1, big)
    big = np.apply_along_axis(lambda c: np.convolve(c, k, mode="same"), 0, big)
    return 40.0 + 0.6 * big[8:8 + size, 8:8 + size]


def foreground_position(spec: SyntheticSpec, t: int) -> tuple[int, int]:
    """Top-left ``(x, y)`` of the occluding square in frame ``t`` (wraps around)."""
    return (spec.size // 4 + spec.dx * t) % spec.size, (spec.size // 4 + spec.dy * t) % spec.size


def foreground_mask(spec: SyntheticSpec, t: int) -> np.ndarray:
    x, y = foreground_position(spec, t)
    rows = (np.arange(spec.size) - y) % spec.size < spec.fg_size
    cols = (np.arange(spec.size) - x) % spec.size < spec.fg_size
    return rows[:, None] & cols[None, :]


def _quantize(img: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)


def generate_synthetic(spec: SyntheticSpec) -> list[Frame]:
    rng = np.random.default_rng(spec.seed)
    frames = []
    if spec.kind == "translating_texture":
        tex = noise_texture(rng, spec.size)
        for t in range(spec.frames):
            img = np.roll(tex, (spec.dy * t, spec.dx * t), axis=(0, 1))
            frames.append(img)
    elif spec.kind == "occlusion":
        bg = background(rng, spec.size)
        fg_tex = noise_texture(rng, spec.fg_size)
        for t in range(spec.frames):
            x, y = foreground_position(spec, t)
            fg = np.zeros((spec.size, spec.size))
            fg[:spec.fg_size, :spec.fg_size] = fg_tex
            fg = np.roll(fg, (y, x), axis=(0, 1))
            frames.append(np.where(foreground_mask(spec, t), fg, bg))
    else:
        bg = background(rng, spec.size)
        for t in range(spec.frames):
            frames.append(bg * (1.0 + spec.gain_step * t))

    out = []
    noise_rng = np.random.default_rng([spec.seed, 1])
    for t, img in enumerate(frames):
        if spec.noise:
            img = img + noise_rng.normal(0.0, spec.noise, img.shape)
        out.append(Frame(_quantize(img), index=t))
    return out
