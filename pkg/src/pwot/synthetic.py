"""Seeded synthetic sequences with ground-truth boxes.

A ship-like target (a full-width hull under a narrower superstructure) moves
along a piecewise-linear path over a noisy sea-coloured background.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .errors import ConfigurationError
from .geometry import Rect


@dataclass(frozen=True)
class SyntheticSpec:
    """Scene description.

    ``path`` holds keyframes ``(frame, x, y)`` for the target centre; the
    position is linearly interpolated between keyframes and held after the
    last one.  Repeating a position at consecutive keyframes with a new
    heading gives an instantaneous direction change.
    """

    frame_size: tuple[int, int] = (320, 240)
    frame_count: int = 60
    background_mean: tuple[float, float, float] = (40.0, 80.0, 140.0)
    background_std: tuple[float, float, float] = (6.0, 6.0, 6.0)
    target_mean: tuple[float, float, float] = (200.0, 190.0, 170.0)
    target_std: tuple[float, float, float] = (6.0, 6.0, 6.0)
    target_size: tuple[int, int] = (40, 20)
    path: tuple[tuple[float, float, float], ...] = ((0, 100, 120), (59, 218, 120))
    noise_std: float = 2.0
    shape: str = "ship"
    seed: int = 0

    def __post_init__(self):
        if self.frame_count < 1:
            raise ConfigurationError("frame_count must be >= 1")
        if min(self.background_std) < 0 or min(self.target_std) < 0 or self.noise_std < 0:
            raise ConfigurationError("standard deviations must be >= 0")
        if self.shape not in ("ship", "rect"):
            raise ConfigurationError(f"unknown target shape {self.shape!r}")
        if not self.path:
            raise ConfigurationError("path needs at least one keyframe")
        frames = [k[0] for k in self.path]
        if frames != sorted(frames):
            raise ConfigurationError("path keyframes must be in frame order")

    @classmethod
    def from_dict(cls, data: dict) -> "SyntheticSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown synthetic spec keys: {sorted(unknown)}")
        data = dict(data)
        for key in ("frame_size", "background_mean", "background_std", "target_mean", "target_std", "target_size"):
            if key in data:
                data[key] = tuple(data[key])
        if "path" in data:
            data["path"] = tuple(tuple(k) for k in data["path"])
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    def position(self, frame: int) -> tuple[int, int]:
        keys = self.path
        if frame <= keys[0][0]:
            x, y = keys[0][1], keys[0][2]
        elif frame >= keys[-1][0]:
            x, y = keys[-1][1], keys[-1][2]
        else:
            # last keyframe at or before `frame`, so duplicates switch heading at once
            i = max(j for j, k in enumerate(keys) if k[0] <= frame)
            (f0, x0, y0), (f1, x1, y1) = keys[i], keys[i + 1]
            t = (frame - f0) / (f1 - f0)
            x, y = x0 + t * (x1 - x0), y0 + t * (y1 - y0)
        return math.floor(x + 0.5), math.floor(y + 0.5)

    def truth(self, frame: int) -> Rect:
        cx, cy = self.position(frame)
        return Rect.centered(cx, cy, *self.target_size)


def target_mask(w: int, h: int, shape: str = "ship") -> np.ndarray:
    mask = np.ones((h, w), dtype=bool)
    if shape == "ship":
        deck = int(round(0.4 * h))
        mask[:deck, :] = False
        mask[:deck, w // 4:w - w // 4] = True
    return mask


def generate_synthetic_sequence(spec: SyntheticSpec) -> tuple[list[np.ndarray], list[Rect]]:
    """Frames as ``(h, w, 3)`` uint8 arrays plus one truth box per frame."""
    fw, fh = spec.frame_size
    truths = [spec.truth(i) for i in range(spec.frame_count)]
    for i, box in enumerate(truths):
        if not box.inside(fw, fh):
            raise ConfigurationError(f"target leaves the frame at frame {i}: {box.as_tuple()}")
    rng = np.random.default_rng(spec.seed)
    tw, th = spec.target_size
    mask = target_mask(tw, th, spec.shape)
    bg_mean, bg_std = np.asarray(spec.background_mean), np.asarray(spec.background_std)
    tg_mean, tg_std = np.asarray(spec.target_mean), np.asarray(spec.target_std)
    frames = []
    for box in truths:
        img = bg_mean + bg_std * rng.standard_normal((fh, fw, 3))
        patch = img[box.y:box.y + th, box.x:box.x + tw]
        patch[mask] = tg_mean + tg_std * rng.standard_normal((int(mask.sum()), 3))
        if spec.noise_std > 0:
            img += spec.noise_std * rng.standard_normal(img.shape)
        frames.append(np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8))
    return frames, truths


SCENES: dict[str, SyntheticSpec] = {
    "easy": SyntheticSpec(),
    # the easy path without any pixel noise: every frame quantizes exactly
    "clean": SyntheticSpec(background_std=(0.0, 0.0, 0.0), target_std=(0.0, 0.0, 0.0), noise_std=0.0),
    # target and sea colours overlap heavily; the quantizer mislabels sea pixels
    "low-contrast": SyntheticSpec(
        background_mean=(70.0, 95.0, 120.0),
        background_std=(9.0, 9.0, 9.0),
        target_mean=(95.0, 108.0, 118.0),
        target_std=(9.0, 9.0, 9.0),
    ),
    # instantaneous 127 degree turn at mid-sequence, 4 px/frame throughout
    "maneuver": SyntheticSpec(
        frame_count=50,
        path=((0, 80, 100), (24, 176, 100), (49, 116, 180)),
    ),
}


def scene(name: str, seed: int | None = None, **overrides) -> SyntheticSpec:
    try:
        spec = SCENES[name]
    except KeyError:
        raise ConfigurationError(f"unknown scene {name!r}; valid scenes: {', '.join(SCENES)}") from None
    if seed is not None:
        overrides["seed"] = seed
    return replace(spec, **overrides) if overrides else spec
