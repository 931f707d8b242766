"""Axis-aligned pixel rectangles and overlap measures."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigurationError


@dataclass(frozen=True)
class Rect:
    """Top-left corner ``(x, y)`` and extents ``(w, h)`` in pixels."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ConfigurationError(f"rectangle extents must be >= 1, got {self.w}x{self.h}")

    @classmethod
    def centered(cls, cx: int, cy: int, w: int, h: int) -> "Rect":
        return cls(cx - w // 2, cy - h // 2, w, h)

    @classmethod
    def parse(cls, text: str) -> "Rect":
        """Parse ``"X,Y,W,H"``."""
        parts = [int(v) for v in text.split(",")]
        if len(parts) != 4:
            raise ConfigurationError(f"expected X,Y,W,H, got {text!r}")
        return cls(*parts)

    @property
    def center(self) -> tuple[int, int]:
        return self.x + self.w // 2, self.y + self.h // 2

    @property
    def area(self) -> int:
        return self.w * self.h

    def inside(self, width: int, height: int) -> bool:
        return self.x >= 0 and self.y >= 0 and self.x + self.w <= width and self.y + self.h <= height

    def clamped(self, width: int, height: int) -> "Rect":
        """Shift (never resize) the rectangle into a ``width x height`` frame."""
        x = min(max(self.x, 0), max(width - self.w, 0))
        y = min(max(self.y, 0), max(height - self.h, 0))
        return Rect(x, y, self.w, self.h)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return self.x, self.y, self.w, self.h


def intersection_area(a: Rect, b: Rect) -> int:
    dx = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    dy = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    return max(dx, 0) * max(dy, 0)


def iou(a: Rect, b: Rect) -> float:
    inter = intersection_area(a, b)
    return inter / (a.area + b.area - inter)


def is_failure(reported: Rect, truth: Rect, threshold: float = 0.5) -> bool:
    """A frame fails when the overlap ratio drops below ``threshold``."""
    return iou(reported, truth) < threshold
