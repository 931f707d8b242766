"""Discriminator grid geometry: presets, layer lattices and ROI extents."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .geometry import Rect

PREDICTED = "predicted"
ANCHORS = (PREDICTED, "top1", "top2", "top3")


@dataclass(frozen=True)
class LayerSpec:
    rows: int
    cols: int
    sxp: int
    syp: int
    anchor: str = PREDICTED

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ConfigurationError("layer rows and cols must be >= 1")
        if self.sxp < 1 or self.syp < 1:
            raise ConfigurationError("layer spacing must be >= 1 pixel")
        if self.anchor not in ANCHORS:
            raise ConfigurationError(f"unknown anchor {self.anchor!r}; expected one of {ANCHORS}")

    @property
    def size(self) -> int:
        return self.rows * self.cols

    @property
    def top_rank(self) -> int | None:
        return None if self.anchor == PREDICTED else int(self.anchor[3:])


@dataclass(frozen=True)
class LayoutSpec:
    """Ordered layers; layer 0 is the coarse grid.

    ``predictor`` selects whether predicted-position anchors come from the
    Kalman filter or simply repeat the last accepted position.  ``colorspace``
    is the quantizer the preset was published with, if any.
    """

    name: str
    layers: tuple[LayerSpec, ...]
    predictor: bool = True
    colorspace: str | None = None

    def __post_init__(self):
        if not self.layers:
            raise ConfigurationError("a layout needs at least one layer")
        if self.layers[0].anchor != PREDICTED:
            raise ConfigurationError("the coarse layer must be anchored at the predicted position")

    @property
    def center_count(self) -> int:
        return sum(layer.size for layer in self.layers)

    @classmethod
    def from_dict(cls, data: dict) -> "LayoutSpec":
        layers = tuple(LayerSpec(**layer) for layer in data["layers"])
        return cls(data.get("name", "custom"), layers, data.get("predictor", True), data.get("colorspace"))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "predictor": self.predictor,
            "colorspace": self.colorspace,
            "layers": [
                {"rows": l.rows, "cols": l.cols, "sxp": l.sxp, "syp": l.syp, "anchor": l.anchor}
                for l in self.layers
            ],
        }


_GP = LayerSpec(20, 20, 5, 5)


def _dense(n: int, spacing: int, anchors=(PREDICTED,)) -> tuple[LayerSpec, ...]:
    return tuple(LayerSpec(n, n, spacing, spacing, a) for a in anchors)


PRESETS: dict[str, LayoutSpec] = {
    "GP1": LayoutSpec("GP1", (LayerSpec(12, 12, 2, 2),), predictor=False, colorspace="rgb"),
    "GP2": LayoutSpec("GP2", (LayerSpec(20, 20, 2, 2),), predictor=False, colorspace="rgb"),
    "GP3": LayoutSpec("GP3", (LayerSpec(30, 30, 2, 2),), predictor=False, colorspace="rgb"),
    "GP4": LayoutSpec("GP4", (_GP,), predictor=False, colorspace="rgb"),
    "GP5": LayoutSpec("GP5", (_GP,), colorspace="rgb"),
    "GP6": LayoutSpec("GP6", (_GP,) + _dense(10, 2), colorspace="rgb"),
    "GP7": LayoutSpec("GP7", (_GP,) + _dense(10, 2), colorspace="ycbcr"),
    "GP8": LayoutSpec("GP8", (_GP,) + _dense(10, 2)),
    "GP9": LayoutSpec("GP9", (_GP,) + _dense(5, 1)),
    "GP10": LayoutSpec("GP10", (_GP,) + _dense(10, 2, ANCHORS)),
    "GP11": LayoutSpec("GP11", (_GP,) + _dense(5, 1, ANCHORS)),
}


def preset(name: str) -> LayoutSpec:
    try:
        return PRESETS[name.upper()]
    except KeyError:
        raise ConfigurationError(f"unknown layout {name!r}; valid presets: {', '.join(PRESETS)}") from None


@dataclass(frozen=True, eq=False)
class CenterSet:
    """Search-region centres as an ``(n, 2)`` array of ``(x, y)``."""

    points: np.ndarray
    layer: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.layer is None:
            object.__setattr__(self, "layer", np.zeros(len(self.points), dtype=np.intp))

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def concat(cls, sets) -> "CenterSet":
        sets = list(sets)
        return cls(np.concatenate([s.points for s in sets]), np.concatenate([s.layer for s in sets]))


def instantiate_layer(layer: LayerSpec, anchor: tuple[int, int], layer_id: int = 0) -> CenterSet:
    """Row-major lattice whose centroid sits on ``anchor`` (floor on half pixels)."""
    ax, ay = anchor
    xs = ax - ((layer.cols - 1) * layer.sxp) // 2 + layer.sxp * np.arange(layer.cols)
    ys = ay - ((layer.rows - 1) * layer.syp) // 2 + layer.syp * np.arange(layer.rows)
    gx, gy = np.meshgrid(xs, ys)
    points = np.stack([gx.ravel(), gy.ravel()], axis=1).astype(np.int64)
    return CenterSet(points, np.full(len(points), layer_id, dtype=np.intp))


def roi_of(centers: CenterSet, slw_size: tuple[int, int]) -> Rect:
    """Bounding rectangle of all ``slw_size`` search regions."""
    if len(centers) == 0:
        raise ConfigurationError("cannot take the ROI of an empty centre set")
    w, h = slw_size
    x0 = int(centers.points[:, 0].min()) - w // 2
    y0 = int(centers.points[:, 1].min()) - h // 2
    x1 = int(centers.points[:, 0].max()) - w // 2 + w
    y1 = int(centers.points[:, 1].max()) - h // 2 + h
    return Rect(x0, y0, x1 - x0, y1 - y0)


def fit_to_frame(centers: CenterSet, slw_size: tuple[int, int], frame_size: tuple[int, int]) -> CenterSet:
    """Move centres so every search region lies in the frame.

    The lattice is shifted as a whole when it fits; on an axis where it is
    wider than the frame allows, centres are clamped individually.
    """
    w, h = slw_size
    fw, fh = frame_size
    lo = np.array([w // 2, h // 2])
    hi = np.array([fw - w + w // 2, fh - h + h // 2])
    if np.any(hi < lo):
        return CenterSet(np.empty((0, 2), dtype=np.int64), np.empty(0, dtype=np.intp))
    pts = centers.points.copy()
    for axis in (0, 1):
        pmin, pmax = pts[:, axis].min(), pts[:, axis].max()
        if pmax - pmin <= hi[axis] - lo[axis]:
            pts[:, axis] += max(lo[axis] - pmin, 0) + min(hi[axis] - pmax, 0)
        else:
            pts[:, axis] = np.clip(pts[:, axis], lo[axis], hi[axis])
    return CenterSet(pts, centers.layer)
