"""Frame-by-frame tracking with a grid of identically trained discriminators.

Every discriminator in the grid is trained on the same quantized selection
window.  The coarse layer keeps one RAM copy per discriminator for the whole
run; the discriminators of denser layers are instantiated and trained anew
every frame at their anchors, so their RAM cost is paid per frame.  Each frame the grid is laid out around the predicted position, the
best response wins, and the winner is accepted only when its lead over the
runner-up (the confidence) is large enough.
"""

from __future__ import annotations

import hashlib
import math
import time
import warnings
from dataclasses import dataclass, field, fields, asdict
from typing import Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import quantizer as qz
from .errors import ConfigurationError, DimensionError, TrackingLostError
from .geometry import Rect, iou, is_failure  # noqa: F401  (re-exported)
from .grid import CenterSet, LayoutSpec, fit_to_frame, instantiate_layer, preset, roi_of
from .predictor import DEFAULT_CAPACITY, DEFAULT_P0, DEFAULT_Q, DEFAULT_R, KalmanState, PositionHistory
from .rng import derive_seed
from .wnn import (
    MAX_NODE_SIZE,
    Discriminator,
    ParallelDiscriminator,
    check_node_size,
    footprint_of,
    make_input_mapping,
    partition_central_peripheral,
)

# 3 GiB of RAM-node storage
DEFAULT_MEMORY_BUDGET_BITS = 3 << 33


@dataclass
class TrackerConfig:
    layout: Union[str, LayoutSpec] = "GP5"
    node_size: int = 3
    parallel: bool = False
    central_fraction: float = 0.4
    inner_node_size: int = 3
    outer_node_size: int = 15
    # None: the layout's published quantizer, falling back to YCbCr
    colorspace: str | None = None
    c_min: float = 0.05
    seed: int = 0
    q: float = DEFAULT_Q
    r: float = DEFAULT_R
    p0: float = DEFAULT_P0
    history: int = DEFAULT_CAPACITY
    plausibility: float = 3.0
    threshold_scale: tuple[float, float, float] = (1.0, 1.0, 1.0)
    max_node_size: int = MAX_NODE_SIZE
    memory_budget_bits: int = DEFAULT_MEMORY_BUDGET_BITS

    def __post_init__(self):
        if not 0.0 <= self.c_min < 1.0:
            raise ConfigurationError(f"c_min must be in [0, 1), got {self.c_min}")
        for n in (self.node_size, self.inner_node_size, self.outer_node_size):
            check_node_size(n, self.max_node_size)
        if self.colorspace is not None and self.colorspace not in qz.COLORSPACES:
            raise ConfigurationError(f"unknown colorspace {self.colorspace!r}")
        if isinstance(self.layout, dict):
            self.layout = LayoutSpec.from_dict(self.layout)
        self.threshold_scale = tuple(float(v) for v in self.threshold_scale)

    @property
    def layout_spec(self) -> LayoutSpec:
        return self.layout if isinstance(self.layout, LayoutSpec) else preset(self.layout)

    @property
    def resolved_colorspace(self) -> str:
        return self.colorspace or self.layout_spec.colorspace or qz.YCBCR

    @classmethod
    def from_dict(cls, data: dict) -> "TrackerConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown tracker config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["layout"] = self.layout.to_dict() if isinstance(self.layout, LayoutSpec) else self.layout
        d["threshold_scale"] = list(self.threshold_scale)
        return d


@dataclass
class TrackResult:
    frame: int
    box: Rect
    r1: int
    r2: int
    confidence: float | None
    low_confidence: bool
    winner: tuple[int, int]
    prediction: tuple[float, float]
    layer_winners: list[tuple[int, int]] = field(default_factory=list)
    wall_time: float = 0.0


@dataclass
class TrackState:
    config: TrackerConfig
    layout: LayoutSpec
    thresholds: qz.ThresholdSet
    slw: Rect
    pattern: np.ndarray
    model: Union[Discriminator, ParallelDiscriminator]
    anchor: tuple[int, int]
    kalman: KalmanState
    history: PositionHistory
    frame_size: tuple[int, int]
    frame_index: int = 0

    @property
    def slw_size(self) -> tuple[int, int]:
        return self.slw.w, self.slw.h

    @property
    def node_count(self) -> int:
        return self.model.node_count

    def digest(self) -> str:
        """Hash of everything that determines future tracking output."""
        h = hashlib.sha256()
        memories = [self.model.memory] if isinstance(self.model, Discriminator) else [
            d.memory for d in (self.model.inner, self.model.outer) if d is not None
        ]
        for arr in [self.pattern, *memories, self.kalman.x, self.kalman.P,
                    self.thresholds.lower, self.thresholds.upper]:
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update(repr((self.anchor, self.frame_index, self.slw, list(self.history.entries))).encode())
        return h.hexdigest()


def confidence(responses) -> float | None:
    """Relative lead of the best response over the second best.

    ``None`` when the best response is 0.
    """
    values = np.asarray(responses)
    if values.size < 2:
        raise ValueError("confidence needs at least two responses")
    top2 = np.partition(values, -2)[-2:]
    r2, r1 = float(top2[0]), float(top2[1])
    if r1 <= 0:
        return None
    return (r1 - r2) / r1


def _round(v: float) -> int:
    return int(math.floor(v + 0.5))


def make_thresholds(frame: np.ndarray, slw: Rect, config: TrackerConfig) -> qz.ThresholdSet:
    points = qz.prewitt_border_points(frame, slw)
    bands = qz.sample_bands(frame, slw, points)
    if config.resolved_colorspace == qz.RGB:
        t = qz.thresholds_rgb(bands.pf, bands.pw)
    else:
        t = qz.thresholds_ycbcr(qz.channel_stats(bands.pf, qz.YCBCR))
    if config.threshold_scale != (1.0, 1.0, 1.0):
        t = t.widened(config.threshold_scale)
    return t


def model_footprint(config: TrackerConfig, slw: Rect) -> int:
    """Bits of RAM the discriminator grid for ``slw`` will occupy.

    Counts one discriminator per centre of every layer: the coarse ones live
    for the whole run, the dense ones for one frame.
    """
    copies = config.layout_spec.center_count
    if not config.parallel:
        return footprint_of(slw.area, config.node_size, copies)
    inner, outer = partition_central_peripheral((slw.w, slw.h), config.central_fraction)
    return sum(
        footprint_of(idx.size, n, copies)
        for idx, n in ((inner, config.inner_node_size), (outer, config.outer_node_size))
        if idx.size
    )


def _build_model(config: TrackerConfig, slw: Rect):
    copies = config.layout_spec.layers[0].size
    need = model_footprint(config, slw)
    if need > config.memory_budget_bits:
        raise ConfigurationError(
            f"discriminator grid needs {need} bits of RAM, above the budget of {config.memory_budget_bits}"
        )
    seed = derive_seed(config.seed, slw.w, slw.h)
    if config.parallel:
        return ParallelDiscriminator(
            (slw.w, slw.h), config.central_fraction, config.inner_node_size,
            config.outer_node_size, seed, config.max_node_size, copies,
        )
    mapping = make_input_mapping(slw.area, config.node_size, seed, config.max_node_size)
    return Discriminator(mapping, copies)


def _train(model, pattern: np.ndarray):
    return model.train(pattern if isinstance(model, ParallelDiscriminator) else pattern.ravel())


def init(frame: np.ndarray, slw: Rect, config: TrackerConfig | None = None) -> TrackState:
    """Quantize the selection window and train the discriminator template."""
    config = config or TrackerConfig()
    frame = np.asarray(frame)
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise DimensionError(f"expected an (h, w, 3) frame, got shape {frame.shape}")
    if slw.area < config.node_size:
        raise ConfigurationError(f"selection window area {slw.area} is smaller than the node size")
    thresholds = make_thresholds(frame, slw, config)
    pattern = qz.quantize_region(frame, slw, thresholds)
    if pattern.all() or not pattern.any():
        warnings.warn("training pattern is uniform; the target model is uninformative", RuntimeWarning)
    model = _train(_build_model(config, slw), pattern)
    cx, cy = slw.center
    history = PositionHistory(config.history)
    history.push(0, cx, cy)
    return TrackState(
        config=config,
        layout=config.layout_spec,
        thresholds=thresholds,
        slw=slw,
        pattern=pattern,
        model=model,
        anchor=(cx, cy),
        kalman=KalmanState.initial(cx, cy, config.q, config.r, config.p0),
        history=history,
        frame_size=(frame.shape[1], frame.shape[0]),
    )


class _Evaluator:
    """Responses of search regions within one frame, memoised per centre."""

    def __init__(self, state: TrackState, frame: np.ndarray, corruption: qz.CorruptionSpec | None):
        self.state = state
        self.frame = frame
        self.corruption = corruption
        self.responses: dict[tuple[int, int], int] = {}
        self.order: list[tuple[int, int]] = []
        self._pass = 0

    def evaluate(self, centers: CenterSet, model, slots: np.ndarray) -> None:
        new, new_slots = [], []
        for (x, y), slot in zip(centers.points.tolist(), slots.tolist()):
            key = (x, y)
            if key not in self.responses:
                self.responses[key] = -1
                new.append(key)
                new_slots.append(slot)
        if not new:
            return
        st = self.state
        w, h = st.slw_size
        pts = CenterSet(np.asarray(new, dtype=np.int64))
        roi = roi_of(pts, (w, h))
        bits = qz.quantize_region(self.frame, roi, st.thresholds)
        windows = sliding_window_view(bits, (h, w))
        ox = pts.points[:, 0] - w // 2 - roi.x
        oy = pts.points[:, 1] - h // 2 - roi.y
        patterns = windows[oy, ox].reshape(len(new), -1)
        if self.corruption is not None and self.corruption.flip_fraction > 0:
            rng = np.random.default_rng([self.corruption.seed, st.frame_index, self._pass])
            patterns = qz.corrupt_rows(patterns, self.corruption.flip_fraction, rng)
        self._pass += 1
        if isinstance(model, ParallelDiscriminator):
            patterns = patterns.reshape(len(new), h, w)
        values = model.respond_many(patterns, np.asarray(new_slots))
        for key, v in zip(new, values.tolist()):
            self.responses[key] = v
            self.order.append(key)

    def ranked(self, keys, prediction) -> list[tuple[int, int]]:
        px, py = prediction

        def rank(k):
            return (-self.responses[k], (k[0] - px) ** 2 + (k[1] - py) ** 2, k[1], k[0])

        return sorted(set(keys), key=rank)


def step(state: TrackState, frame: np.ndarray, corruption: qz.CorruptionSpec | None = None):
    """Locate the target in ``frame``; returns ``(state, TrackResult)``.

    ``corruption`` flips quantized bits of every search region independently
    before the discriminators see them.
    """
    t0 = time.perf_counter()
    frame = np.asarray(frame)
    if (frame.shape[1], frame.shape[0]) != state.frame_size or frame.ndim != 3:
        raise DimensionError(f"frame shape {frame.shape} does not match the first frame {state.frame_size}")
    cfg, layout = state.config, state.layout
    state.frame_index += 1
    if layout.predictor:
        prediction = state.kalman.predict()
    else:
        prediction = tuple(float(v) for v in state.anchor)
    anchor = (_round(prediction[0]), _round(prediction[1]))

    ev = _Evaluator(state, frame, corruption)
    layer_sets: list[CenterSet | None] = [None] * len(layout.layers)

    # dense-layer discriminators exist for this frame only, one per centre
    offsets = np.cumsum([0] + [l.size for l in layout.layers[1:]])
    dense = _train(state.model.blank(int(offsets[-1])), state.pattern) if len(layout.layers) > 1 else None

    def place(i: int, point: tuple[int, int]) -> None:
        centers = fit_to_frame(instantiate_layer(layout.layers[i], point, i), state.slw_size, state.frame_size)
        layer_sets[i] = centers
        if i == 0:
            ev.evaluate(centers, state.model, np.arange(len(centers)))
        else:
            ev.evaluate(centers, dense, offsets[i - 1] + np.arange(len(centers)))

    for i, layer in enumerate(layout.layers):
        if layer.top_rank is None:
            place(i, anchor)
    if any(l.top_rank is not None for l in layout.layers):
        coarse = ev.ranked(map(tuple, layer_sets[0].points.tolist()), prediction)
        for i, layer in enumerate(layout.layers):
            if layer.top_rank is not None and coarse:
                place(i, coarse[min(layer.top_rank, len(coarse)) - 1])

    if not ev.responses:
        raise TrackingLostError("no search region fits inside the frame")
    ranked = ev.ranked(ev.responses, prediction)
    winner = ranked[0]
    r1 = ev.responses[winner]
    r2 = ev.responses[ranked[1]] if len(ranked) > 1 else 0
    c = confidence([r1, r2]) if len(ranked) > 1 else None
    accepted = c is not None and c >= cfg.c_min
    if accepted:
        max_step = cfg.plausibility * math.hypot(*state.slw_size)
        accepted = state.history.is_plausible(state.frame_index, winner[0], winner[1], max_step)

    w, h = state.slw_size
    if accepted:
        state.history.push(state.frame_index, *winner)
        state.kalman.update(winner)
        state.anchor = winner
        cx, cy = winner
    else:
        cx, cy = anchor
    box = Rect.centered(cx, cy, w, h).clamped(*state.frame_size)

    layer_winners = []
    for centers in layer_sets:
        if centers is not None and len(centers):
            layer_winners.append(ev.ranked(map(tuple, centers.points.tolist()), prediction)[0])
    result = TrackResult(
        frame=state.frame_index,
        box=box,
        r1=int(r1),
        r2=int(r2),
        confidence=c,
        low_confidence=not accepted,
        winner=winner,
        prediction=prediction,
        layer_winners=layer_winners,
        wall_time=time.perf_counter() - t0,
    )
    return state, result
