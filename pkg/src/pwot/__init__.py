"""RAM-based (WiSARD) object tracking with a hybrid pixel quantizer."""

from .geometry import Rect, iou, is_failure
from .grid import LayerSpec, LayoutSpec, preset
from .tracker import TrackerConfig, TrackResult, TrackState, init, step
from .wnn import Discriminator, InputMapping, ParallelDiscriminator, make_input_mapping

__version__ = "0.1.0"

__all__ = [
    "Discriminator",
    "InputMapping",
    "LayerSpec",
    "LayoutSpec",
    "ParallelDiscriminator",
    "Rect",
    "TrackResult",
    "TrackState",
    "TrackerConfig",
    "init",
    "iou",
    "is_failure",
    "make_input_mapping",
    "preset",
    "step",
]
