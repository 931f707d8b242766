"""Reading and writing frame sequences (binary PPM or PNG)."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import EmptyInputError, FrameSizeMismatchError, UnreadableFrameError
from .geometry import Rect

FRAME_SUFFIXES = (".ppm", ".png")


def read_frame(path: str | Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise UnreadableFrameError(f"cannot decode frame {path}: {exc}") from exc


def write_frame(path: str | Path, frame: np.ndarray) -> None:
    Image.fromarray(np.asarray(frame, dtype=np.uint8), "RGB").save(path)


def load_frame_sequence(directory: str | Path) -> list[np.ndarray]:
    """Decode every PPM/PNG file in ``directory`` in lexicographic name order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise EmptyInputError(f"frame directory {directory} does not exist")
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() in FRAME_SUFFIXES)
    if not files:
        raise EmptyInputError(f"no .ppm or .png frames in {directory}")
    frames = []
    for path in files:
        frame = read_frame(path)
        if frames and frame.shape != frames[0].shape:
            raise FrameSizeMismatchError(
                f"{path.name} is {frame.shape[1]}x{frame.shape[0]} but "
                f"{files[0].name} is {frames[0].shape[1]}x{frames[0].shape[0]}"
            )
        frames.append(frame)
    return frames


def save_frame_sequence(directory: str | Path, frames, suffix: str = ".ppm") -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(len(frames))))
    paths = []
    for i, frame in enumerate(frames):
        path = directory / f"frame_{i:0{width}d}{suffix}"
        write_frame(path, frame)
        paths.append(path)
    return paths


def write_truth(path: str | Path, boxes) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "x", "y", "w", "h"])
        for i, box in enumerate(boxes, start=1):
            writer.writerow([i, *box.as_tuple()])


def read_truth(path: str | Path) -> list[Rect]:
    with open(path, newline="") as fh:
        return [Rect(int(r["x"]), int(r["y"]), int(r["w"]), int(r["h"])) for r in csv.DictReader(fh)]


def draw_box(frame: np.ndarray, box: Rect, color=(255, 0, 0)) -> np.ndarray:
    """Copy of ``frame`` with a 1-pixel rectangle outline."""
    out = np.array(frame, copy=True)
    h, w = out.shape[:2]
    x0, y0 = max(box.x, 0), max(box.y, 0)
    x1, y1 = min(box.x + box.w - 1, w - 1), min(box.y + box.h - 1, h - 1)
    out[y0, x0:x1 + 1] = color
    out[y1, x0:x1 + 1] = color
    out[y0:y1 + 1, x0] = color
    out[y0:y1 + 1, x1] = color
    return out
