"""Target position history and a constant-velocity Kalman filter."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import OrderingError

DEFAULT_Q = 0.1
DEFAULT_R = 2.0
DEFAULT_P0 = 10.0
DEFAULT_CAPACITY = 10


class PositionHistory:
    """FIFO of the last ``capacity`` accepted positions ``(frame, x, y)``."""

    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        if capacity < 1:
            raise ValueError("history capacity must be >= 1")
        self.capacity = capacity
        self.entries: deque[tuple[int, float, float]] = deque(maxlen=capacity)

    def push(self, frame: int, x: float, y: float) -> "PositionHistory":
        if self.entries and frame <= self.entries[-1][0]:
            raise OrderingError(f"frame {frame} pushed after frame {self.entries[-1][0]}")
        self.entries.append((frame, x, y))
        return self

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def last(self) -> tuple[int, float, float] | None:
        return self.entries[-1] if self.entries else None

    def is_plausible(self, frame: int, x: float, y: float, max_step: float) -> bool:
        """False when reaching ``(x, y)`` needs more than ``max_step`` px per frame."""
        if not self.entries:
            return True
        f0, x0, y0 = self.entries[-1]
        return math.hypot(x - x0, y - y0) <= max_step * max(frame - f0, 1)


def history_push(h: PositionHistory, frame: int, x: float, y: float) -> PositionHistory:
    return h.push(frame, x, y)


_F = np.array([[1.0, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 0], [0, 0, 0, 1]])
_H = np.array([[1.0, 0, 0, 0], [0, 1, 0, 0]])


@dataclass
class KalmanState:
    """State ``(x, y, vx, vy)``; velocities in pixels per frame."""

    x: np.ndarray
    P: np.ndarray
    q: float = DEFAULT_Q
    r: float = DEFAULT_R

    @classmethod
    def initial(cls, x: float, y: float, q: float = DEFAULT_Q, r: float = DEFAULT_R,
                p0: float = DEFAULT_P0, vx: float = 0.0, vy: float = 0.0) -> "KalmanState":
        return cls(np.array([x, y, vx, vy], dtype=np.float64), p0 * np.eye(4), q, r)

    @property
    def position(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[1])

    @property
    def velocity(self) -> tuple[float, float]:
        return float(self.x[2]), float(self.x[3])

    def copy(self) -> "KalmanState":
        return KalmanState(self.x.copy(), self.P.copy(), self.q, self.r)

    def predict(self) -> tuple[float, float]:
        """Advance one frame in place and return the predicted position."""
        self.x = _F @ self.x
        Q = np.diag([0.0, 0.0, self.q, self.q])
        self.P = _symmetrize(_F @ self.P @ _F.T + Q)
        return self.position

    def update(self, measurement) -> "KalmanState":
        z = np.asarray(measurement, dtype=np.float64)
        S = _H @ self.P @ _H.T + self.r * np.eye(2)
        K = np.linalg.solve(S, _H @ self.P).T
        self.x = self.x + K @ (z - _H @ self.x)
        # Joseph form keeps P positive semidefinite for tiny r
        I_KH = np.eye(4) - K @ _H
        self.P = _symmetrize(I_KH @ self.P @ I_KH.T + self.r * K @ K.T)
        return self


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def kalman_predict(s: KalmanState) -> tuple[tuple[float, float], KalmanState]:
    s = s.copy()
    return s.predict(), s


def kalman_update(s: KalmanState, measurement) -> KalmanState:
    return s.copy().update(measurement)
