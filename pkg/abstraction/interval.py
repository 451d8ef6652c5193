# =============================================================================
# A3T Desk - Interval Tensors
# =============================================================================
"""
Elementwise interval boxes: the abstract domain handed to bound propagation.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from config import settings

logger = logging.getLogger(__name__)


class AbstractionError(ValueError):
    """Invalid abstraction request (non length-preserving rule, bad box)."""


@dataclass(frozen=True)
class IntervalTensor:
    """
    Box ``lower <= v <= upper`` over an array shape.

    For embedding-space boxes of shape (rows, d), ``length`` is the number of
    real positions; rows beyond it are degenerate zero intervals.
    """
    lower: np.ndarray
    upper: np.ndarray
    length: Optional[int] = None

    def __post_init__(self):
        if self.lower.shape != self.upper.shape:
            raise AbstractionError(f"bound shapes differ: {self.lower.shape} vs {self.upper.shape}")
        if not (np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper))):
            raise AbstractionError("interval bounds must be finite")
        if np.any(self.lower > self.upper):
            raise AbstractionError("interval lower bound exceeds upper bound")
        if self.length is None:
            object.__setattr__(self, "length", self.lower.shape[0] if self.lower.ndim else 0)

    @classmethod
    def point(cls, value: np.ndarray) -> "IntervalTensor":
        """Degenerate box [v, v]."""
        value = np.asarray(value)
        return cls(value.copy(), value.copy())

    @property
    def shape(self):
        return self.lower.shape

    @property
    def center(self) -> np.ndarray:
        return (self.lower + self.upper) / 2

    @property
    def radius(self) -> np.ndarray:
        return (self.upper - self.lower) / 2

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def is_degenerate(self) -> bool:
        return bool(np.all(self.lower == self.upper))

    def truncate(self, max_len: int) -> "IntervalTensor":
        return IntervalTensor(self.lower[:max_len], self.upper[:max_len], min(self.length, max_len))

    def pad_to(self, max_len: int) -> "IntervalTensor":
        """Append zero rows up to ``max_len`` (truncating first if longer)."""
        box = self.truncate(max_len)
        missing = max_len - box.lower.shape[0]
        if missing <= 0:
            return box
        pad = ((0, missing),) + ((0, 0),) * (box.lower.ndim - 1)
        return IntervalTensor(np.pad(box.lower, pad), np.pad(box.upper, pad), box.length)

    def widened(self, amount: float) -> "IntervalTensor":
        return IntervalTensor(self.lower - amount, self.upper + amount, self.length)

    def to_dict(self) -> Dict:
        return {
            "length": self.length,
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
        }


def contains(box: IntervalTensor, point: np.ndarray, tolerance: Optional[float] = None) -> bool:
    """
    True iff ``lower - tol <= point <= upper + tol`` elementwise.

    Raises:
        AbstractionError: shape mismatch
    """
    point = np.asarray(point)
    if point.shape != box.shape:
        raise AbstractionError(f"point shape {point.shape} does not match box shape {box.shape}")
    tol = settings.CONTAINMENT_TOLERANCE if tolerance is None else tolerance
    return bool(np.all(box.lower - tol <= point) and np.all(point <= box.upper + tol))
