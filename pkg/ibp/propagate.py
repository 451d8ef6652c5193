# =============================================================================
# A3T Desk - Interval Bound Propagation
# =============================================================================
"""
Propagate embedding-space boxes through every layer after the embedding.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from abstraction.interval import IntervalTensor
from ibp.transfer import BoundError, transfer, transfer_backward
from nn.model import Model

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LogitBounds:
    """Per-class lower and upper logit bounds."""
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        if self.lower.shape != self.upper.shape:
            raise BoundError("logit bound shapes differ")

    def contains(self, logits: np.ndarray, tolerance: float = 1e-5) -> bool:
        return bool(np.all(self.lower - tolerance <= logits) and np.all(logits <= self.upper + tolerance))

    def certifies(self, label: int) -> bool:
        """True iff every logit vector in the bounds predicts ``label``."""
        others = np.delete(self.upper, label)
        return bool(others.size == 0 or self.lower[label] > others.max())

    def to_dict(self) -> Dict:
        return {"lower": self.lower.tolist(), "upper": self.upper.tolist()}


def _mask_for(model: Model, lower: np.ndarray, mask: np.ndarray) -> np.ndarray:
    expected = (lower.shape[0], model.max_len, model.embed_dim)
    if lower.shape != expected:
        raise BoundError(f"box shape {lower.shape}, expected {expected}")
    if mask.shape != expected[:2]:
        raise BoundError(f"mask shape {mask.shape}, expected {expected[:2]}")
    return mask.astype(lower.dtype)


def propagate_batch(
    model: Model,
    lower: np.ndarray,
    upper: np.ndarray,
    mask: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray, List]:
    """
    Propagate a batch of boxes of shape (n, max_len, d).

    Returns:
        (logit lower, logit upper, caches for backpropagate)

    Raises:
        BoundError: shape mismatch or non-finite bounds
    """
    mask = _mask_for(model, lower, mask)
    caches = []
    for layer in model.layers[1:]:
        out_lower, out_upper, cache = transfer(layer, lower, upper, mask)
        caches.append((layer, cache, mask))
        mask = layer.output_mask(mask)
        lower, upper = out_lower, out_upper
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise BoundError("non-finite logit bounds")
    return lower, upper, caches


def backpropagate(
    caches: List,
    grad_lower: np.ndarray,
    grad_upper: np.ndarray,
    grads: Dict[str, np.ndarray],
    offset: int = 1,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Backpropagate bound gradients, accumulating parameter gradients into
    ``grads`` under the model's parameter names.

    Returns:
        Gradients w.r.t. the input box (lower, upper)
    """
    for index in range(len(caches) - 1, -1, -1):
        layer, cache, mask = caches[index]
        grad_lower, grad_upper, layer_grads = transfer_backward(layer, grad_lower, grad_upper, cache, mask)
        if layer.trainable:
            for name, value in layer_grads.items():
                key = f"{index + offset}.{name}"
                grads[key] = grads[key] + value if key in grads else value
    return grad_lower, grad_upper


def propagate(model: Model, box: IntervalTensor) -> LogitBounds:
    """Bounds on the logits of every embedding in ``box`` (shape (len, d))."""
    box = box.pad_to(model.max_len)
    if box.lower.shape != (model.max_len, model.embed_dim):
        raise BoundError(f"box shape {box.lower.shape}, expected ({model.max_len}, {model.embed_dim})")
    mask = np.zeros((1, model.max_len), dtype=box.lower.dtype)
    mask[0, :box.length] = 1.0
    lower, upper, _ = propagate_batch(model, box.lower[None], box.upper[None], mask)
    return LogitBounds(lower[0], upper[0])
