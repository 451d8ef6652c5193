# =============================================================================
# A3T Desk - Abstract Loss
# =============================================================================
"""
Worst-case logits and the abstract cross-entropy loss.

Within logit bounds, cross-entropy against y is maximised at the vertex that
takes the lower bound for y and the upper bound for every other class. The
abstract loss is the cross-entropy of that vertex; it upper-bounds the loss
of every concrete input inside the box.
"""

import logging
from typing import Dict, Optional, Tuple

import numpy as np

from abstraction.interval import IntervalTensor
from ibp.propagate import LogitBounds, backpropagate, propagate, propagate_batch
from nn.model import Model, cross_entropy, cross_entropy_grad

logger = logging.getLogger(__name__)


def worst_case_batch(lower: np.ndarray, upper: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Worst-case logits for each row of (n, classes) bounds."""
    logits = upper.copy()
    rows = np.arange(lower.shape[0])
    logits[rows, labels] = lower[rows, labels]
    return logits


def worst_case_logits(bounds: LogitBounds, label: int) -> np.ndarray:
    """Lower bound at ``label``, upper bound elsewhere."""
    return worst_case_batch(bounds.lower[None], bounds.upper[None], np.array([label]))[0]


def abstract_loss(model: Model, box: IntervalTensor, label: int) -> float:
    """Cross-entropy of the worst-case logits of ``box``."""
    logits = worst_case_logits(propagate(model, box), label)
    return float(cross_entropy(logits[None], np.array([label]))[0])


def abstract_losses(
    model: Model,
    lower: np.ndarray,
    upper: np.ndarray,
    mask: np.ndarray,
    labels: np.ndarray,
) -> np.ndarray:
    """Per-box abstract losses for a batch of boxes (n, max_len, d)."""
    out_lower, out_upper, _ = propagate_batch(model, lower, upper, mask)
    return cross_entropy(worst_case_batch(out_lower, out_upper, labels), labels)


def abstract_loss_and_grads(
    model: Model,
    lower: np.ndarray,
    upper: np.ndarray,
    mask: np.ndarray,
    labels: np.ndarray,
    weights: Optional[np.ndarray] = None,
) -> Tuple[float, Dict[str, np.ndarray], np.ndarray, np.ndarray]:
    """
    Weighted abstract loss and its gradients.

    Gradients reach every parameter through both bound paths; radius paths
    contribute sign(W)-masked weight gradients.

    Returns:
        (loss, parameter grads, grad w.r.t. lower box, grad w.r.t. upper box)
    """
    n = lower.shape[0]
    if weights is None:
        weights = np.full(n, 1.0 / n)
    weights = np.asarray(weights, dtype=lower.dtype)

    out_lower, out_upper, caches = propagate_batch(model, lower, upper, mask)
    logits = worst_case_batch(out_lower, out_upper, labels)
    loss = float(np.dot(weights, cross_entropy(logits, labels)))

    grad_logits = cross_entropy_grad(logits, labels) * weights[:, None]
    rows = np.arange(n)
    grad_lower = np.zeros_like(grad_logits)
    grad_lower[rows, labels] = grad_logits[rows, labels]
    grad_upper = grad_logits
    grad_upper[rows, labels] = 0.0

    grads: Dict[str, np.ndarray] = {}
    grad_box_lower, grad_box_upper = backpropagate(caches, grad_lower, grad_upper, grads)
    return loss, grads, grad_box_lower, grad_box_upper
