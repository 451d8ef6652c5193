# =============================================================================
# A3T Desk - Interval Transfer Functions
# =============================================================================
"""
Per-layer interval arithmetic and its gradients.

Affine layers use the center/radius form: center' = W c + b and
radius' = |W| r, running the layer's own linear map so that a degenerate
box reproduces the concrete forward pass exactly. ReLU clamps both bounds.
"""

from functools import singledispatch
from typing import Any, Dict, Tuple

import numpy as np

from nn.layers import AffineLayer, Flatten, Layer, Mask, ReLU


class BoundError(ValueError):
    """Shape mismatch or non-finite bounds during propagation."""


@singledispatch
def transfer(layer: Layer, lower: np.ndarray, upper: np.ndarray, mask: Mask) -> Tuple[np.ndarray, np.ndarray, Any]:
    """Propagate a box through ``layer``; returns (lower', upper', cache)."""
    raise BoundError(f"no interval transfer for layer {layer!r}")


@singledispatch
def transfer_backward(
    layer: Layer,
    grad_lower: np.ndarray,
    grad_upper: np.ndarray,
    cache: Any,
    mask: Mask,
) -> Tuple[np.ndarray, np.ndarray, Dict[str, np.ndarray]]:
    """Gradients w.r.t. the input bounds and the layer parameters."""
    raise BoundError(f"no interval gradient for layer {layer!r}")


@transfer.register
def _(layer: AffineLayer, lower, upper, mask):
    center = (lower + upper) / 2
    radius = (upper - lower) / 2
    out_center = layer.linear(center, mask) + layer.bias_term(mask)
    out_radius = layer.linear(radius, mask, absolute=True)
    return out_center - out_radius, out_center + out_radius, (center, radius)


@transfer_backward.register
def _(layer: AffineLayer, grad_lower, grad_upper, cache, mask):
    center, radius = cache
    grad_center = grad_lower + grad_upper
    grad_radius = grad_upper - grad_lower

    grads = layer.param_grads(center, grad_center, mask)
    for name, value in layer.param_grads(radius, grad_radius, mask, absolute=True).items():
        grads[name] = grads[name] + value if name in grads else value

    in_center = layer.linear_transpose(grad_center, mask)
    in_radius = layer.linear_transpose(grad_radius, mask, absolute=True)
    return (in_center - in_radius) / 2, (in_center + in_radius) / 2, grads


@transfer.register
def _(layer: ReLU, lower, upper, mask):
    return np.maximum(lower, 0.0), np.maximum(upper, 0.0), (lower, upper)


@transfer_backward.register
def _(layer: ReLU, grad_lower, grad_upper, cache, mask):
    lower, upper = cache
    return grad_lower * (lower > 0), grad_upper * (upper > 0), {}


@transfer.register
def _(layer: Flatten, lower, upper, mask):
    n = lower.shape[0]
    return lower.reshape(n, -1), upper.reshape(n, -1), lower.shape


@transfer_backward.register
def _(layer: Flatten, grad_lower, grad_upper, cache, mask):
    return grad_lower.reshape(cache), grad_upper.reshape(cache), {}
