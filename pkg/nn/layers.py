# =============================================================================
# A3T Desk - Network Layers
# =============================================================================
"""
Layers of the convolutional text classifier, with exact manual gradients.

Every layer maps ``(x, mask)`` to its output; ``mask`` is the (n, L) 0/1
length mask while the tensor is still positional and None after Flatten.
Outputs at padded positions are forced to zero, which makes the logits
independent of how many pad tokens follow an example.

Affine layers (Conv1D, AvgPool1D, Linear) also expose their linear part and
its transpose so interval propagation can run the same arithmetic on the
center/radius form of a box.

Provides:
- Layer / AffineLayer: base classes
- Embedding, Conv1D, ReLU, AvgPool1D, Flatten, Linear
- LayerRegistry: kind name -> layer class (checkpoint reconstruction)
"""

import logging
from typing import Any, Dict, Optional, Tuple, Type

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

logger = logging.getLogger(__name__)

Mask = Optional[np.ndarray]


class ModelError(ValueError):
    """Inconsistent architecture or input shape."""


class Layer:
    """Base layer: stateless unless it owns parameters."""

    kind: str = "layer"

    def __init__(self):
        self.params: Dict[str, np.ndarray] = {}

    @property
    def trainable(self) -> bool:
        return bool(self.params)

    def forward(self, x: np.ndarray, mask: Mask) -> Tuple[np.ndarray, Any]:
        """Return the output and a cache for backward."""
        raise NotImplementedError

    def backward(self, grad: np.ndarray, cache: Any, mask: Mask) -> Tuple[Optional[np.ndarray], Dict[str, np.ndarray]]:
        """Return the input gradient and parameter gradients."""
        raise NotImplementedError

    def output_mask(self, mask: Mask) -> Mask:
        return mask

    def output_shape(self, shape: Tuple[int, ...]) -> Tuple[int, ...]:
        return shape

    def attrs(self) -> Dict[str, Any]:
        return {}

    def descriptor(self) -> Dict[str, Any]:
        return {"kind": self.kind, "attrs": self.attrs()}

    @classmethod
    def from_descriptor(cls, attrs: Dict[str, Any], params: Dict[str, np.ndarray]) -> "Layer":
        return cls(**attrs)

    def __repr__(self) -> str:
        attrs = ", ".join(f"{k}={v}" for k, v in self.attrs().items())
        return f"{type(self).__name__}({attrs})"


# =============================================================================
# Embedding
# =============================================================================

class Embedding(Layer):
    """Token ids -> vectors; padded positions embed to zero."""

    kind = "embedding"
    PAD_ID = 0

    def __init__(self, weight: np.ndarray, trainable: bool = True):
        super().__init__()
        if weight.ndim != 2:
            raise ModelError(f"embedding weight must be 2-D, got shape {weight.shape}")
        self.params["weight"] = weight
        self._trainable = trainable

    @property
    def trainable(self) -> bool:
        return self._trainable

    @property
    def weight(self) -> np.ndarray:
        return self.params["weight"]

    @property
    def dim(self) -> int:
        return self.weight.shape[1]

    def forward(self, ids, mask):
        return self.weight[ids] * mask[..., None], ids

    def backward(self, grad, cache, mask):
        if not self._trainable:
            return None, {}
        ids = cache
        grad_w = np.zeros_like(self.weight)
        np.add.at(grad_w, ids.reshape(-1), (grad * mask[..., None]).reshape(-1, self.dim))
        grad_w[self.PAD_ID] = 0.0
        return None, {"weight": grad_w}

    def output_shape(self, shape):
        return shape + (self.dim,)

    def attrs(self):
        return {"vocab_size": self.weight.shape[0], "dim": self.dim, "trainable": self._trainable}

    @classmethod
    def from_descriptor(cls, attrs, params):
        return cls(params["weight"], trainable=attrs.get("trainable", True))


# =============================================================================
# Affine Layers
# =============================================================================

class AffineLayer(Layer):
    """
    y = linear(x) + bias.

    ``absolute=True`` applies |W| instead of W (radius propagation).
    """

    def linear(self, x: np.ndarray, mask: Mask, absolute: bool = False) -> np.ndarray:
        raise NotImplementedError

    def linear_transpose(self, grad: np.ndarray, mask: Mask, absolute: bool = False) -> np.ndarray:
        raise NotImplementedError

    def bias_term(self, mask: Mask):
        return 0.0

    def param_grads(self, x: np.ndarray, grad: np.ndarray, mask: Mask, absolute: bool = False) -> Dict[str, np.ndarray]:
        """
        Gradients of <grad, linear(x) + bias> w.r.t. the parameters.

        With ``absolute`` the weights enter as |W|, so their gradient is
        masked by sign(W) and the bias does not appear.
        """
        return {}

    def forward(self, x, mask):
        return self.linear(x, mask) + self.bias_term(mask), x

    def backward(self, grad, cache, mask):
        return self.linear_transpose(grad, mask), self.param_grads(cache, grad, mask)


class Conv1D(AffineLayer):
    """
    1-D convolution over positions with ``kernels`` filters of ``width``.

    The input is right-padded with width - 1 zero rows so the output keeps
    the input length; outputs at padded positions are zeroed.
    """

    kind = "conv1d"

    def __init__(self, weight: np.ndarray, bias: np.ndarray):
        super().__init__()
        if weight.ndim != 3 or bias.shape != (weight.shape[0],):
            raise ModelError(f"conv weight {weight.shape} / bias {bias.shape} mismatch")
        self.params["weight"] = weight
        self.params["bias"] = bias

    @property
    def kernels(self) -> int:
        return self.params["weight"].shape[0]

    @property
    def width(self) -> int:
        return self.params["weight"].shape[1]

    @property
    def in_dim(self) -> int:
        return self.params["weight"].shape[2]

    def _windows(self, x: np.ndarray) -> np.ndarray:
        padded = np.pad(x, ((0, 0), (0, self.width - 1), (0, 0)))
        return sliding_window_view(padded, self.width, axis=1)

    def _weight(self, absolute: bool) -> np.ndarray:
        weight = self.params["weight"]
        return np.abs(weight) if absolute else weight

    def linear(self, x, mask, absolute=False):
        if x.ndim != 3 or x.shape[2] != self.in_dim:
            raise ModelError(f"conv expects (n, L, {self.in_dim}) input, got {x.shape}")
        out = np.einsum("ntcs,ksc->ntk", self._windows(x), self._weight(absolute), optimize=True)
        return out * mask[..., None]

    def bias_term(self, mask):
        return self.params["bias"][None, None, :] * mask[..., None]

    def linear_transpose(self, grad, mask, absolute=False):
        weight = self._weight(absolute)
        grad = grad * mask[..., None]
        n, length, _ = grad.shape
        out = np.zeros((n, length + self.width - 1, self.in_dim), dtype=grad.dtype)
        for s in range(self.width):
            out[:, s:s + length, :] += grad @ weight[:, s, :]
        return out[:, :length, :]

    def param_grads(self, x, grad, mask, absolute=False):
        grad = grad * mask[..., None]
        grad_w = np.einsum("ntcs,ntk->ksc", self._windows(x), grad, optimize=True)
        if absolute:
            return {"weight": grad_w * np.sign(self.params["weight"])}
        return {"weight": grad_w, "bias": grad.sum(axis=(0, 1))}

    def output_shape(self, shape):
        if len(shape) != 2 or shape[1] != self.in_dim:
            raise ModelError(f"conv expects (L, {self.in_dim}) input, got {shape}")
        return (shape[0], self.kernels)

    def attrs(self):
        return {"kernels": self.kernels, "width": self.width, "in_dim": self.in_dim}

    @classmethod
    def from_descriptor(cls, attrs, params):
        return cls(params["weight"], params["bias"])


class AvgPool1D(AffineLayer):
    """
    Non-overlapping average pooling over windows of ``window`` positions.

    Only real positions are averaged; a window without any is zero. The map
    is linear for a fixed mask, with non-negative weights.
    """

    kind = "avgpool1d"

    def __init__(self, window: int):
        super().__init__()
        if window < 1:
            raise ModelError(f"pool window must be positive, got {window}")
        self.window = window

    def _layout(self, length: int) -> Tuple[int, int]:
        windows = -(-length // self.window)
        return windows, windows * self.window - length

    def _denominator(self, mask: np.ndarray) -> np.ndarray:
        windows, pad = self._layout(mask.shape[1])
        counts = np.pad(mask, ((0, 0), (0, pad))).reshape(mask.shape[0], windows, self.window).sum(axis=2)
        return np.maximum(counts, 1.0)

    def linear(self, x, mask, absolute=False):
        n, length, channels = x.shape
        windows, pad = self._layout(length)
        summed = np.pad(x * mask[..., None], ((0, 0), (0, pad), (0, 0)))
        summed = summed.reshape(n, windows, self.window, channels).sum(axis=2)
        return summed / self._denominator(mask)[..., None]

    def linear_transpose(self, grad, mask, absolute=False):
        length = mask.shape[1]
        scaled = grad / self._denominator(mask)[..., None]
        return np.repeat(scaled, self.window, axis=1)[:, :length, :] * mask[..., None]

    def output_mask(self, mask):
        windows, pad = self._layout(mask.shape[1])
        padded = np.pad(mask, ((0, 0), (0, pad))).reshape(mask.shape[0], windows, self.window)
        return (padded.sum(axis=2) > 0).astype(mask.dtype)

    def output_shape(self, shape):
        return (self._layout(shape[0])[0], shape[1])

    def attrs(self):
        return {"window": self.window}


class Linear(AffineLayer):
    """Fully connected layer y = W x + b with W of shape (out, in)."""

    kind = "linear"

    def __init__(self, weight: np.ndarray, bias: np.ndarray):
        super().__init__()
        if weight.ndim != 2 or bias.shape != (weight.shape[0],):
            raise ModelError(f"linear weight {weight.shape} / bias {bias.shape} mismatch")
        self.params["weight"] = weight
        self.params["bias"] = bias

    @property
    def in_features(self) -> int:
        return self.params["weight"].shape[1]

    @property
    def out_features(self) -> int:
        return self.params["weight"].shape[0]

    def _weight(self, absolute: bool) -> np.ndarray:
        weight = self.params["weight"]
        return np.abs(weight) if absolute else weight

    def linear(self, x, mask, absolute=False):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ModelError(f"linear expects (n, {self.in_features}) input, got {x.shape}")
        return x @ self._weight(absolute).T

    def bias_term(self, mask):
        return self.params["bias"][None, :]

    def linear_transpose(self, grad, mask, absolute=False):
        return grad @ self._weight(absolute)

    def param_grads(self, x, grad, mask, absolute=False):
        grad_w = grad.T @ x
        if absolute:
            return {"weight": grad_w * np.sign(self.params["weight"])}
        return {"weight": grad_w, "bias": grad.sum(axis=0)}

    def output_shape(self, shape):
        if shape != (self.in_features,):
            raise ModelError(f"linear expects ({self.in_features},) input, got {shape}")
        return (self.out_features,)

    def attrs(self):
        return {"in_features": self.in_features, "out_features": self.out_features}

    @classmethod
    def from_descriptor(cls, attrs, params):
        return cls(params["weight"], params["bias"])


# =============================================================================
# Non-affine Layers
# =============================================================================

class ReLU(Layer):
    kind = "relu"

    def forward(self, x, mask):
        return np.maximum(x, 0.0), x

    def backward(self, grad, cache, mask):
        return grad * (cache > 0), {}


class Flatten(Layer):
    """(n, P, k) -> (n, P * k); positional masks end here."""

    kind = "flatten"

    def forward(self, x, mask):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, grad, cache, mask):
        return grad.reshape(cache), {}

    def output_mask(self, mask):
        return None

    def output_shape(self, shape):
        return (int(np.prod(shape)),)


# =============================================================================
# Registry
# =============================================================================

class LayerRegistry:
    """Layer kinds by name, for rebuilding models from descriptors."""

    _layers: Dict[str, Type[Layer]] = {}

    @classmethod
    def register(cls, layer_class: Type[Layer]) -> None:
        cls._layers[layer_class.kind] = layer_class
        logger.debug(f"Registered layer: {layer_class.kind}")

    @classmethod
    def get(cls, kind: str) -> Type[Layer]:
        if kind not in cls._layers:
            raise ModelError(f"unknown layer kind: {kind}")
        return cls._layers[kind]

    @classmethod
    def list_all(cls):
        return list(cls._layers.keys())


for _layer in (Embedding, Conv1D, ReLU, AvgPool1D, Flatten, Linear):
    LayerRegistry.register(_layer)
