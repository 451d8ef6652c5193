# =============================================================================
# A3T Desk - Model
# =============================================================================
"""
Convolutional text classifier: embedding -> conv -> ReLU -> average pooling
-> flatten -> [linear -> ReLU]* -> linear.

Provides:
- Model: forward pass and exact loss gradients
- cross_entropy / cross_entropy_grad
- ModelConfig and architecture presets (desk, ag-char, sst2-word, sst2-char)
- build_model: initialise a model from a config
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from nn.layers import AffineLayer, AvgPool1D, Conv1D, Embedding, Flatten, Layer, Linear, ModelError, ReLU

logger = logging.getLogger(__name__)


# =============================================================================
# Loss
# =============================================================================

def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-example softmax cross-entropy."""
    logp = log_softmax(logits)
    return -logp[np.arange(logits.shape[0]), labels]


def cross_entropy_grad(logits: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-example gradient of cross-entropy w.r.t. the logits."""
    grad = np.exp(log_softmax(logits))
    grad[np.arange(logits.shape[0]), labels] -= 1.0
    return grad


# =============================================================================
# Model
# =============================================================================

class Model:
    """
    Ordered layers with named parameters ``"<index>.<name>"``.

    The first layer is the embedding and the second an affine layer, so
    perturbation boxes can be formed in embedding space and propagated from
    there on.
    """

    def __init__(self, layers: Sequence[Layer], max_len: int, num_classes: int, config: Optional["ModelConfig"] = None):
        self.layers: List[Layer] = list(layers)
        self.max_len = max_len
        self.num_classes = num_classes
        self.config = config
        self._validate()

    def _validate(self) -> None:
        if len(self.layers) < 2 or not isinstance(self.layers[0], Embedding):
            raise ModelError("first layer must be an Embedding")
        if not isinstance(self.layers[1], AffineLayer):
            raise ModelError("the layer after the embedding must be affine")
        if not isinstance(self.layers[-1], Linear):
            raise ModelError("last layer must be Linear")
        shape: Tuple[int, ...] = (self.max_len,)
        for layer in self.layers:
            shape = layer.output_shape(shape)
        if shape != (self.num_classes,):
            raise ModelError(f"model outputs {shape}, expected ({self.num_classes},)")

    @property
    def embedding(self) -> Embedding:
        return self.layers[0]

    @property
    def embed_dim(self) -> int:
        return self.embedding.dim

    # =========================================================================
    # Parameters
    # =========================================================================

    def params(self) -> Dict[str, np.ndarray]:
        """All parameters by name (arrays are shared, not copied)."""
        return {f"{i}.{name}": value for i, layer in enumerate(self.layers) for name, value in layer.params.items()}

    def trainable_params(self) -> Dict[str, np.ndarray]:
        return {
            f"{i}.{name}": value
            for i, layer in enumerate(self.layers) if layer.trainable
            for name, value in layer.params.items()
        }

    def set_params(self, values: Dict[str, np.ndarray]) -> None:
        """Copy values into the parameters in place."""
        params = self.params()
        for name, value in values.items():
            if name not in params:
                raise ModelError(f"unknown parameter: {name}")
            if params[name].shape != value.shape:
                raise ModelError(f"parameter {name}: shape {value.shape}, expected {params[name].shape}")
            params[name][...] = value

    def snapshot(self) -> Dict[str, np.ndarray]:
        return {name: value.copy() for name, value in self.params().items()}

    def num_params(self) -> int:
        return sum(value.size for value in self.params().values())

    @property
    def dtype(self):
        return self.embedding.weight.dtype

    # =========================================================================
    # Forward / backward
    # =========================================================================

    def _check_batch(self, ids: np.ndarray, mask: np.ndarray) -> None:
        if ids.ndim != 2 or ids.shape[1] != self.max_len or mask.shape != ids.shape:
            raise ModelError(f"expected ids and mask of shape (n, {self.max_len}), got {ids.shape} / {mask.shape}")

    def embed(self, ids: np.ndarray, mask: np.ndarray) -> np.ndarray:
        self._check_batch(ids, mask)
        return self.embedding.forward(ids, mask.astype(self.dtype))[0]

    def _run(self, h: np.ndarray, mask: np.ndarray, start: int = 1):
        caches = []
        for layer in self.layers[start:]:
            out, cache = layer.forward(h, mask)
            caches.append((layer, cache, mask))
            mask = layer.output_mask(mask)
            h = out
        return h, caches

    def forward(self, ids: np.ndarray, mask: np.ndarray) -> np.ndarray:
        """Logits of shape (n, classes); pure."""
        mask = mask.astype(self.dtype)
        return self._run(self.embed(ids, mask), mask)[0]

    def forward_embedded(self, h: np.ndarray, mask: np.ndarray) -> np.ndarray:
        """Logits from embedding-space inputs of shape (n, max_len, d)."""
        return self._run(h, mask.astype(self.dtype))[0]

    def losses(self, ids: np.ndarray, mask: np.ndarray, labels: np.ndarray) -> np.ndarray:
        return cross_entropy(self.forward(ids, mask), labels)

    def backward_from(
        self,
        caches,
        grad: np.ndarray,
        grads: Dict[str, np.ndarray],
        offset: int = 1,
    ) -> np.ndarray:
        """Backpropagate ``grad`` through cached layers, accumulating into ``grads``."""
        for index in range(len(caches) - 1, -1, -1):
            layer, cache, mask = caches[index]
            grad, layer_grads = layer.backward(grad, cache, mask)
            if layer.trainable:
                for name, value in layer_grads.items():
                    key = f"{index + offset}.{name}"
                    grads[key] = grads[key] + value if key in grads else value
        return grad

    def loss_and_grads(
        self,
        ids: np.ndarray,
        mask: np.ndarray,
        labels: np.ndarray,
        weights: Optional[np.ndarray] = None,
        embedding_grad: bool = False,
    ):
        """
        Weighted cross-entropy and its gradients.

        Args:
            ids, mask: Padded batch
            labels: Class ids
            weights: Per-example loss weights (default: 1/n, the mean)
            embedding_grad: Also return the gradient w.r.t. the embedding output

        Returns:
            (loss, grads) or (loss, grads, grad_embedded) with
            grad_embedded of shape (n, max_len, d)
        """
        mask = mask.astype(self.dtype)
        n = ids.shape[0]
        if weights is None:
            weights = np.full(n, 1.0 / n)
        weights = np.asarray(weights, dtype=self.dtype)

        h = self.embed(ids, mask)
        logits, caches = self._run(h, mask)
        loss = float(np.dot(weights, cross_entropy(logits, labels)))

        grads: Dict[str, np.ndarray] = {}
        grad_h = self.backward_from(caches, cross_entropy_grad(logits, labels) * weights[:, None], grads)
        if self.embedding.trainable:
            _, emb_grads = self.embedding.backward(grad_h, ids, mask)
            grads["0.weight"] = emb_grads["weight"]
        if embedding_grad:
            return loss, grads, grad_h * mask[..., None]
        return loss, grads

    def describe(self) -> str:
        return " -> ".join(repr(layer) for layer in self.layers)


# =============================================================================
# Configuration
# =============================================================================

class ModelConfig(BaseModel):
    """Architecture hyperparameters."""
    vocab_size: int = Field(..., ge=2)
    max_len: int = Field(..., ge=1)
    num_classes: int = Field(..., ge=2)
    embed_dim: int = Field(default=32, ge=1)
    kernels: int = Field(default=16, ge=1)
    width: int = Field(default=5, ge=1)
    pool: int = Field(default=5, ge=1)
    hidden: List[int] = Field(default_factory=list)
    trainable_embedding: bool = True


# Architecture presets (embedding dim, conv kernels/width, pool, hidden FC sizes).
PRESETS: Dict[str, Dict] = {
    "desk": {"embed_dim": 32, "kernels": 16, "width": 5, "pool": 5, "hidden": []},
    "ag-char": {"embed_dim": 64, "kernels": 64, "width": 10, "pool": 10, "hidden": [64, 64]},
    "sst2-word": {"embed_dim": 300, "kernels": 100, "width": 5, "pool": 5, "hidden": [], "trainable_embedding": False},
    "sst2-char": {"embed_dim": 150, "kernels": 100, "width": 5, "pool": 5, "hidden": []},
}


def preset_config(name: str, vocab_size: int, max_len: int, num_classes: int, **overrides) -> ModelConfig:
    """ModelConfig for a named preset with optional overrides."""
    if name not in PRESETS:
        raise ModelError(f"unknown architecture preset: {name} (expected one of {', '.join(PRESETS)})")
    values = {**PRESETS[name], **overrides}
    return ModelConfig(vocab_size=vocab_size, max_len=max_len, num_classes=num_classes, **values)


def _uniform(rng: np.random.Generator, fan_in: int, shape, dtype) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


def build_model(
    config: ModelConfig,
    embedding: Optional[np.ndarray] = None,
    seed: Optional[int] = None,
    dtype: str = "float32",
) -> Model:
    """
    Initialise a model.

    Args:
        config: Architecture
        embedding: Initial embedding matrix (vocab_size, embed_dim); random
            uniform(-0.1, 0.1) with a zero pad row if omitted
        seed: Initialisation seed
        dtype: float32 for training, float64 for numerical checks
    """
    rng = np.random.default_rng(seed)
    if embedding is None:
        embedding = rng.uniform(-0.1, 0.1, size=(config.vocab_size, config.embed_dim))
        embedding[Embedding.PAD_ID] = 0.0
    embedding = np.array(embedding, dtype=dtype)
    if embedding.shape != (config.vocab_size, config.embed_dim):
        raise ModelError(f"embedding shape {embedding.shape} does not match config")

    layers: List[Layer] = [
        Embedding(embedding, trainable=config.trainable_embedding),
        Conv1D(
            _uniform(rng, config.embed_dim * config.width, (config.kernels, config.width, config.embed_dim), dtype),
            _uniform(rng, config.embed_dim * config.width, (config.kernels,), dtype),
        ),
        ReLU(),
        AvgPool1D(config.pool),
        Flatten(),
    ]
    features = -(-config.max_len // config.pool) * config.kernels
    for size in config.hidden:
        layers += [Linear(_uniform(rng, features, (size, features), dtype), _uniform(rng, features, (size,), dtype)), ReLU()]
        features = size
    layers.append(
        Linear(
            _uniform(rng, features, (config.num_classes, features), dtype),
            _uniform(rng, features, (config.num_classes,), dtype),
        )
    )
    model = Model(layers, max_len=config.max_len, num_classes=config.num_classes, config=config)
    logger.debug(f"Built model with {model.num_params()} parameters: {model.describe()}")
    return model
