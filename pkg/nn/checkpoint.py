# =============================================================================
# A3T Desk - Checkpoints
# =============================================================================
"""
Versioned JSON checkpoints.

A checkpoint holds the architecture config, one descriptor per layer with
its parameters (row-major, 9 significant digits), and optionally the
vocabulary and alphabet of the classifier it belongs to. Files are written
to a temporary name and renamed, so a crash never leaves a partial file.
"""

import json
import logging
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from nn.layers import LayerRegistry, ModelError
from nn.model import Model, ModelConfig

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "a3t-desk-checkpoint"
CHECKPOINT_VERSION = 1


class CheckpointError(ValueError):
    """Unreadable, corrupted or incompatible checkpoint."""


# =============================================================================
# Schema
# =============================================================================

class ArrayModel(BaseModel):
    shape: List[int]
    data: str = Field(..., description="Space separated values, row-major")


class LayerModel(BaseModel):
    kind: str
    attrs: Dict[str, Any] = Field(default_factory=dict)
    params: Dict[str, ArrayModel] = Field(default_factory=dict)


class CheckpointModel(BaseModel):
    format: str
    version: int
    max_len: int
    num_classes: int
    dtype: str = "float32"
    config: Optional[ModelConfig] = None
    layers: List[LayerModel]
    vocab: Optional[List[str]] = None
    alphabet: Optional[str] = None
    metadata: Dict[str, Any] = Field(default_factory=dict)


@dataclass
class Checkpoint:
    """A loaded checkpoint."""
    model: Model
    vocab_tokens: Optional[List[str]] = None
    alphabet: Optional[str] = None
    metadata: Dict[str, Any] = field(default_factory=dict)


def _encode_array(array: np.ndarray) -> ArrayModel:
    return ArrayModel(
        shape=list(array.shape),
        data=" ".join(f"{value:.8e}" for value in array.ravel().tolist()),
    )


def _decode_array(array: ArrayModel, dtype: str, where: str) -> np.ndarray:
    try:
        values = np.array([float(v) for v in array.data.split()], dtype=dtype)
    except ValueError as e:
        raise CheckpointError(f"{where}: {e}") from e
    expected = int(np.prod(array.shape)) if array.shape else 1
    if values.size != expected:
        raise CheckpointError(f"{where}: {values.size} values for shape {tuple(array.shape)}")
    if not np.all(np.isfinite(values)):
        raise CheckpointError(f"{where}: non-finite values")
    return values.reshape(array.shape)


# =============================================================================
# Save / Load
# =============================================================================

def save_model(
    model: Model,
    path: Union[str, Path],
    vocab_tokens: Optional[List[str]] = None,
    alphabet: Optional[str] = None,
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write ``model`` (and optionally its vocabulary) to ``path`` atomically."""
    path = Path(path)
    checkpoint = CheckpointModel(
        format=CHECKPOINT_FORMAT,
        version=CHECKPOINT_VERSION,
        max_len=model.max_len,
        num_classes=model.num_classes,
        dtype=str(model.dtype),
        config=model.config,
        layers=[
            LayerModel(
                kind=layer.kind,
                attrs=layer.attrs(),
                params={name: _encode_array(value) for name, value in layer.params.items()},
            )
            for layer in model.layers
        ],
        vocab=vocab_tokens,
        alphabet=alphabet,
        metadata=metadata or {},
    )

    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(checkpoint.model_dump_json(indent=1))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.info(f"Saved checkpoint to {path} ({model.num_params()} parameters)")
    return path


def load_checkpoint(path: Union[str, Path], num_classes: Optional[int] = None) -> Checkpoint:
    """
    Load a checkpoint.

    Args:
        path: Checkpoint file
        num_classes: Reject checkpoints trained for a different class count

    Raises:
        CheckpointError: truncated/corrupted file, wrong format or version,
            shape mismatch, class-count mismatch
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise CheckpointError(f"{path}: not a valid checkpoint ({e})") from e

    if not isinstance(raw, dict) or raw.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path}: not an {CHECKPOINT_FORMAT} file")
    if raw.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: checkpoint version {raw.get('version')}, expected {CHECKPOINT_VERSION}")

    try:
        checkpoint = CheckpointModel.model_validate(raw)
    except ValidationError as e:
        raise CheckpointError(f"{path}: invalid checkpoint: {e}") from e

    if num_classes is not None and checkpoint.num_classes != num_classes:
        raise CheckpointError(
            f"{path}: checkpoint has {checkpoint.num_classes} classes, expected {num_classes}"
        )

    layers = []
    for index, descriptor in enumerate(checkpoint.layers):
        try:
            layer_class = LayerRegistry.get(descriptor.kind)
            params = {
                name: _decode_array(array, checkpoint.dtype, f"{path}: layer {index} {name}")
                for name, array in descriptor.params.items()
            }
            layers.append(layer_class.from_descriptor(descriptor.attrs, params))
        except (ModelError, TypeError, KeyError) as e:
            raise CheckpointError(f"{path}: layer {index} ({descriptor.kind}): {e}") from e

    try:
        model = Model(layers, max_len=checkpoint.max_len, num_classes=checkpoint.num_classes, config=checkpoint.config)
    except ModelError as e:
        raise CheckpointError(f"{path}: {e}") from e

    logger.info(f"Loaded checkpoint {path} ({model.num_params()} parameters)")
    return Checkpoint(model=model, vocab_tokens=checkpoint.vocab, alphabet=checkpoint.alphabet, metadata=checkpoint.metadata)


def load_model(path: Union[str, Path], num_classes: Optional[int] = None) -> Model:
    return load_checkpoint(path, num_classes).model
