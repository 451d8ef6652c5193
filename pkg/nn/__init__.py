# =============================================================================
# A3T Desk - Neural Network
# =============================================================================
"""
Desk-scale CNN text classifier with manual backpropagation.

Usage:
    from nn import build_model, preset_config, TextClassifier

    config = preset_config("desk", vocab_size=len(vocab), max_len=50, num_classes=2)
    clf = TextClassifier(build_model(config, seed=0), vocab)
"""

from nn.layers import (
    AffineLayer,
    AvgPool1D,
    Conv1D,
    Embedding,
    Flatten,
    Layer,
    LayerRegistry,
    Linear,
    ModelError,
    ReLU,
)
from nn.model import (
    PRESETS,
    Model,
    ModelConfig,
    build_model,
    cross_entropy,
    cross_entropy_grad,
    preset_config,
)
from nn.optim import AdamState, EarlyStopping, adam_step
from nn.checkpoint import Checkpoint, CheckpointError, load_checkpoint, load_model, save_model
from nn.classifier import TextClassifier

__all__ = [
    'AffineLayer', 'AvgPool1D', 'Conv1D', 'Embedding', 'Flatten', 'Layer',
    'LayerRegistry', 'Linear', 'ModelError', 'ReLU',
    'PRESETS', 'Model', 'ModelConfig', 'build_model', 'cross_entropy',
    'cross_entropy_grad', 'preset_config',
    'AdamState', 'EarlyStopping', 'adam_step',
    'Checkpoint', 'CheckpointError', 'load_checkpoint', 'load_model', 'save_model',
    'TextClassifier',
]
