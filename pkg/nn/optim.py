# =============================================================================
# A3T Desk - Optimisation
# =============================================================================
"""
Adam and early stopping.

Usage:
    state = AdamState(lr=1e-3)
    loss, grads = model.loss_and_grads(batch.ids, batch.mask, labels)
    adam_step(state, model, grads)
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from nn.layers import Embedding
from nn.model import Model

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """Adam moments per parameter name plus the step counter."""
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    skipped: int = 0

    def to_dict(self) -> Dict:
        return {"lr": self.lr, "beta1": self.beta1, "beta2": self.beta2, "eps": self.eps,
                "step": self.step, "skipped": self.skipped}


def adam_step(state: AdamState, model: Model, grads: Dict[str, np.ndarray]) -> bool:
    """
    Apply one Adam update in place.

    Parameters of frozen layers are never touched; the embedding padding row
    stays zero. A step with any non-finite gradient is skipped.

    Returns:
        True if the update was applied
    """
    for name, grad in grads.items():
        if not np.all(np.isfinite(grad)):
            state.skipped += 1
            logger.warning(f"Skipping Adam step {state.step + 1}: non-finite gradient for {name}")
            return False

    trainable = model.trainable_params()
    state.step += 1
    t = state.step
    for name, grad in grads.items():
        if name not in trainable:
            continue
        param = trainable[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(param)
            state.v[name] = np.zeros_like(param)
        if state.m[name].shape != param.shape:
            raise ValueError(f"moment shape {state.m[name].shape} does not match parameter {name} {param.shape}")
        m = state.m[name] = state.beta1 * state.m[name] + (1 - state.beta1) * grad
        v = state.v[name] = state.beta2 * state.v[name] + (1 - state.beta2) * grad * grad
        m_hat = m / (1 - state.beta1 ** t)
        v_hat = v / (1 - state.beta2 ** t)
        param -= (state.lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(param.dtype)

    if model.embedding.trainable:
        model.embedding.weight[Embedding.PAD_ID] = 0.0
    return True


class EarlyStopping:
    """
    Stop after ``patience`` consecutive evaluations without improvement.

    Usage:
        stopper = EarlyStopping(patience=5)
        if stopper.update(val_loss): save_best()
        if stopper.should_stop: break
    """

    def __init__(self, patience: int = 5, min_delta: float = 0.0):
        if patience < 1:
            raise ValueError(f"patience must be positive, got {patience}")
        self.patience = patience
        self.min_delta = min_delta
        self.best: Optional[float] = None
        self.best_epoch: Optional[int] = None
        self.bad_epochs = 0
        self._epoch = -1

    def update(self, value: float, epoch: Optional[int] = None) -> bool:
        """Record a validation value; return True if it is the new best."""
        self._epoch = epoch if epoch is not None else self._epoch + 1
        if self.best is None or value < self.best - self.min_delta:
            self.best = value
            self.best_epoch = self._epoch
            self.bad_epochs = 0
            return True
        self.bad_epochs += 1
        return False

    @property
    def should_stop(self) -> bool:
        return self.bad_epochs >= self.patience
