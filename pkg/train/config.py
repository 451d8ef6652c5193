# =============================================================================
# A3T Desk - Training Configuration
# =============================================================================
"""
Training modes, hyperparameters and the augmentation/abstraction split.

Provides:
- TrainMode: normal, random-aug, hotflip-aug, a3t-hotflip, a3t-search,
  abstract-only
- TrainConfig: pydantic model with the lambda curriculum
- split_spec: partition a spec into S_aug and S_abs
"""

import logging
from enum import Enum
from typing import Dict, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import settings
from dsl.models import SpecError, TransformSpec

logger = logging.getLogger(__name__)


class TrainingError(ValueError):
    """Inconsistent training configuration or a diverging run."""


class TrainMode(str, Enum):
    NORMAL = "normal"
    RANDOM_AUG = "random-aug"
    HOTFLIP_AUG = "hotflip-aug"
    A3T_HOTFLIP = "a3t-hotflip"
    A3T_SEARCH = "a3t-search"
    ABSTRACT_ONLY = "abstract-only"

    @property
    def is_a3t(self) -> bool:
        return self in (TrainMode.A3T_HOTFLIP, TrainMode.A3T_SEARCH, TrainMode.ABSTRACT_ONLY)

    @property
    def is_augmentation(self) -> bool:
        return self in (TrainMode.RANDOM_AUG, TrainMode.HOTFLIP_AUG)


class TrainConfig(BaseModel):
    """Hyperparameters of one training run."""
    model_config = ConfigDict(extra="forbid")

    mode: TrainMode = TrainMode.NORMAL
    epochs: int = Field(default=20, ge=1)
    batch_size: int = Field(default=32, ge=1)
    lr: float = Field(default=1e-3, gt=0)
    lambda_start: float = Field(default=0.0, ge=0.0, le=1.0)
    lambda_end: float = Field(default=1.0, ge=0.0, le=1.0)
    lambda_warm: float = Field(default=0.5, ge=0.0, le=1.0, description="Fraction of epochs spent warming lambda")
    augment_k: int = Field(default_factory=lambda: settings.AUGMENT_K, ge=1)
    beam_k: int = Field(default_factory=lambda: settings.TRAIN_BEAM_K, ge=1)
    seed: int = Field(default_factory=lambda: settings.SEED)
    patience: int = Field(default=5, ge=1)
    split: Dict[str, Literal["aug", "abs"]] = Field(default_factory=dict)
    max_space: Optional[int] = Field(default=None, ge=1)
    threads: int = Field(default_factory=lambda: settings.THREADS, ge=1)
    validation_fraction: float = Field(default=0.1, ge=0.0, lt=1.0)

    @model_validator(mode="after")
    def _check_augment_k(self) -> "TrainConfig":
        if self.mode is TrainMode.A3T_HOTFLIP and self.augment_k > self.beam_k:
            raise ValueError(f"augment_k ({self.augment_k}) exceeds beam_k ({self.beam_k})")
        return self

    @property
    def space_budget(self) -> int:
        return settings.MAX_SPACE if self.max_space is None else self.max_space

    @property
    def warm_epochs(self) -> int:
        """Epochs over which lambda moves from lambda_start to lambda_end."""
        return int(round(self.lambda_warm * self.epochs))

    def lambda_at(self, epoch: int) -> float:
        """
        Linear curriculum: epoch 0 uses lambda_start, the last warm epoch
        lambda_end, later epochs stay at lambda_end. Without warm-up (zero or
        one warm epoch) lambda_end applies from the start.
        """
        warm = self.warm_epochs
        if warm <= 1 or epoch >= warm - 1:
            return self.lambda_end
        return self.lambda_start + (self.lambda_end - self.lambda_start) * epoch / (warm - 1)

    def lambda_settled(self, epoch: int) -> bool:
        return self.warm_epochs <= 1 or epoch >= self.warm_epochs - 1


def split_spec(spec: TransformSpec, assignment: Dict[str, str]) -> Tuple[TransformSpec, TransformSpec]:
    """
    Partition ``spec`` into (S_aug, S_abs), keeping budgets and rule order.

    Raises:
        SpecError: a rule is unassigned, an unknown rule is named, a target
            is neither "aug" nor "abs", or a rule assigned to S_abs is not
            length-preserving
    """
    names = set(spec.rule_names)
    unknown = sorted(set(assignment) - names)
    if unknown:
        raise SpecError(f"split names unknown rules: {', '.join(unknown)}")
    missing = [name for name in spec.rule_names if name not in assignment]
    if missing:
        raise SpecError(f"split does not assign: {', '.join(missing)}")
    bad = sorted(name for name, target in assignment.items() if target not in ("aug", "abs"))
    if bad:
        raise SpecError(f"split targets must be 'aug' or 'abs': {', '.join(bad)}")

    abs_names = [name for name in spec.rule_names if assignment[name] == "abs"]
    for name in abs_names:
        if not spec.rule(name).length_preserving:
            raise SpecError(f"rule '{name}' is not length-preserving and cannot be abstracted")
    aug_names = [name for name in spec.rule_names if assignment[name] == "aug"]
    return spec.subset(aug_names), spec.subset(abs_names)


def parse_split(text: str) -> Dict[str, str]:
    """Parse ``SwapPair=aug,SubAdj=abs`` (also ``:`` as separator)."""
    assignment: Dict[str, str] = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        name, sep, target = item.replace(":", "=").partition("=")
        if not sep or not name.strip():
            raise SpecError(f"malformed split entry: {item!r}")
        assignment[name.strip()] = target.strip()
    return assignment


def resolve_split(config: TrainConfig, spec: TransformSpec) -> Tuple[TransformSpec, TransformSpec]:
    """(S_aug, S_abs) for a training mode."""
    mode = config.mode
    empty = spec.subset(())
    if mode is TrainMode.ABSTRACT_ONLY:
        return split_spec(spec, {name: "abs" for name in spec.rule_names})
    if mode.is_a3t:
        if not config.split:
            raise SpecError(f"mode {mode.value} needs a split assigning every rule to aug or abs")
        return split_spec(spec, config.split)
    if mode.is_augmentation:
        return spec, empty
    return empty, empty
