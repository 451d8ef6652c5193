# =============================================================================
# A3T Desk - Training
# =============================================================================
"""
Normal, augmentation and abstraction-augmented training.

Usage:
    from train import TrainConfig, train_classifier

    config = TrainConfig(mode="a3t-search", split={"SwapPair": "aug", "SubAdj": "abs"})
    result = train_classifier(train_set, spec, config, resources)
"""

from train.config import (
    TrainConfig,
    TrainingError,
    TrainMode,
    parse_split,
    resolve_split,
    split_spec,
)
from train.objectives import (
    BatchObjective,
    a3t_objective,
    adversarial_loss_a3t,
    augmentation_candidates,
    augmentation_targets,
    augmentation_objective,
    batch_objective,
    normal_objective,
    parallel_map,
)
from train.trainer import EpochRecord, TrainResult, build_classifier, train, train_classifier

__all__ = [
    'TrainConfig', 'TrainingError', 'TrainMode', 'parse_split', 'resolve_split', 'split_spec',
    'BatchObjective', 'a3t_objective', 'adversarial_loss_a3t', 'augmentation_candidates', 'augmentation_targets',
    'augmentation_objective', 'batch_objective', 'normal_objective', 'parallel_map',
    'EpochRecord', 'TrainResult', 'build_classifier', 'train', 'train_classifier',
]
