# =============================================================================
# A3T Desk - Trainer
# =============================================================================
"""
The training loop: shuffled mini-batches, Adam, the lambda curriculum and
early stopping on the validation value of the mode's own objective.

Usage:
    from train import TrainConfig, train

    result = train(clf, spec, TrainConfig(mode="a3t-search", split={...}), train_set, val_set)
    result.classifier.save("runs/model.json")
"""

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from config import settings
from corpus.dataset import Dataset, split_dataset
from corpus.embeddings import load_embeddings
from corpus.vocab import Vocabulary
from dsl.models import TransformSpec
from dsl.resources import ResourceTables
from nn.classifier import TextClassifier
from nn.model import build_model, preset_config
from nn.optim import AdamState, EarlyStopping, adam_step
from train.config import TrainConfig, TrainingError, TrainMode, resolve_split
from train.objectives import batch_objective

logger = logging.getLogger(__name__)


@dataclass
class EpochRecord:
    """One line of the training log."""
    epoch: int
    lam: float
    loss: float
    normal_loss: float
    adversarial_loss: Optional[float]
    val_loss: Optional[float]
    val_accuracy: Optional[float]
    skipped_steps: int = 0

    def to_dict(self) -> Dict:
        record = asdict(self)
        record["lambda"] = record.pop("lam")
        return record


@dataclass
class TrainResult:
    classifier: TextClassifier
    log: List[EpochRecord] = field(default_factory=list)
    best_epoch: Optional[int] = None
    stopped_early: bool = False
    seconds: float = 0.0

    def to_dict(self) -> Dict:
        return {
            "epochs": len(self.log),
            "best_epoch": self.best_epoch,
            "stopped_early": self.stopped_early,
            "final": self.log[-1].to_dict() if self.log else None,
        }


def _run_epoch(
    classifier: TextClassifier,
    config: TrainConfig,
    spec_aug: TransformSpec,
    spec_abs: TransformSpec,
    dataset: Dataset,
    lam: float,
    rng: np.random.Generator,
    optimizer: Optional[AdamState] = None,
):
    """One pass over ``dataset``; updates the model only when ``optimizer`` is given."""
    order = rng.permutation(len(dataset)) if optimizer is not None else np.arange(len(dataset))
    totals, normals, adversarials, sizes = [], [], [], []
    for start in range(0, len(order), config.batch_size):
        examples = [dataset[int(i)] for i in order[start:start + config.batch_size]]
        objective = batch_objective(classifier, config, spec_aug, spec_abs, examples, lam, rng)
        if optimizer is not None:
            adam_step(optimizer, classifier.model, objective.grads)
        totals.append(objective.loss)
        normals.append(objective.normal_loss)
        if objective.adversarial_loss is not None:
            adversarials.append(objective.adversarial_loss)
        sizes.append(len(examples))
    weights = np.array(sizes, dtype=np.float64) / sum(sizes)
    mean_adv = float(np.dot(weights, adversarials)) if adversarials else None
    return float(np.dot(weights, totals)), float(np.dot(weights, normals)), mean_adv


def train(
    classifier: TextClassifier,
    spec: Optional[TransformSpec],
    config: TrainConfig,
    train_set: Dataset,
    validation: Optional[Dataset] = None,
    log_path: Optional[Union[str, Path]] = None,
) -> TrainResult:
    """
    Train ``classifier`` in place and restore its best-validation parameters.

    Patience only counts once lambda has reached lambda_end; before that the
    objective changes with lambda and validation values are not comparable.

    Raises:
        SpecError: the split is inconsistent with the mode
        TrainingError: missing spec for a robust mode, or a non-finite loss
    """
    if spec is None:
        if config.mode is not TrainMode.NORMAL:
            raise TrainingError(f"mode {config.mode.value} needs a transformation spec")
        spec_aug = spec_abs = None
    else:
        spec_aug, spec_abs = resolve_split(config, spec)
        logger.info(f"Training {config.mode.value}: S_aug={spec_aug.describe()} S_abs={spec_abs.describe()}")

    rng = np.random.default_rng(config.seed)
    if validation is None and config.validation_fraction > 0 and len(train_set) > 1:
        train_set, validation = split_dataset(train_set, config.validation_fraction, config.seed)

    optimizer = AdamState(lr=config.lr)
    stopper = EarlyStopping(config.patience)
    result = TrainResult(classifier)
    best_params = None
    started = time.perf_counter()
    log_file = None
    if log_path is not None:
        Path(log_path).parent.mkdir(parents=True, exist_ok=True)
        log_file = open(log_path, "w", encoding="utf-8")

    try:
        for epoch in range(config.epochs):
            lam = config.lambda_at(epoch)
            skipped_before = optimizer.skipped
            loss, normal, adversarial = _run_epoch(
                classifier, config, spec_aug, spec_abs, train_set, lam, rng, optimizer
            )
            val_loss = val_accuracy = None
            if validation is not None:
                val_rng = np.random.default_rng([config.seed, epoch])
                val_loss, _, _ = _run_epoch(classifier, config, spec_aug, spec_abs, validation, lam, val_rng)
                predictions = classifier.predict(validation.token_strings)
                val_accuracy = float(np.mean(predictions == validation.labels))

            record = EpochRecord(
                epoch=epoch, lam=lam, loss=loss, normal_loss=normal, adversarial_loss=adversarial,
                val_loss=val_loss, val_accuracy=val_accuracy, skipped_steps=optimizer.skipped - skipped_before,
            )
            result.log.append(record)
            if log_file is not None:
                log_file.write(json.dumps(record.to_dict()) + "\n")
                log_file.flush()
            logger.info(
                f"Epoch {epoch + 1}/{config.epochs}: lambda={lam:.3f} loss={loss:.4f} "
                f"normal={normal:.4f} val_loss={val_loss}"
            )

            if val_loss is None or not config.lambda_settled(epoch):
                continue
            if stopper.update(val_loss, epoch):
                best_params = classifier.model.snapshot()
                result.best_epoch = epoch
            elif stopper.should_stop:
                logger.info(f"Early stopping after epoch {epoch + 1}; best epoch {result.best_epoch + 1}")
                result.stopped_early = True
                break
    finally:
        if log_file is not None:
            log_file.close()

    if best_params is not None:
        classifier.model.set_params(best_params)
    else:
        result.best_epoch = len(result.log) - 1
    result.seconds = time.perf_counter() - started
    return result


def build_classifier(
    train_set: Dataset,
    resources: Optional[ResourceTables] = None,
    preset: str = "desk",
    max_len: Optional[int] = None,
    embeddings_path: Optional[Union[str, Path]] = None,
    seed: Optional[int] = None,
    dtype: Optional[str] = None,
    **overrides,
) -> TextClassifier:
    """
    Fresh classifier for ``train_set``: vocabulary over the dataset plus every
    resource token (so substitutions have rows), embeddings, preset model.
    """
    seed = settings.SEED if seed is None else seed
    dtype = dtype or settings.numpy_dtype
    extra = resources.all_tokens() if resources is not None else ()
    vocab = Vocabulary.build(train_set.token_strings, extra=extra)
    max_len = max_len or max(len(tokens) for tokens in train_set.token_strings)
    config = preset_config(preset, len(vocab), max_len, train_set.num_classes, **overrides)
    matrix = None
    if embeddings_path is not None:
        table = load_embeddings(embeddings_path, vocab, seed=seed, trainable=config.trainable_embedding, dtype=dtype)
        if table.dim != config.embed_dim:
            config = config.model_copy(update={"embed_dim": table.dim})
        matrix = table.matrix
    model = build_model(config, embedding=matrix, seed=seed, dtype=dtype)
    return TextClassifier(model, vocab, train_set.alphabet)


def train_classifier(
    train_set: Dataset,
    spec: Optional[TransformSpec],
    config: TrainConfig,
    resources: Optional[ResourceTables] = None,
    preset: str = "desk",
    validation: Optional[Dataset] = None,
    max_len: Optional[int] = None,
    embeddings_path: Optional[Union[str, Path]] = None,
    log_path: Optional[Union[str, Path]] = None,
    **overrides,
) -> TrainResult:
    """Build a classifier from a preset and train it."""
    classifier = build_classifier(
        train_set, resources, preset, max_len, embeddings_path, seed=config.seed, **overrides
    )
    return train(classifier, spec, config, train_set, validation, log_path)
