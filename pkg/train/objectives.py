# =============================================================================
# A3T Desk - Training Objectives
# =============================================================================
"""
Per-batch objectives and their gradients for every training mode.

- normal:         mean L(x)
- random-aug:     mean L(x) + mean L(z), z drawn by the sequential sampler
- hotflip-aug:    mean L(x) + mean L(z), z the beam's worst candidate
- a3t-*:          (1 - lambda) mean L(x)
                  + lambda mean max_{z in augment_k(S_aug, x)} L(abstract(S_abs, z))
- abstract-only:  the a3t objective with S_aug empty
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, TypeVar

import numpy as np

from abstraction.hull import abstract_batch, candidate_spec
from attack.hotflip import hotflip_beam
from attack.models import Candidate
from attack.search import exhaustive_attack
from config import settings
from corpus.dataset import Example
from dsl.models import TokenString, TransformSpec
from ibp.loss import abstract_loss_and_grads, abstract_losses
from nn.classifier import TextClassifier
from perturb.models import MatchPlan, SpaceBudgetExceeded
from perturb.space import sample_sequential
from train.config import TrainConfig, TrainingError, TrainMode

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


@dataclass
class BatchObjective:
    """Objective value of one batch, its two components and the gradients."""
    loss: float
    normal_loss: float
    adversarial_loss: Optional[float] = None
    grads: Dict[str, np.ndarray] = field(default_factory=dict)


def parallel_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> List[R]:
    """Order-preserving map, fanned out over threads when ``threads`` > 1."""
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def merge_grads(target: Dict[str, np.ndarray], source: Dict[str, np.ndarray], scale: float = 1.0) -> None:
    for name, value in source.items():
        scaled = value * scale if scale != 1.0 else value
        target[name] = target[name] + scaled if name in target else scaled


# =============================================================================
# Candidates
# =============================================================================

def augmentation_targets(
    classifier: TextClassifier,
    spec_aug: TransformSpec,
    x: TokenString,
    label: int,
    k: int = 2,
    search: bool = True,
    beam_k: Optional[int] = None,
    max_space: Optional[int] = None,
) -> List[Candidate]:
    """
    augment_k(S_aug, x): the top-``k`` candidates by concrete loss, with plans.

    Exhaustive search when ``search`` is set and S_aug(x) fits the budget,
    otherwise the beam (width ``beam_k``). An empty S_aug gives ``[x]``.
    """
    if search:
        try:
            return exhaustive_attack(classifier, spec_aug, x, label, k, max_space).candidates[:k]
        except SpaceBudgetExceeded as e:
            logger.debug(f"{e}; using beam search for candidates")
    beam = max(k, beam_k or settings.TRAIN_BEAM_K)
    return hotflip_beam(classifier, spec_aug, x, label, beam).candidates[:k]


def augmentation_candidates(
    classifier: TextClassifier,
    spec_aug: TransformSpec,
    x: TokenString,
    label: int,
    k: int = 2,
    search: bool = True,
    beam_k: Optional[int] = None,
    max_space: Optional[int] = None,
) -> List[TokenString]:
    """The strings of :func:`augmentation_targets`."""
    targets = augmentation_targets(classifier, spec_aug, x, label, k, search, beam_k, max_space)
    return [candidate.tokens for candidate in targets]


def adversarial_loss_a3t(
    classifier: TextClassifier,
    spec_aug: TransformSpec,
    spec_abs: TransformSpec,
    x: TokenString,
    label: int,
    lam: float,
    k: int = 2,
    search: bool = True,
    beam_k: Optional[int] = None,
    max_space: Optional[int] = None,
) -> float:
    """(1 - lambda) L(x) + lambda max over augment_k(S_aug, x) of the abstract loss."""
    normal = classifier.loss(x, label)
    if lam == 0.0:
        return normal
    targets = augmentation_targets(classifier, spec_aug, x, label, k, search, beam_k, max_space)
    candidates = [candidate.tokens for candidate in targets]
    specs = [candidate_spec(spec_abs, candidate.plan) for candidate in targets]
    lower, upper, mask = abstract_batch(specs, candidates, classifier.embeddings, classifier.max_len)
    labels = np.full(len(candidates), label)
    worst = float(abstract_losses(classifier.model, lower, upper, mask, labels).max())
    return (1.0 - lam) * normal + lam * worst


# =============================================================================
# Batch objectives
# =============================================================================

def _check_finite(value: float, what: str) -> float:
    if not np.isfinite(value):
        raise TrainingError(f"non-finite {what}: {value}")
    return value


def normal_objective(classifier: TextClassifier, examples: Sequence[Example]) -> BatchObjective:
    batch = classifier.encode([ex.tokens for ex in examples])
    labels = np.array([ex.label for ex in examples])
    loss, grads = classifier.model.loss_and_grads(batch.ids, batch.mask, labels)
    _check_finite(loss, "loss")
    return BatchObjective(loss=loss, normal_loss=loss, grads=grads)


def augmentation_objective(
    classifier: TextClassifier,
    examples: Sequence[Example],
    perturbed: Sequence[TokenString],
) -> BatchObjective:
    """mean L(x) + mean L(z) over the batch."""
    n = len(examples)
    strings = [ex.tokens for ex in examples] + list(perturbed)
    labels = np.array([ex.label for ex in examples] * 2)
    batch = classifier.encode(strings)
    loss, grads = classifier.model.loss_and_grads(batch.ids, batch.mask, labels, weights=np.full(2 * n, 1.0 / n))
    losses = classifier.model.losses(batch.ids, batch.mask, labels)
    normal = float(losses[:n].mean())
    _check_finite(loss, "augmentation loss")
    return BatchObjective(loss=loss, normal_loss=normal, adversarial_loss=float(losses[n:].mean()), grads=grads)


def a3t_objective(
    classifier: TextClassifier,
    spec_abs: TransformSpec,
    examples: Sequence[Example],
    candidates: Sequence[Sequence[TokenString]],
    lam: float,
    plans: Optional[Sequence[Sequence[MatchPlan]]] = None,
) -> BatchObjective:
    """
    Blend of the normal loss and the worst abstract loss among each
    example's candidates; gradients reach the parameters through both bound
    paths and the embedding table through the box provenance.

    ``plans`` gives the S_aug plan behind each candidate; with a prefix
    limit it moves the S_abs prefix onto the perturbed string.
    """
    model = classifier.model
    n = len(examples)
    labels = np.array([ex.label for ex in examples])
    batch = classifier.encode([ex.tokens for ex in examples])
    normal, normal_grads = model.loss_and_grads(batch.ids, batch.mask, labels)
    _check_finite(normal, "loss")

    grads: Dict[str, np.ndarray] = {}
    merge_grads(grads, normal_grads, 1.0 - lam)
    if lam == 0.0:
        return BatchObjective(loss=normal, normal_loss=normal, grads=grads)

    emb = classifier.embeddings
    lowers, uppers, masks, provenances = [], [], [], []
    for index, (example, options) in enumerate(zip(examples, candidates)):
        option_plans = plans[index] if plans is not None else [None] * len(options)
        specs = [candidate_spec(spec_abs, plan) for plan in option_plans]
        lower, upper, mask, provs = abstract_batch(specs, list(options), emb, model.max_len, with_provenance=True)
        losses = abstract_losses(model, lower, upper, mask, np.full(len(options), example.label))
        best = int(np.argmax(losses))
        lowers.append(lower[best])
        uppers.append(upper[best])
        masks.append(mask[best])
        provenances.append(provs[best])

    adversarial, abs_grads, grad_lower, grad_upper = abstract_loss_and_grads(
        model, np.stack(lowers), np.stack(uppers), np.stack(masks), labels
    )
    _check_finite(adversarial, "abstract loss")
    merge_grads(grads, abs_grads, lam)
    if model.embedding.trainable:
        weight = model.embedding.weight
        table_grad = np.zeros(weight.shape, dtype=np.float64)
        for i in range(n):
            table_grad += provenances[i].embedding_grad(grad_lower[i], grad_upper[i], weight.shape[0])
        merge_grads(grads, {"0.weight": (lam * table_grad).astype(weight.dtype)})

    loss = (1.0 - lam) * normal + lam * adversarial
    return BatchObjective(loss=loss, normal_loss=normal, adversarial_loss=adversarial, grads=grads)


def batch_objective(
    classifier: TextClassifier,
    config: TrainConfig,
    spec_aug: TransformSpec,
    spec_abs: TransformSpec,
    examples: Sequence[Example],
    lam: float,
    rng: np.random.Generator,
) -> BatchObjective:
    """Dispatch on the training mode."""
    mode = config.mode
    if mode is TrainMode.NORMAL:
        return normal_objective(classifier, examples)

    if mode is TrainMode.RANDOM_AUG:
        seeds = rng.integers(0, 2 ** 31 - 1, size=len(examples))
        perturbed = parallel_map(
            lambda item: sample_sequential(spec_aug, item[0].tokens, int(item[1]), config.max_space),
            list(zip(examples, seeds)),
            config.threads,
        )
        return augmentation_objective(classifier, examples, perturbed)

    if mode is TrainMode.HOTFLIP_AUG:
        perturbed = parallel_map(
            lambda ex: hotflip_beam(classifier, spec_aug, ex.tokens, ex.label, config.beam_k).worst.tokens,
            list(examples),
            config.threads,
        )
        return augmentation_objective(classifier, examples, perturbed)

    search = mode is TrainMode.A3T_SEARCH
    if lam == 0.0:
        return a3t_objective(classifier, spec_abs, examples, [[ex.tokens] for ex in examples], lam)
    targets = parallel_map(
        lambda ex: augmentation_targets(
            classifier, spec_aug, ex.tokens, ex.label, config.augment_k, search, config.beam_k, config.space_budget
        ),
        list(examples),
        config.threads,
    )
    candidates = [[candidate.tokens for candidate in options] for options in targets]
    plans = [[candidate.plan for candidate in options] for options in targets]
    return a3t_objective(classifier, spec_abs, examples, candidates, lam, plans)
