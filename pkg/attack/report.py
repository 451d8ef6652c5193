# =============================================================================
# A3T Desk - Attack Reports
# =============================================================================
"""
Per-example attack records for the ``attack`` command.
"""

import logging
from typing import Iterable, List, Optional

from attack.hotflip import hotflip_beam
from attack.models import AttackRecord, AttackResult
from attack.search import exhaustive_attack
from corpus.dataset import Example
from dsl.models import TokenString, TransformSpec
from nn.classifier import TextClassifier
from perturb.models import SpaceBudgetExceeded

logger = logging.getLogger(__name__)

ATTACK_METHODS = ("hotflip", "search")


def run_attack(
    classifier: TextClassifier,
    spec: TransformSpec,
    x: TokenString,
    label: int,
    method: str = "hotflip",
    k: Optional[int] = None,
    max_space: Optional[int] = None,
) -> AttackResult:
    """Run one attack; ``search`` falls back to the beam when S(x) is too large."""
    if method not in ATTACK_METHODS:
        raise ValueError(f"unknown attack method '{method}', expected one of {', '.join(ATTACK_METHODS)}")
    if method == "search":
        try:
            return exhaustive_attack(classifier, spec, x, label, k or 1, max_space)
        except SpaceBudgetExceeded as e:
            logger.warning(f"{e}; falling back to beam search")
    return hotflip_beam(classifier, spec, x, label, k)


def attack_example(
    classifier: TextClassifier,
    spec: TransformSpec,
    example: Example,
    method: str = "hotflip",
    k: Optional[int] = None,
    max_space: Optional[int] = None,
) -> AttackRecord:
    result = run_attack(classifier, spec, example.tokens, example.label, method, k, max_space)
    worst = result.worst
    before, after = classifier.predict([example.tokens, worst.tokens])
    return AttackRecord(
        original=tuple(example.tokens),
        label=example.label,
        worst=worst.tokens,
        loss_before=classifier.loss(example.tokens, example.label),
        loss_after=worst.loss,
        prediction_before=int(before),
        prediction_after=int(after),
    )


def attack_dataset(
    classifier: TextClassifier,
    spec: TransformSpec,
    examples: Iterable[Example],
    method: str = "hotflip",
    k: Optional[int] = None,
    max_space: Optional[int] = None,
) -> List[AttackRecord]:
    records = [attack_example(classifier, spec, ex, method, k, max_space) for ex in examples]
    flipped = sum(record.flipped for record in records)
    logger.info(f"Attacked {len(records)} examples, {flipped} predictions flipped")
    return records
