# =============================================================================
# A3T Desk - Exhaustive Search Attack
# =============================================================================
"""
Explicit search through the perturbation space for the worst-case samples.

Usage:
    result = exhaustive_attack(clf, spec, x, y, k=2)
    result.worst.tokens
"""

import logging
from typing import Optional

import numpy as np

from attack.models import AttackResult, Candidate
from config import settings
from dsl.models import TokenString, TransformSpec
from nn.classifier import TextClassifier
from perturb.space import enumerate_with_plans

logger = logging.getLogger(__name__)


def exhaustive_attack(
    classifier: TextClassifier,
    spec: TransformSpec,
    x: TokenString,
    label: int,
    k: int = 1,
    max_space: Optional[int] = None,
) -> AttackResult:
    """
    Evaluate every string of S(x) and return the true top-k by loss.

    Ties keep enumeration order, so ``x`` wins among equal losses.

    Raises:
        SpaceBudgetExceeded: S(x) holds more than ``max_space`` strings
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    budget = settings.MAX_SPACE if max_space is None else max_space
    space = enumerate_with_plans(spec, tuple(x), max_space=budget)
    losses = classifier.losses([z for z, _ in space], label)
    order = np.argsort(-losses, kind="stable")[:k]
    candidates = [Candidate(space[i][0], float(losses[i]), space[i][1]) for i in order]
    logger.debug(f"Exhaustive attack: {len(space)} strings, worst loss {candidates[0].loss:.4f}")
    return AttackResult(candidates, nodes_expanded=len(space), forward_passes=len(space))
