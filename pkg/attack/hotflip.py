# =============================================================================
# A3T Desk - HotFlip Beam Search
# =============================================================================
"""
Gradient-guided beam search over sequences of single transformation
applications.

Each round extends every beam state by one application on the original
string that respects the per-rule budgets and does not overlap the spans the
state already consumed. Length-preserving applications are ranked by the
first-order estimate loss(z) + <dL/dE(z), E(z') - E(z)>; length-changing
ones by their true loss. The best ``k`` extensions are re-scored with a
forward pass and form the next beam.

Usage:
    result = hotflip_beam(clf, spec_aug, x, y, k=2)
    for candidate in result:
        print(candidate.tokens, candidate.loss)
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from attack.models import AttackResult, Candidate
from config import settings
from corpus.dataset import Dataset
from corpus.embeddings import EmbeddingTable
from dsl.models import TokenString, TransformSpec
from nn.classifier import TextClassifier
from perturb.matching import materialize, validate_plan
from perturb.models import Application, MatchPlan, PlanError
from perturb.space import single_applications

logger = logging.getLogger(__name__)


def _compatible(plan: MatchPlan, app: Application, budgets: Sequence[int]) -> bool:
    if any(app.match.overlaps(other.match) for other in plan):
        return False
    return plan.rule_counts()[app.match.rule_index] < budgets[app.match.rule_index]


def _shift(plan: MatchPlan, app: Application) -> int:
    """Offset of ``app``'s span in the materialised string of ``plan``."""
    return sum(len(other.replacement) - other.match.length for other in plan if other.match.r < app.match.l)


def _first_order(
    emb: EmbeddingTable,
    z: TokenString,
    loss: float,
    grad: np.ndarray,
    position: int,
    replacement: TokenString,
) -> float:
    """Linearised loss after overwriting ``z[position:]`` with ``replacement``."""
    score = loss
    for offset, token in enumerate(replacement):
        i = position + offset
        if i >= grad.shape[0]:
            break
        if token == z[i]:
            continue
        delta = emb.embed((token,))[0] - emb.embed((z[i],))[0]
        score += float(np.dot(grad[i], delta))
    return score


def hotflip_beam(
    classifier: TextClassifier,
    spec: TransformSpec,
    x: TokenString,
    label: int,
    k: Optional[int] = None,
) -> AttackResult:
    """
    Top-k perturbations of ``x`` found by beam search.

    Args:
        classifier: Model under attack (read only)
        spec: Augmentation specification S_aug
        x: Original string
        label: True class
        k: Beam width and number of returned candidates

    Returns:
        AttackResult with at most ``k`` distinct strings of S(x), sorted by
        descending true loss; ``x`` itself competes too
    """
    k = settings.TRAIN_BEAM_K if k is None else k
    if k < 1:
        raise ValueError(f"beam width must be positive, got {k}")
    x = tuple(x)
    emb = classifier.embeddings
    budgets = spec.budgets
    apps = single_applications(spec, x)

    loss_x, grad_x = classifier.embedding_gradient(x, label)
    forward_passes = 1
    nodes = 0
    root = (MatchPlan(), x, loss_x, grad_x)
    beam: List[Tuple[MatchPlan, TokenString, float, np.ndarray]] = [root]
    pool: Dict[TokenString, Candidate] = {x: Candidate(x, loss_x, MatchPlan())}

    for round_index in range(spec.total_budget):
        seen = set()
        proposals: List[Tuple[float, MatchPlan, TokenString]] = []
        exact: List[int] = []
        for plan, z, loss, grad in beam:
            for app in apps:
                if not _compatible(plan, app, budgets):
                    continue
                extended = plan.extended(app)
                if extended in seen:
                    continue
                seen.add(extended)
                nodes += 1
                z_new = materialize(x, extended)
                if len(app.replacement) == app.match.length:
                    score = _first_order(emb, z, loss, grad, app.match.l + _shift(plan, app), app.replacement)
                else:
                    score = float("nan")
                    exact.append(len(proposals))
                proposals.append((score, extended, z_new))
        if not proposals:
            break

        if exact:
            losses = classifier.losses([proposals[i][2] for i in exact], label)
            forward_passes += len(exact)
            for i, value in zip(exact, losses):
                proposals[i] = (float(value), proposals[i][1], proposals[i][2])

        scores = np.array([score for score, _, _ in proposals])
        chosen = np.argsort(-scores, kind="stable")[:k]
        beam = []
        for i in chosen:
            _, plan, z = proposals[i]
            loss, grad = classifier.embedding_gradient(z, label)
            forward_passes += 1
            beam.append((plan, z, loss, grad))
            if z not in pool or loss > pool[z].loss:
                pool[z] = Candidate(z, loss, plan)
        logger.debug(f"Beam round {round_index + 1}: {len(proposals)} proposals, best {max(s[2] for s in beam):.4f}")

    ranked = sorted(pool.values(), key=lambda c: -c.loss)[:k]
    for candidate in ranked:
        try:
            validate_plan(spec, x, candidate.plan)
        except PlanError as e:
            raise PlanError(f"beam produced an out-of-space candidate: {e}") from e
        if materialize(x, candidate.plan) != candidate.tokens:
            raise PlanError("beam candidate does not match its plan")
    return AttackResult(ranked, nodes_expanded=nodes, forward_passes=forward_passes)


def robust_to_attack(
    classifier: TextClassifier,
    spec: TransformSpec,
    x: TokenString,
    label: int,
    k: Optional[int] = None,
) -> bool:
    """True iff ``x`` and every beam candidate are classified as ``label``."""
    if int(classifier.predict([x])[0]) != label:
        return False
    result = hotflip_beam(classifier, spec, x, label, k)
    return bool(np.all(classifier.predict(result.strings) == label))


def hotflip_accuracy(
    classifier: TextClassifier,
    spec: TransformSpec,
    dataset: Dataset,
    k: Optional[int] = None,
) -> float:
    """Fraction of examples that survive the beam attack."""
    k = settings.EVAL_BEAM_K if k is None else k
    robust = sum(robust_to_attack(classifier, spec, ex.tokens, ex.label, k) for ex in dataset)
    accuracy = robust / len(dataset)
    logger.info(f"HotFlip accuracy (k={k}): {accuracy:.4f}")
    return accuracy
