# =============================================================================
# A3T Desk - Robustness Sweeps
# =============================================================================
"""
Exhaustive accuracy as one rule's budget varies, as a TSV table for
external plotting.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

from corpus.dataset import Dataset
from dsl.models import TransformSpec
from evaluation.metrics import exhaustive_accuracy
from nn.classifier import TextClassifier

logger = logging.getLogger(__name__)

TSV_HEADER = ("rule", "delta", "exhaustive_accuracy", "verified", "refuted", "skipped")


@dataclass(frozen=True)
class SweepRow:
    rule: str
    delta: int
    accuracy: float
    verified: int
    refuted: int
    skipped: int

    def cells(self) -> List[str]:
        return [self.rule, str(self.delta), f"{self.accuracy:.6f}",
                str(self.verified), str(self.refuted), str(self.skipped)]


def robustness_sweep(
    classifier: TextClassifier,
    spec: TransformSpec,
    dataset: Dataset,
    rule: str,
    deltas: Sequence[int],
    max_space: Optional[int] = None,
    threads: Optional[int] = None,
) -> List[SweepRow]:
    """Exhaustive accuracy for each budget of ``rule``; other budgets stay fixed."""
    rows = []
    for delta in deltas:
        result = exhaustive_accuracy(classifier, spec.with_budget(rule, delta), dataset, max_space, threads)
        rows.append(SweepRow(rule, delta, result.accuracy, result.verified, result.refuted, result.skipped))
        logger.info(f"Sweep {rule}={delta}: {result.accuracy:.4f}")
    return rows


def format_tsv(rows: Sequence[SweepRow]) -> str:
    lines = ["\t".join(TSV_HEADER)] + ["\t".join(row.cells()) for row in rows]
    return "\n".join(lines) + "\n"
