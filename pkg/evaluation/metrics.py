# =============================================================================
# A3T Desk - Accuracy Metrics
# =============================================================================
"""
Normal accuracy and exhaustive accuracy.

An example counts towards exhaustive accuracy iff every string of its
perturbation space is classified correctly. Spaces are streamed in batches
and the scan stops at the first misclassified string; spaces larger than the
per-example budget are SKIPPED and never counted as verified.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

import numpy as np

from config import settings
from corpus.dataset import Dataset, Example
from dsl.models import TokenString, TransformSpec
from nn.classifier import TextClassifier
from perturb.matching import detokenize
from perturb.space import enumerate_space
from train.objectives import parallel_map

logger = logging.getLogger(__name__)


class ExampleVerdict(str, Enum):
    VERIFIED = "verified"
    REFUTED = "refuted"
    SKIPPED = "skipped"


@dataclass
class ExampleResult:
    index: int
    verdict: ExampleVerdict
    checked: int
    witness: Optional[TokenString] = None

    def to_dict(self, alphabet=None) -> Dict:
        witness = self.witness
        if witness is not None:
            witness = detokenize(witness, alphabet) if alphabet is not None else list(witness)
        return {"index": self.index, "verdict": self.verdict.value, "checked": self.checked, "witness": witness}


@dataclass
class ExhaustiveResult:
    """Exhaustive accuracy over all n examples plus the per-example verdicts."""
    accuracy: float
    results: List[ExampleResult] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.results)

    def count(self, verdict: ExampleVerdict) -> int:
        return sum(result.verdict is verdict for result in self.results)

    @property
    def verified(self) -> int:
        return self.count(ExampleVerdict.VERIFIED)

    @property
    def refuted(self) -> int:
        return self.count(ExampleVerdict.REFUTED)

    @property
    def skipped(self) -> int:
        return self.count(ExampleVerdict.SKIPPED)

    @property
    def evaluated_accuracy(self) -> Optional[float]:
        """Accuracy over the examples whose space was fully decided."""
        evaluated = self.total - self.skipped
        return self.verified / evaluated if evaluated else None

    def to_dict(self) -> Dict:
        return {
            "accuracy": self.accuracy,
            "verified": self.verified,
            "refuted": self.refuted,
            "skipped": self.skipped,
            "evaluated_accuracy": self.evaluated_accuracy,
        }


def normal_accuracy(classifier: TextClassifier, dataset: Dataset) -> float:
    predictions = classifier.predict(dataset.token_strings)
    return float(np.mean(predictions == dataset.labels))


def check_example(
    classifier: TextClassifier,
    spec: TransformSpec,
    example: Example,
    index: int = 0,
    max_space: Optional[int] = None,
) -> ExampleResult:
    """Decide one example by short-circuit enumeration of S(x)."""
    budget = settings.MAX_SPACE if max_space is None else max_space
    witness, checked, exhausted = classifier.first_error(
        enumerate_space(spec, example.tokens), example.label, limit=budget
    )
    if witness is not None:
        return ExampleResult(index, ExampleVerdict.REFUTED, checked, witness)
    if exhausted:
        return ExampleResult(index, ExampleVerdict.VERIFIED, checked)
    logger.warning(f"Example {index}: perturbation space exceeds {budget} strings; skipped")
    return ExampleResult(index, ExampleVerdict.SKIPPED, checked)


def exhaustive_accuracy(
    classifier: TextClassifier,
    spec: TransformSpec,
    dataset: Dataset,
    max_space: Optional[int] = None,
    threads: Optional[int] = None,
) -> ExhaustiveResult:
    """
    Fraction of examples classified correctly on their whole perturbation
    space. SKIPPED examples count as not verified.
    """
    threads = settings.THREADS if threads is None else threads
    results = parallel_map(
        lambda item: check_example(classifier, spec, item[1], item[0], max_space),
        list(enumerate(dataset)),
        threads,
    )
    accuracy = sum(r.verdict is ExampleVerdict.VERIFIED for r in results) / len(dataset)
    result = ExhaustiveResult(accuracy, results)
    logger.info(
        f"Exhaustive accuracy: {accuracy:.4f} ({result.verified} verified, "
        f"{result.refuted} refuted, {result.skipped} skipped)"
    )
    return result
