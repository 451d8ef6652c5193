# =============================================================================
# A3T Desk - Certification
# =============================================================================
"""
Per-example robustness verdicts.

An example is CERTIFIED when, for every z in S_aug(x), the interval bounds of
abstract(S_abs, z) still predict the true class. Otherwise the full space is
enumerated (within budget) looking for a misclassified string: a hit is
REFUTED with that witness, a clean exhaustive pass is CERTIFIED by
enumeration, and running out of budget leaves the example UNKNOWN.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from abstraction.hull import abstract_batch, abstraction_targets
from config import settings
from dsl.models import TokenString, TransformSpec
from ibp.propagate import propagate_batch
from nn.classifier import TextClassifier
from perturb.matching import detokenize
from perturb.space import enumerate_space

logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    CERTIFIED = "certified"
    REFUTED = "refuted"
    UNKNOWN = "unknown"


@dataclass
class CertifyResult:
    """Verdict for one example."""
    verdict: Verdict
    method: Optional[str] = None
    candidates: int = 0
    enumerated: int = 0
    witness: Optional[TokenString] = None
    min_margin: Optional[float] = None
    details: Dict = field(default_factory=dict)

    def to_dict(self, alphabet=None) -> Dict:
        witness = self.witness
        if witness is not None and alphabet is not None:
            witness = detokenize(witness, alphabet)
        return {
            "verdict": self.verdict.value,
            "method": self.method,
            "candidates": self.candidates,
            "enumerated": self.enumerated,
            "witness": witness if witness is None or isinstance(witness, str) else list(witness),
            "min_margin": self.min_margin,
        }


def _merge(spec_aug: TransformSpec, spec_abs: TransformSpec) -> TransformSpec:
    alphabet = spec_aug.alphabet if not spec_aug.is_empty else spec_abs.alphabet
    return TransformSpec(
        rules=spec_aug.rules + spec_abs.rules,
        alphabet=alphabet,
        prefix_len=spec_aug.prefix_len if spec_aug.prefix_len is not None else spec_abs.prefix_len,
    )


def interval_margins(
    classifier: TextClassifier,
    spec_abs: Union[TransformSpec, Sequence[TransformSpec]],
    strings: List[TokenString],
    label: int,
) -> np.ndarray:
    """
    lower[y] - max_{j != y} upper[j] for the box of each string.

    ``spec_abs`` is either shared or given per string.
    """
    specs = [spec_abs] * len(strings) if isinstance(spec_abs, TransformSpec) else list(spec_abs)
    margins = []
    size = settings.EVAL_BATCH_SIZE
    emb = classifier.embeddings
    for start in range(0, len(strings), size):
        lower, upper, mask = abstract_batch(
            specs[start:start + size], strings[start:start + size], emb, classifier.max_len)
        out_lower, out_upper, _ = propagate_batch(classifier.model, lower, upper, mask)
        others = np.delete(out_upper, label, axis=1)
        margins.append(out_lower[:, label] - others.max(axis=1))
    return np.concatenate(margins) if margins else np.zeros(0)


def certify_example(
    classifier: TextClassifier,
    spec_aug: TransformSpec,
    spec_abs: TransformSpec,
    x: TokenString,
    label: int,
    spec: Optional[TransformSpec] = None,
    max_space: Optional[int] = None,
) -> CertifyResult:
    """
    Certify one example against S = S_aug u S_abs.

    Args:
        classifier: Model under test
        spec_aug: Rules enumerated concretely
        spec_abs: Length-preserving rules bounded by interval propagation
        x: Input tokens
        label: True class
        spec: The full spec for the enumeration fallback (default: both parts)
        max_space: Enumeration budget (default ``settings.MAX_SPACE``)
    """
    budget = settings.MAX_SPACE if max_space is None else max_space
    x = tuple(x)

    targets = abstraction_targets(spec_aug, spec_abs, x, limit=budget + 1)
    candidates = [z for z, _ in targets]
    margin = None
    if len(candidates) <= budget:
        margins = interval_margins(classifier, [s for _, s in targets], candidates, label)
        margin = float(margins.min())
        if np.all(margins > 0):
            return CertifyResult(Verdict.CERTIFIED, method="ibp", candidates=len(candidates), min_margin=margin)
    else:
        logger.debug(f"S_aug space exceeds {budget} strings; skipping interval check")

    full = spec if spec is not None else _merge(spec_aug, spec_abs)
    witness, checked, exhausted = classifier.first_error(enumerate_space(full, x), label, limit=budget)
    if witness is not None:
        return CertifyResult(Verdict.REFUTED, method="enumeration", candidates=len(candidates),
                             enumerated=checked, witness=witness, min_margin=margin)
    if exhausted:
        return CertifyResult(Verdict.CERTIFIED, method="enumeration", candidates=len(candidates),
                             enumerated=checked, min_margin=margin)
    return CertifyResult(Verdict.UNKNOWN, candidates=len(candidates), enumerated=checked, min_margin=margin)


def certify_dataset(
    classifier: TextClassifier,
    spec_aug: TransformSpec,
    spec_abs: TransformSpec,
    examples,
    spec: Optional[TransformSpec] = None,
    max_space: Optional[int] = None,
) -> List[CertifyResult]:
    results = []
    for index, example in enumerate(examples):
        result = certify_example(classifier, spec_aug, spec_abs, example.tokens, example.label, spec, max_space)
        logger.debug(f"Example {index}: {result.verdict.value} ({result.method})")
        results.append(result)
    return results
