# =============================================================================
# A3T Desk - Evaluation Reports
# =============================================================================
"""
Normal, HotFlip and exhaustive accuracy of one model on one spec, with
per-example verdicts, space statistics and phase timings.

The report checks itself before it is returned: exhaustive accuracy may
not exceed HotFlip accuracy, HotFlip accuracy may not exceed normal
accuracy, and every refutation witness must be an in-space, misclassified
string.

Usage:
    report = run_report(clf, spec, test_set, beam_k=10, seed=0)
    print(report.format_table())
    save_report(report, "runs/report.json")
"""

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from attack.hotflip import robust_to_attack
from config import settings
from corpus.dataset import Dataset
from dsl.models import TransformSpec
from dsl.parser import spec_to_dict
from evaluation.metrics import ExampleVerdict, ExhaustiveResult, exhaustive_accuracy, normal_accuracy
from nn.classifier import TextClassifier
from perturb.models import PlanCountOverflow
from perturb.space import count_plans, is_member
from train.objectives import parallel_map

logger = logging.getLogger(__name__)


class EvaluationError(ValueError):
    """A report failed its self-check."""


class MetricOrderingError(EvaluationError):
    """exhaustive <= HotFlip <= normal accuracy does not hold."""


def config_hash(spec: TransformSpec, **params) -> str:
    """Stable digest of the spec and evaluation parameters."""
    payload = json.dumps({"spec": spec_to_dict(spec), **params}, sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class EvalReport:
    """Metrics of one model on one spec and dataset."""
    normal_accuracy: float
    hotflip_accuracy: float
    exhaustive: ExhaustiveResult
    spec: str
    n: int
    beam_k: int
    max_space: int
    seed: int
    config_hash: str
    plan_counts: List[Optional[int]] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def exhaustive_accuracy(self) -> float:
        return self.exhaustive.accuracy

    def space_stats(self) -> Dict:
        counted = [c for c in self.plan_counts if c is not None]
        strings = [r.checked for r in self.exhaustive.results if r.verdict is ExampleVerdict.VERIFIED]
        return {
            "plans_mean": float(np.mean(counted)) if counted else None,
            "plans_max": max(counted) if counted else None,
            "plans_overflow": len(self.plan_counts) - len(counted),
            "strings_mean": float(np.mean(strings)) if strings else None,
            "strings_max": max(strings) if strings else None,
        }

    def check_ordering(self) -> None:
        """
        Raises:
            MetricOrderingError: exhaustive > HotFlip or HotFlip > normal
        """
        if self.exhaustive_accuracy > self.hotflip_accuracy:
            raise MetricOrderingError(
                f"exhaustive accuracy {self.exhaustive_accuracy:.4f} exceeds HotFlip accuracy {self.hotflip_accuracy:.4f}"
            )
        if self.hotflip_accuracy > self.normal_accuracy:
            raise MetricOrderingError(
                f"HotFlip accuracy {self.hotflip_accuracy:.4f} exceeds normal accuracy {self.normal_accuracy:.4f}"
            )

    def to_dict(self, alphabet=None, include_examples: bool = True) -> Dict:
        data = {
            "spec": self.spec,
            "n": self.n,
            "seed": self.seed,
            "config_hash": self.config_hash,
            "beam_k": self.beam_k,
            "max_space": self.max_space,
            "normal_accuracy": self.normal_accuracy,
            "hotflip_accuracy": self.hotflip_accuracy,
            "exhaustive": self.exhaustive.to_dict(),
            "space": self.space_stats(),
            "timings": self.timings,
        }
        if include_examples:
            data["examples"] = [r.to_dict(alphabet) for r in self.exhaustive.results]
        return data

    def format_table(self) -> str:
        rows = [
            ("spec", self.spec),
            ("examples", str(self.n)),
            ("normal accuracy", f"{self.normal_accuracy:.4f}"),
            (f"HotFlip accuracy (k={self.beam_k})", f"{self.hotflip_accuracy:.4f}"),
            ("exhaustive accuracy", f"{self.exhaustive_accuracy:.4f}"),
            ("  refuted / skipped", f"{self.exhaustive.refuted} / {self.exhaustive.skipped}"),
            ("seed", str(self.seed)),
            ("config hash", self.config_hash),
        ]
        width = max(len(label) for label, _ in rows)
        return "\n".join(f"{label.ljust(width)}  {value}" for label, value in rows)


def verify_witnesses(
    classifier: TextClassifier,
    spec: TransformSpec,
    dataset: Dataset,
    exhaustive: ExhaustiveResult,
) -> None:
    """
    Re-check every REFUTED witness against the semantics and the model.

    Raises:
        EvaluationError: a witness is outside S(x) or classified correctly
    """
    for result in exhaustive.results:
        if result.verdict is not ExampleVerdict.REFUTED:
            continue
        example = dataset[result.index]
        if not is_member(spec, example.tokens, result.witness):
            raise EvaluationError(f"example {result.index}: witness is not in the perturbation space")
        if int(classifier.predict([result.witness])[0]) == example.label:
            raise EvaluationError(f"example {result.index}: witness is classified correctly")


def _plan_count(spec: TransformSpec, tokens) -> Optional[int]:
    try:
        return count_plans(spec, tokens)
    except PlanCountOverflow:
        return None


def run_report(
    classifier: TextClassifier,
    spec: TransformSpec,
    dataset: Dataset,
    beam_k: Optional[int] = None,
    max_space: Optional[int] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> EvalReport:
    """
    Compute all three accuracies and the space statistics.

    Raises:
        MetricOrderingError: the accuracies are out of order
        EvaluationError: a refutation witness does not re-verify
    """
    beam_k = settings.EVAL_BEAM_K if beam_k is None else beam_k
    max_space = settings.MAX_SPACE if max_space is None else max_space
    seed = settings.SEED if seed is None else seed
    threads = settings.THREADS if threads is None else threads
    timings: Dict[str, float] = {}

    started = time.perf_counter()
    normal = normal_accuracy(classifier, dataset)
    timings["normal"] = time.perf_counter() - started

    started = time.perf_counter()
    robust = parallel_map(
        lambda ex: robust_to_attack(classifier, spec, ex.tokens, ex.label, beam_k), list(dataset), threads
    )
    hotflip = sum(robust) / len(dataset)
    timings["hotflip"] = time.perf_counter() - started

    started = time.perf_counter()
    exhaustive = exhaustive_accuracy(classifier, spec, dataset, max_space, threads)
    timings["exhaustive"] = time.perf_counter() - started

    started = time.perf_counter()
    plan_counts = [_plan_count(spec, ex.tokens) for ex in dataset]
    timings["space"] = time.perf_counter() - started

    report = EvalReport(
        normal_accuracy=normal,
        hotflip_accuracy=hotflip,
        exhaustive=exhaustive,
        spec=spec.describe(),
        n=len(dataset),
        beam_k=beam_k,
        max_space=max_space,
        seed=seed,
        config_hash=config_hash(spec, beam_k=beam_k, max_space=max_space, seed=seed),
        plan_counts=plan_counts,
        timings=timings,
    )
    report.check_ordering()
    verify_witnesses(classifier, spec, dataset, exhaustive)
    logger.info(f"Report {report.config_hash}: normal={normal:.4f} hotflip={hotflip:.4f} exhaustive={exhaustive.accuracy:.4f}")
    return report


def save_report(report: EvalReport, path: Union[str, Path], alphabet=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.to_dict(alphabet), indent=2), encoding="utf-8")
    return path
