# =============================================================================
# A3T Desk - Evaluation
# =============================================================================
"""
Accuracy metrics, self-checking reports and budget sweeps.

Usage:
    from evaluation import run_report

    report = run_report(clf, spec, test_set)
    print(report.format_table())
"""

from evaluation.metrics import (
    ExampleResult,
    ExampleVerdict,
    ExhaustiveResult,
    check_example,
    exhaustive_accuracy,
    normal_accuracy,
)
from evaluation.report import (
    EvalReport,
    EvaluationError,
    MetricOrderingError,
    config_hash,
    run_report,
    save_report,
    verify_witnesses,
)
from evaluation.sweep import SweepRow, format_tsv, robustness_sweep

__all__ = [
    'ExampleResult', 'ExampleVerdict', 'ExhaustiveResult', 'check_example',
    'exhaustive_accuracy', 'normal_accuracy',
    'EvalReport', 'EvaluationError', 'MetricOrderingError', 'config_hash',
    'run_report', 'save_report', 'verify_witnesses',
    'SweepRow', 'format_tsv', 'robustness_sweep',
]
