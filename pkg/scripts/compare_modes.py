#!/usr/bin/env python3
# =============================================================================
# A3T Desk - Desk-Scale Robustness Comparison
# =============================================================================
"""
Train every method on the synthetic keyboard task and compare normal and
exhaustive accuracy under {(SwapPair, 1), (SubAdj, 1)}.

Usage:
    python scripts/compare_modes.py
    python scripts/compare_modes.py --seeds 0 1 2 3 4 --epochs 10 --out runs/modes.tsv
"""

import argparse
import logging
import os
import sys
from typing import Dict, List, Sequence

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

import numpy as np

from corpus.dataset import split_dataset
from corpus.synthetic import make_keyboard_task
from dsl.parser import parse_inline_spec
from evaluation.metrics import exhaustive_accuracy, normal_accuracy
from train.config import TrainConfig
from train.trainer import train_classifier

logger = logging.getLogger(__name__)

SPEC = "{SwapPair:1, SubAdj:1}"
SPLIT = {"SwapPair": "aug", "SubAdj": "abs"}
MODES = ("normal", "random-aug", "hotflip-aug", "a3t-search")


def run_seed(seed: int, n: int = 600, test_fraction: float = 0.2, epochs: int = 10,
             modes: Sequence[str] = MODES) -> Dict[str, Dict[str, float]]:
    """Normal and exhaustive test accuracy per mode for one seed."""
    task = make_keyboard_task(n, seed=seed)
    spec = parse_inline_spec(SPEC, task.resources)
    train_set, test_set = split_dataset(task.dataset, test_fraction, seed)
    results = {}
    for mode in modes:
        config = TrainConfig(mode=mode, epochs=epochs, seed=seed, split=SPLIT if mode.startswith("a3t") else {})
        trained = train_classifier(train_set, spec, config, task.resources, max_len=task.length)
        classifier = trained.classifier
        results[mode] = {
            "normal": normal_accuracy(classifier, test_set),
            "exhaustive": exhaustive_accuracy(classifier, spec, test_set).accuracy,
        }
        logger.info(f"seed={seed} {mode}: {results[mode]}")
    return results


def run_comparison(seeds: Sequence[int] = (0, 1, 2, 3, 4), **kwargs) -> Dict[str, Dict[str, float]]:
    """Per-mode accuracies averaged over seeds."""
    runs = [run_seed(seed, **kwargs) for seed in seeds]
    modes = runs[0].keys()
    return {
        mode: {metric: float(np.mean([run[mode][metric] for run in runs])) for metric in ("normal", "exhaustive")}
        for mode in modes
    }


def format_table(summary: Dict[str, Dict[str, float]]) -> str:
    lines: List[str] = ["mode\tnormal\texhaustive"]
    for mode, metrics in summary.items():
        lines.append(f"{mode}\t{metrics['normal']:.4f}\t{metrics['exhaustive']:.4f}")
    return "\n".join(lines) + "\n"


def main():
    parser = argparse.ArgumentParser(description="Desk-scale robustness comparison on the keyboard task")
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    parser.add_argument("--n", type=int, default=600)
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--out", help="Write the TSV table here")
    args = parser.parse_args()

    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    table = format_table(run_comparison(args.seeds, n=args.n, epochs=args.epochs))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(table)
    print(table, end="")


if __name__ == "__main__":
    main()
