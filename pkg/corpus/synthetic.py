# =============================================================================
# A3T Desk - Synthetic Keyboard Task
# =============================================================================
"""
A small char-level task for desk-scale robustness experiments.

Ten symbols sit on a two-row keyboard::

    a b c d e
    f g h i j

A string is labelled 1 when it has more top-row than bottom-row symbols.
Every generated string has a margin of at least three symbols, so no single
keyboard substitution can change the true label: a perfectly robust
classifier exists for {(SwapPair, 1), (SubAdj, 1)}.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from corpus.dataset import Dataset, Example
from dsl.models import AlphabetMode
from dsl.resources import ADJACENCY_TABLE, ResourceTables

logger = logging.getLogger(__name__)

TOP_ROW = "abcde"
BOTTOM_ROW = "fghij"
SYMBOLS = TOP_ROW + BOTTOM_ROW
MIN_MARGIN = 3


def keyboard_adjacency() -> Dict[str, Tuple[str, ...]]:
    """Horizontal and vertical neighbours on the two-row keyboard."""
    rows = [TOP_ROW, BOTTOM_ROW]
    table = {}
    for r, row in enumerate(rows):
        for c, symbol in enumerate(row):
            neighbours = []
            if c > 0:
                neighbours.append(row[c - 1])
            if c < len(row) - 1:
                neighbours.append(row[c + 1])
            neighbours.append(rows[1 - r][c])
            table[symbol] = tuple(neighbours)
    return table


@dataclass(frozen=True)
class KeyboardTask:
    """Generated dataset plus the resources its specs refer to."""
    dataset: Dataset
    resources: ResourceTables
    length: int

    @property
    def symbols(self) -> str:
        return SYMBOLS


def _label(tokens) -> int:
    top = sum(1 for t in tokens if t in TOP_ROW)
    return int(top > len(tokens) - top)


def make_keyboard_task(n: int, length: int = 12, seed: int = 0) -> KeyboardTask:
    """
    Generate ``n`` balanced examples of ``length`` symbols.

    Args:
        n: Number of examples
        length: Symbols per example (at least MIN_MARGIN)
        seed: Generator seed
    """
    if length < MIN_MARGIN:
        raise ValueError(f"length must be at least {MIN_MARGIN}")
    rng = np.random.default_rng(seed)
    examples = []
    while len(examples) < n:
        label = len(examples) % 2
        # Number of top-row symbols with the requested majority and margin.
        low, high = (length + MIN_MARGIN + 1) // 2, length
        if label == 0:
            low, high = 0, (length - MIN_MARGIN) // 2
        top = int(rng.integers(low, high + 1))
        symbols = list(rng.choice(list(TOP_ROW), size=top)) + list(rng.choice(list(BOTTOM_ROW), size=length - top))
        rng.shuffle(symbols)
        tokens = tuple(str(s) for s in symbols)
        if abs(2 * sum(t in TOP_ROW for t in tokens) - length) < MIN_MARGIN or _label(tokens) != label:
            continue
        examples.append(Example(tokens=tokens, label=label))

    resources = ResourceTables(tables={ADJACENCY_TABLE: keyboard_adjacency()})
    logger.info(f"Generated keyboard task: {n} examples of length {length} (seed {seed})")
    return KeyboardTask(
        dataset=Dataset(tuple(examples), num_classes=2, alphabet=AlphabetMode.CHAR),
        resources=resources,
        length=length,
    )
