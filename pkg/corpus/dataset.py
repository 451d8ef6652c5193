# =============================================================================
# A3T Desk - Datasets and Batching
# =============================================================================
"""
Labelled examples, TSV ingestion, splitting and padding.

Examples store surface tokens, unpadded and truncated to ``max_len``;
perturbations apply to these tokens and padding only happens at batch time,
so a perturbed example is truncated again before it is padded.

Dataset file: UTF-8, one ``label<TAB>text`` example per line.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from corpus.vocab import Vocabulary
from dsl.models import AlphabetMode, TokenString
from perturb.matching import detokenize, tokenize

logger = logging.getLogger(__name__)


class DataError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass(frozen=True)
class Example:
    tokens: TokenString
    label: int


@dataclass(frozen=True)
class Dataset:
    """Non-empty sequence of labelled examples over ``num_classes`` classes."""
    examples: Tuple[Example, ...]
    num_classes: int
    alphabet: AlphabetMode = AlphabetMode.CHAR

    def __post_init__(self):
        if not self.examples:
            raise DataError("dataset is empty")
        for index, example in enumerate(self.examples):
            if not 0 <= example.label < self.num_classes:
                raise DataError(f"example {index}: label {example.label} outside [0, {self.num_classes})")

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self) -> Iterator[Example]:
        return iter(self.examples)

    def __getitem__(self, index: int) -> Example:
        return self.examples[index]

    @property
    def token_strings(self) -> List[TokenString]:
        return [example.tokens for example in self.examples]

    @property
    def labels(self) -> np.ndarray:
        return np.array([example.label for example in self.examples], dtype=np.int64)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        return Dataset(tuple(self.examples[i] for i in indices), self.num_classes, self.alphabet)

    def head(self, n: int) -> "Dataset":
        return self.subset(range(min(n, len(self))))

    def save(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for example in self.examples:
                f.write(f"{example.label}\t{detokenize(example.tokens, self.alphabet)}\n")


def load_dataset(
    path: Union[str, Path],
    alphabet: AlphabetMode,
    max_len: int,
    num_classes: Optional[int] = None,
    lowercase: Optional[bool] = None,
    vocab: Optional[Vocabulary] = None,
) -> Dataset:
    """
    Load a ``label<TAB>text`` file.

    Tokens are kept as surface strings so perturbations see the real text;
    ``vocab`` only reports how many of them the model will read as unknown.

    Args:
        path: Dataset file
        alphabet: Tokenisation mode
        max_len: Examples are truncated to this many tokens
        num_classes: Class count (default: largest label + 1)
        lowercase: Override the alphabet's default case folding
        vocab: Model vocabulary to check the tokens against

    Raises:
        DataError: malformed line (with line number), label out of range,
            no examples
    """
    examples = []
    with open(path, "r", encoding="utf-8") as f:
        for number, raw in enumerate(f, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            label_text, sep, text = line.partition("\t")
            if not sep:
                raise DataError(f"{path}:{number}: expected 'label<TAB>text'")
            try:
                label = int(label_text)
            except ValueError:
                raise DataError(f"{path}:{number}: label {label_text!r} is not an integer")
            if label < 0 or (num_classes is not None and label >= num_classes):
                raise DataError(f"{path}:{number}: label {label} out of range")
            tokens = tokenize(text, alphabet, lowercase)[:max_len]
            examples.append(Example(tokens=tokens, label=label))

    if not examples:
        raise DataError(f"{path}: no examples")
    classes = num_classes if num_classes is not None else max(e.label for e in examples) + 1
    dataset = Dataset(tuple(examples), classes, AlphabetMode(alphabet))
    logger.info(f"Loaded {len(dataset)} examples ({classes} classes) from {path}")
    if vocab is not None:
        total = sum(len(e.tokens) for e in examples)
        unknown = sum(1 for e in examples for token in e.tokens if token not in vocab)
        if unknown:
            logger.warning(f"{path}: {unknown} of {total} tokens are out of vocabulary")
    return dataset


def split_dataset(dataset: Dataset, fraction: float, seed: Optional[int] = None) -> Tuple[Dataset, Dataset]:
    """
    Shuffle and split off ``fraction`` of the examples (validation split).

    Returns:
        (remaining, held_out)
    """
    if not 0.0 < fraction < 1.0:
        raise DataError(f"split fraction must be in (0, 1), got {fraction}")
    order = np.random.default_rng(seed).permutation(len(dataset))
    cut = max(1, int(round(len(dataset) * fraction)))
    if cut >= len(dataset):
        raise DataError(f"cannot split {len(dataset)} examples with fraction {fraction}")
    return dataset.subset(sorted(order[cut:])), dataset.subset(sorted(order[:cut]))


# =============================================================================
# Batching
# =============================================================================

@dataclass
class Batch:
    """Padded id matrix (n, max_len) with its 0/1 length mask."""
    ids: np.ndarray
    mask: np.ndarray
    lengths: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.lengths is None:
            self.lengths = self.mask.sum(axis=1).astype(np.int64)

    def __len__(self) -> int:
        return self.ids.shape[0]


def truncate(tokens: Sequence[str], max_len: int) -> TokenString:
    return tuple(tokens[:max_len])


def pad_batch(
    examples: Sequence[Sequence[str]],
    vocab,
    max_len: int,
    truncate_long: bool = False,
    dtype: str = "float32",
) -> Batch:
    """
    Encode and right-pad token strings.

    Args:
        examples: Token strings
        vocab: Vocabulary used for id mapping
        max_len: Padded length
        truncate_long: Truncate longer strings instead of failing (used for
            perturbed strings that a length-changing rule made longer)

    Raises:
        DataError: a string is longer than ``max_len`` and truncation is off
    """
    ids = np.full((len(examples), max_len), vocab.PAD_ID, dtype=np.int64)
    mask = np.zeros((len(examples), max_len), dtype=dtype)
    for row, tokens in enumerate(examples):
        if len(tokens) > max_len:
            if not truncate_long:
                raise DataError(f"example {row} has {len(tokens)} tokens, more than max_len {max_len}")
            tokens = tokens[:max_len]
        ids[row, :len(tokens)] = vocab.encode(tokens)
        mask[row, :len(tokens)] = 1.0
    return Batch(ids=ids, mask=mask)
