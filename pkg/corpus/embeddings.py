# =============================================================================
# A3T Desk - Embedding Tables
# =============================================================================
"""
Embedding tables E: token -> R^d.

Word-level models load pretrained vectors (text format ``token v1 ... vd``)
and keep them frozen; char-level models start from random vectors and train
them. The padding row is always zero.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from corpus.dataset import DataError
from corpus.vocab import Vocabulary

logger = logging.getLogger(__name__)

INIT_SCALE = 0.1


@dataclass
class EmbeddingTable:
    """Embedding matrix of shape (|vocab|, d) bound to its vocabulary."""
    matrix: np.ndarray
    vocab: Vocabulary
    trainable: bool = False

    def __post_init__(self):
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.vocab):
            raise DataError(
                f"embedding matrix shape {self.matrix.shape} does not match vocabulary of {len(self.vocab)}"
            )
        if not np.all(np.isfinite(self.matrix)):
            raise DataError("embedding matrix contains non-finite values")

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        """E(tokens), shape (len(tokens), d)."""
        if len(tokens) == 0:
            return np.zeros((0, self.dim), dtype=self.matrix.dtype)
        return self.matrix[self.vocab.encode(tokens)]

    def embed_ids(self, ids: np.ndarray) -> np.ndarray:
        return self.matrix[ids]


def _random_matrix(rows: int, dim: int, seed: Optional[int], dtype) -> np.ndarray:
    rng = np.random.default_rng(seed)
    matrix = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(rows, dim)).astype(dtype)
    matrix[Vocabulary.PAD_ID] = 0.0
    return matrix


def random_embeddings(
    vocab: Vocabulary,
    dim: int,
    seed: Optional[int] = None,
    trainable: bool = True,
    dtype: str = "float32",
) -> EmbeddingTable:
    """Randomly initialised table (uniform(-0.1, 0.1), zero padding row)."""
    return EmbeddingTable(matrix=_random_matrix(len(vocab), dim, seed, dtype), vocab=vocab, trainable=trainable)


def load_embeddings(
    path: Union[str, Path],
    vocab: Vocabulary,
    seed: Optional[int] = None,
    trainable: bool = False,
    dtype: str = "float32",
) -> EmbeddingTable:
    """
    Load pretrained vectors for the tokens of ``vocab``.

    Rows of tokens absent from the file keep their seeded uniform(-0.1, 0.1)
    initialisation; a leading ``count dim`` header line is skipped.

    Raises:
        DataError: inconsistent dimensions or malformed lines
        OSError: unreadable file
    """
    vectors = {}
    dim = None
    with open(path, "r", encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            parts = line.rstrip().split(" ")
            if not parts or parts == [""]:
                continue
            if number == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                continue
            token, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
            if len(values) != dim or dim == 0:
                raise DataError(f"{path}:{number}: expected {dim} values, got {len(values)}")
            if token in vocab:
                try:
                    vectors[token] = np.array([float(v) for v in values], dtype=np.float64)
                except ValueError as e:
                    raise DataError(f"{path}:{number}: {e}") from e

    if dim is None:
        raise DataError(f"{path}: no vectors found")

    matrix = _random_matrix(len(vocab), dim, seed, dtype)
    for token, vector in vectors.items():
        matrix[vocab.id_of(token)] = vector
    matrix[Vocabulary.PAD_ID] = 0.0
    logger.info(f"Loaded {len(vectors)}/{len(vocab) - 2} vectors of dimension {dim} from {path}")
    return EmbeddingTable(matrix=matrix, vocab=vocab, trainable=trainable)
