# =============================================================================
# A3T Desk - Text Classifier
# =============================================================================
"""
TextClassifier bundles a Model with its Vocabulary and alphabet, and works on
token strings directly: the surface used by attacks, certification,
training and evaluation.

Usage:
    clf = TextClassifier(model, vocab, AlphabetMode.CHAR)
    clf.predict([tokenize("hello", AlphabetMode.CHAR)])
"""

import itertools
import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from config import settings
from corpus.dataset import Batch, pad_batch
from corpus.embeddings import EmbeddingTable
from corpus.vocab import Vocabulary
from dsl.models import AlphabetMode, TokenString
from nn.checkpoint import CheckpointError, load_checkpoint, save_model
from nn.model import Model, cross_entropy

logger = logging.getLogger(__name__)


class TextClassifier:
    """Model + Vocabulary + alphabet."""

    def __init__(self, model: Model, vocab: Vocabulary, alphabet: AlphabetMode = AlphabetMode.CHAR):
        if model.embedding.weight.shape[0] != len(vocab):
            raise ValueError(
                f"embedding has {model.embedding.weight.shape[0]} rows, vocabulary {len(vocab)} tokens"
            )
        self.model = model
        self.vocab = vocab
        self.alphabet = AlphabetMode(alphabet)

    @property
    def max_len(self) -> int:
        return self.model.max_len

    @property
    def num_classes(self) -> int:
        return self.model.num_classes

    @property
    def embeddings(self) -> EmbeddingTable:
        """The model's live embedding table (shares its weight array)."""
        return EmbeddingTable(self.model.embedding.weight, self.vocab, self.model.embedding.trainable)

    # =========================================================================
    # Encoding
    # =========================================================================

    def encode(self, strings: Sequence[TokenString]) -> Batch:
        """Truncate to max_len and pad."""
        return pad_batch(strings, self.vocab, self.max_len, truncate_long=True, dtype=str(self.model.dtype))

    def embed(self, tokens: TokenString) -> np.ndarray:
        """E(tokens) truncated to max_len, shape (len, d)."""
        return self.embeddings.embed(tuple(tokens)[:self.max_len])

    # =========================================================================
    # Inference
    # =========================================================================

    def _chunks(self, n: int, batch_size: Optional[int]):
        size = batch_size or settings.EVAL_BATCH_SIZE
        for start in range(0, n, size):
            yield start, min(n, start + size)

    def logits(self, strings: Sequence[TokenString], batch_size: Optional[int] = None) -> np.ndarray:
        strings = list(strings)
        out = np.zeros((len(strings), self.num_classes), dtype=self.model.dtype)
        for start, end in self._chunks(len(strings), batch_size):
            batch = self.encode(strings[start:end])
            out[start:end] = self.model.forward(batch.ids, batch.mask)
        return out

    def predict(self, strings: Sequence[TokenString], batch_size: Optional[int] = None) -> np.ndarray:
        return self.logits(strings, batch_size).argmax(axis=1)

    def losses(
        self,
        strings: Sequence[TokenString],
        labels: Union[int, Sequence[int], np.ndarray],
        batch_size: Optional[int] = None,
    ) -> np.ndarray:
        """Per-string cross-entropy; ``labels`` may be one label for all."""
        strings = list(strings)
        labels = np.broadcast_to(np.asarray(labels, dtype=np.int64), (len(strings),))
        if not strings:
            return np.zeros(0)
        return cross_entropy(self.logits(strings, batch_size), labels)

    def loss(self, tokens: TokenString, label: int) -> float:
        return float(self.losses([tokens], label)[0])

    def first_error(
        self,
        strings: Iterable[TokenString],
        label: int,
        limit: Optional[int] = None,
        batch_size: Optional[int] = None,
    ) -> Tuple[Optional[TokenString], int, bool]:
        """
        Scan a (lazy) stream of strings in batches for a misclassified one.

        Args:
            strings: String stream, consumed at most up to ``limit`` + 1 items
            label: Expected class
            limit: Largest number of strings to check

        Returns:
            (witness or None, strings checked, whether the stream was exhausted)
        """
        size = batch_size or settings.EVAL_BATCH_SIZE
        iterator = iter(strings)
        checked = 0
        while True:
            take = size if limit is None else min(size, limit - checked)
            if take <= 0:
                return None, checked, next(iterator, None) is None
            chunk = list(itertools.islice(iterator, take))
            if not chunk:
                return None, checked, True
            predictions = self.predict(chunk, size)
            wrong = np.flatnonzero(predictions != label)
            if wrong.size:
                return chunk[wrong[0]], checked + int(wrong[0]) + 1, False
            checked += len(chunk)

    def embedding_gradient(self, tokens: TokenString, label: int) -> Tuple[float, np.ndarray]:
        """
        Loss and its gradient w.r.t. the embedding output.

        Returns:
            (loss, grad) with grad of shape (min(len(tokens), max_len), d)
        """
        batch = self.encode([tokens])
        loss, _, grad = self.model.loss_and_grads(
            batch.ids, batch.mask, np.array([label]), embedding_grad=True
        )
        return loss, grad[0, :int(batch.lengths[0])]

    # =========================================================================
    # Persistence
    # =========================================================================

    def save(self, path: Union[str, Path], metadata: Optional[dict] = None) -> Path:
        return save_model(self.model, path, vocab_tokens=self.vocab.tokens,
                          alphabet=self.alphabet.value, metadata=metadata)

    @classmethod
    def load(cls, path: Union[str, Path], num_classes: Optional[int] = None) -> "TextClassifier":
        checkpoint = load_checkpoint(path, num_classes)
        if checkpoint.vocab_tokens is None or checkpoint.alphabet is None:
            raise CheckpointError(f"{path}: checkpoint has no vocabulary; load it with load_model")
        try:
            vocab = Vocabulary.from_tokens(checkpoint.vocab_tokens)
        except ValueError as e:
            raise CheckpointError(f"{path}: {e}") from e
        return cls(checkpoint.model, vocab, AlphabetMode(checkpoint.alphabet))
