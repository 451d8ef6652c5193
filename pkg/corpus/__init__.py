# =============================================================================
# A3T Desk - Corpus
# =============================================================================
"""
Vocabularies, embedding tables, datasets and padding.

Usage:
    from corpus import Vocabulary, load_dataset, random_embeddings

    train = load_dataset("train.tsv", AlphabetMode.CHAR, max_len=300)
    vocab = Vocabulary.build(train.token_strings)
"""

from corpus.dataset import (
    Batch,
    DataError,
    Dataset,
    Example,
    load_dataset,
    pad_batch,
    split_dataset,
    truncate,
)
from corpus.vocab import PAD_TOKEN, UNK_TOKEN, Vocabulary
from corpus.embeddings import EmbeddingTable, load_embeddings, random_embeddings
from corpus.synthetic import KeyboardTask, keyboard_adjacency, make_keyboard_task

__all__ = [
    'Batch', 'DataError', 'Dataset', 'Example', 'load_dataset', 'pad_batch',
    'split_dataset', 'truncate',
    'PAD_TOKEN', 'UNK_TOKEN', 'Vocabulary',
    'EmbeddingTable', 'load_embeddings', 'random_embeddings',
    'KeyboardTask', 'keyboard_adjacency', 'make_keyboard_task',
]
