# =============================================================================
# Corpus Tests
# =============================================================================
"""
Tests for vocabularies, datasets, batching, embeddings and the synthetic
keyboard task.

Run with: pytest tests/test_corpus.py -v
"""

import pytest
import sys
import os

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import logging

import numpy as np

from corpus.dataset import DataError, Dataset, Example, load_dataset, pad_batch, split_dataset
from corpus.embeddings import load_embeddings, random_embeddings
from corpus.synthetic import BOTTOM_ROW, MIN_MARGIN, TOP_ROW, keyboard_adjacency, make_keyboard_task
from corpus.vocab import Vocabulary
from dsl.models import AlphabetMode


class TestVocabulary:
    """Test token <-> id mapping."""

    def test_reserved_ids(self):
        """Padding is 0 and unknown is 1."""
        vocab = Vocabulary(["a"])
        assert vocab.id_of("<pad>") == Vocabulary.PAD_ID == 0
        assert vocab.id_of("missing") == Vocabulary.UNK_ID == 1
        assert vocab.id_of("a") == 2

    def test_build_order(self):
        """Frequency first, then the token; extras are appended."""
        vocab = Vocabulary.build([["b", "a", "b"], ["c", "a", "b"]], extra=["z", "a"])
        assert vocab.tokens == ["<pad>", "<unk>", "b", "a", "c", "z"]

    def test_build_is_order_independent(self):
        """Stream order does not change the ids."""
        first = Vocabulary.build([["x", "y"], ["y", "z"]])
        second = Vocabulary.build([["y", "z"], ["x", "y"]])
        assert first == second

    def test_save_load(self, tmp_path):
        """One token per line, specials implied."""
        vocab = Vocabulary(["a", "b c"])
        path = tmp_path / "vocab.txt"
        vocab.save(path)
        assert Vocabulary.load(path) == vocab
        assert Vocabulary.from_tokens(vocab.tokens) == vocab

    def test_from_tokens_needs_specials(self):
        """The full token list starts with the specials."""
        with pytest.raises(ValueError):
            Vocabulary.from_tokens(["a", "b"])


class TestDatasets:
    """Test dataset loading and splitting."""

    def test_load(self, tmp_path):
        """Char-level lines are lower-cased and truncated."""
        path = tmp_path / "data.tsv"
        path.write_text("1\tHello\n\n0\tab\n", encoding="utf-8")
        dataset = load_dataset(path, AlphabetMode.CHAR, max_len=3)
        assert len(dataset) == 2
        assert dataset[0].tokens == ("h", "e", "l")
        assert dataset.num_classes == 2
        assert list(dataset.labels) == [1, 0]

    def test_vocab_check(self, tmp_path, caplog):
        """Tokens outside the model vocabulary are kept and counted."""
        path = tmp_path / "data.tsv"
        path.write_text("1\tgood movie\n0\tbad film\n", encoding="utf-8")
        vocab = Vocabulary(["good", "movie", "bad"])
        with caplog.at_level(logging.WARNING, logger="corpus.dataset"):
            dataset = load_dataset(path, AlphabetMode.WORD, max_len=10, vocab=vocab)
        assert dataset[1].tokens == ("bad", "film")
        assert "1 of 4 tokens are out of vocabulary" in caplog.text

        caplog.clear()
        with caplog.at_level(logging.WARNING, logger="corpus.dataset"):
            load_dataset(path, AlphabetMode.WORD, max_len=10, vocab=Vocabulary(["good", "movie", "bad", "film"]))
        assert "out of vocabulary" not in caplog.text

    def test_bad_label_reports_line(self, tmp_path):
        """Malformed lines are reported with their line number."""
        path = tmp_path / "data.tsv"
        path.write_text("1\tok\nx\tbad\n", encoding="utf-8")
        with pytest.raises(DataError, match=":2:"):
            load_dataset(path, AlphabetMode.CHAR, max_len=10)

    def test_missing_tab(self, tmp_path):
        """Lines need a label and a tab."""
        path = tmp_path / "data.tsv"
        path.write_text("no tab here\n", encoding="utf-8")
        with pytest.raises(DataError):
            load_dataset(path, AlphabetMode.WORD, max_len=10)

    def test_label_out_of_range(self, tmp_path):
        """Labels must be below num_classes."""
        path = tmp_path / "data.tsv"
        path.write_text("3\tabc\n", encoding="utf-8")
        with pytest.raises(DataError):
            load_dataset(path, AlphabetMode.CHAR, max_len=10, num_classes=2)

    def test_empty_dataset(self):
        """Datasets are never empty."""
        with pytest.raises(DataError):
            Dataset((), num_classes=2)

    def test_save_round_trip(self, tmp_path):
        """Saved word-level datasets load back unchanged."""
        dataset = Dataset((Example(("a", "good", "movie"), 1), Example(("bad",), 0)), 2, AlphabetMode.WORD)
        path = tmp_path / "out.tsv"
        dataset.save(path)
        assert load_dataset(path, AlphabetMode.WORD, max_len=10, num_classes=2) == dataset

    def test_split(self, keyboard_task):
        """Splits are disjoint, cover the data and depend only on the seed."""
        rest, held = split_dataset(keyboard_task.dataset, 0.25, seed=3)
        assert len(held) == 10
        assert len(rest) + len(held) == len(keyboard_task.dataset)
        again = split_dataset(keyboard_task.dataset, 0.25, seed=3)
        assert again == (rest, held)

    def test_split_fraction_checked(self, keyboard_task):
        """The fraction lies strictly between 0 and 1."""
        with pytest.raises(DataError):
            split_dataset(keyboard_task.dataset, 1.0)


class TestBatching:
    """Test padding."""

    def test_pad(self):
        """Right padding with a 0/1 mask."""
        vocab = Vocabulary(["a", "b"])
        batch = pad_batch([("a",), ("a", "b", "c")], vocab, max_len=4)
        assert batch.ids.tolist() == [[2, 0, 0, 0], [2, 3, 1, 0]]
        assert batch.mask.tolist() == [[1, 0, 0, 0], [1, 1, 1, 0]]
        assert batch.lengths.tolist() == [1, 3]

    def test_too_long(self):
        """Longer strings fail unless truncation is requested."""
        vocab = Vocabulary(["a"])
        with pytest.raises(DataError):
            pad_batch([("a", "a", "a")], vocab, max_len=2)
        batch = pad_batch([("a", "a", "a")], vocab, max_len=2, truncate_long=True)
        assert batch.lengths.tolist() == [2]


class TestEmbeddings:
    """Test embedding tables."""

    def test_random(self):
        """The padding row is zero."""
        table = random_embeddings(Vocabulary(["a", "b"]), dim=3, seed=0)
        assert table.matrix.shape == (4, 3)
        assert np.all(table.matrix[0] == 0)
        assert table.embed(("a", "b")).shape == (2, 3)
        assert table.embed(()).shape == (0, 3)

    def test_load_pretrained(self, tmp_path):
        """Known tokens take the file's vectors; a header line is skipped."""
        path = tmp_path / "vectors.txt"
        path.write_text("2 2\ngood 1.0 2.0\nzzz 3.0 4.0\n", encoding="utf-8")
        vocab = Vocabulary(["good", "bad"])
        table = load_embeddings(path, vocab, seed=0)
        assert table.dim == 2
        assert table.embed(("good",)).tolist() == [[1.0, 2.0]]
        assert np.all(np.abs(table.embed(("bad",))) <= 0.1)

    def test_inconsistent_dimensions(self, tmp_path):
        """Rows of different lengths are rejected."""
        path = tmp_path / "vectors.txt"
        path.write_text("good 1.0 2.0\nbad 1.0\n", encoding="utf-8")
        with pytest.raises(DataError):
            load_embeddings(path, Vocabulary(["good", "bad"]))


class TestKeyboardTask:
    """Test the synthetic task."""

    def test_labels_and_margin(self, keyboard_task):
        """Labels follow the top-row majority with a safe margin."""
        for example in keyboard_task.dataset:
            top = sum(token in TOP_ROW for token in example.tokens)
            bottom = sum(token in BOTTOM_ROW for token in example.tokens)
            assert top + bottom == keyboard_task.length
            assert abs(top - bottom) >= MIN_MARGIN
            assert example.label == int(top > bottom)

    def test_balanced_and_deterministic(self):
        """Classes alternate and the seed fixes the data."""
        task = make_keyboard_task(10, length=6, seed=1)
        assert list(task.dataset.labels) == [0, 1] * 5
        assert make_keyboard_task(10, length=6, seed=1).dataset == task.dataset

    def test_adjacency(self):
        """Neighbours are symmetric and cross rows vertically."""
        table = keyboard_adjacency()
        for key, values in table.items():
            for value in values:
                assert key in table[value]
        assert "f" in table["a"]
