# =============================================================================
# Attack Tests
# =============================================================================
"""
Tests for the exhaustive search attack, the HotFlip beam and attack records.

Run with: pytest tests/test_attack.py -v
"""

import pytest
import sys
import os

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from attack.hotflip import hotflip_accuracy, hotflip_beam, robust_to_attack
from attack.models import AttackRecord
from attack.report import attack_dataset, run_attack
from attack.search import exhaustive_attack
from corpus.dataset import Dataset
from dsl.models import AlphabetMode
from perturb.matching import materialize, validate_plan
from perturb.models import SpaceBudgetExceeded
from perturb.space import enumerate_space, is_member


class TestExhaustiveAttack:
    """Test the explicit search."""

    def test_top_k(self, tiny_classifier, keyboard_task, keyboard_spec):
        """Candidates are the k largest losses in descending order."""
        example = keyboard_task.dataset[0]
        strings = list(enumerate_space(keyboard_spec, example.tokens))
        losses = np.sort(tiny_classifier.losses(strings, example.label))[::-1]
        result = exhaustive_attack(tiny_classifier, keyboard_spec, example.tokens, example.label, k=3)
        assert [c.loss for c in result] == pytest.approx(list(losses[:3]))
        assert result.nodes_expanded == len(strings)
        for candidate in result:
            assert materialize(example.tokens, candidate.plan) == candidate.tokens

    def test_k_larger_than_space(self, tiny_classifier, keyboard_spec):
        """Asking for more candidates than exist returns the whole space."""
        spec = keyboard_spec.subset(["SwapPair"])
        result = exhaustive_attack(tiny_classifier, spec, ("a", "b"), 0, k=10)
        assert sorted(result.strings) == [("a", "b"), ("b", "a")]

    def test_invalid_k(self, tiny_classifier, keyboard_task, keyboard_spec):
        """k must be positive."""
        example = keyboard_task.dataset[0]
        with pytest.raises(ValueError):
            exhaustive_attack(tiny_classifier, keyboard_spec, example.tokens, example.label, k=0)

    def test_budget(self, tiny_classifier, keyboard_task, keyboard_spec):
        """Spaces over the budget are refused."""
        example = keyboard_task.dataset[0]
        with pytest.raises(SpaceBudgetExceeded):
            exhaustive_attack(tiny_classifier, keyboard_spec, example.tokens, example.label, max_space=3)


class TestHotFlip:
    """Test the beam search."""

    def test_candidates_are_in_space(self, tiny_classifier, keyboard_task, keyboard_spec):
        """Every candidate is a member of S(x) produced by its plan."""
        example = keyboard_task.dataset[1]
        result = hotflip_beam(tiny_classifier, keyboard_spec, example.tokens, example.label, k=3)
        assert 1 <= len(result) <= 3
        assert len(set(result.strings)) == len(result)
        losses = [c.loss for c in result]
        assert losses == sorted(losses, reverse=True)
        for candidate in result:
            validate_plan(keyboard_spec, example.tokens, candidate.plan)
            assert is_member(keyboard_spec, example.tokens, candidate.tokens)
            assert candidate.loss == pytest.approx(tiny_classifier.loss(candidate.tokens, example.label))

    def test_wide_beam_is_exhaustive(self, tiny_classifier, keyboard_task, keyboard_spec):
        """A beam wider than the space visits all of S(x)."""
        example = keyboard_task.dataset[2]
        strings = set(enumerate_space(keyboard_spec, example.tokens))
        beam = hotflip_beam(tiny_classifier, keyboard_spec, example.tokens, example.label, k=10 ** 4)
        search = exhaustive_attack(tiny_classifier, keyboard_spec, example.tokens, example.label)
        assert set(beam.strings) == strings
        assert beam.worst.loss == pytest.approx(search.worst.loss)

    def test_beats_original(self, tiny_classifier, keyboard_task, keyboard_spec):
        """The worst candidate is never better than x itself."""
        example = keyboard_task.dataset[3]
        result = hotflip_beam(tiny_classifier, keyboard_spec, example.tokens, example.label, k=2)
        assert result.worst.loss >= tiny_classifier.loss(example.tokens, example.label) - 1e-12

    def test_invalid_width(self, tiny_classifier, keyboard_task, keyboard_spec):
        """The beam width must be positive."""
        example = keyboard_task.dataset[0]
        with pytest.raises(ValueError):
            hotflip_beam(tiny_classifier, keyboard_spec, example.tokens, example.label, k=0)

    def test_misclassified_input_is_not_robust(self, tiny_classifier, keyboard_task, keyboard_spec):
        """Robustness requires x itself to be correct."""
        example = keyboard_task.dataset[0]
        wrong = 1 - int(tiny_classifier.predict([example.tokens])[0])
        assert not robust_to_attack(tiny_classifier, keyboard_spec, example.tokens, wrong, k=1)

    def test_accuracy_bounded_by_clean_accuracy(self, tiny_classifier, keyboard_task, keyboard_spec):
        """Surviving the attack implies a correct prediction."""
        dataset = Dataset(tuple(keyboard_task.dataset)[:8], num_classes=2)
        clean = float(np.mean(tiny_classifier.predict([ex.tokens for ex in dataset]) == dataset.labels))
        assert hotflip_accuracy(tiny_classifier, keyboard_spec, dataset, k=1) <= clean


class TestReports:
    """Test attack records."""

    def test_search_falls_back_to_beam(self, tiny_classifier, keyboard_task, keyboard_spec):
        """An oversized space makes the search use the beam."""
        example = keyboard_task.dataset[0]
        result = run_attack(tiny_classifier, keyboard_spec, example.tokens, example.label,
                            method="search", k=2, max_space=3)
        assert len(result) <= 2
        assert all(is_member(keyboard_spec, example.tokens, z) for z in result.strings)

    def test_unknown_method(self, tiny_classifier, keyboard_task, keyboard_spec):
        """Methods are hotflip or search."""
        example = keyboard_task.dataset[0]
        with pytest.raises(ValueError):
            run_attack(tiny_classifier, keyboard_spec, example.tokens, example.label, method="random")

    def test_records(self, tiny_classifier, keyboard_task, keyboard_spec):
        """Records compare the prediction before and after the attack."""
        examples = list(keyboard_task.dataset)[:3]
        records = attack_dataset(tiny_classifier, keyboard_spec, examples, method="search", k=1)
        for example, record in zip(examples, records):
            assert record.original == example.tokens
            assert record.loss_after >= record.loss_before - 1e-12
            assert record.flipped == (record.prediction_before != record.prediction_after)

    def test_record_dict(self):
        """Strings are rendered in the spec's alphabet."""
        record = AttackRecord(("a", "b"), 1, ("b", "a"), 0.1, 0.9, 1, 0)
        payload = record.to_dict(AlphabetMode.CHAR)
        assert payload["original"] == "ab"
        assert payload["worst"] == "ba"
        assert payload["flipped"] is True
