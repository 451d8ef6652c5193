# =============================================================================
# Training Tests
# =============================================================================
"""
Tests for the training configuration, the per-mode objectives and short
training runs.

Run with: pytest tests/test_train.py -v
"""

import pytest
import sys
import os

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import json
from dataclasses import replace

import numpy as np
from pydantic import ValidationError

from dsl.models import SpecError
from dsl.parser import parse_inline_spec
from perturb.matching import materialize
from train.config import TrainConfig, TrainingError, TrainMode, parse_split, resolve_split, split_spec
from train.objectives import (
    a3t_objective,
    adversarial_loss_a3t,
    augmentation_candidates,
    augmentation_objective,
    augmentation_targets,
    normal_objective,
    parallel_map,
)
from train.trainer import build_classifier, train

SPLIT = {"SwapPair": "aug", "SubAdj": "abs"}


class TestSplit:
    """Test the augmentation/abstraction split."""

    def test_split_keeps_order_and_budgets(self, keyboard_spec):
        """Both parts keep their rules' budgets."""
        spec_aug, spec_abs = split_spec(keyboard_spec, SPLIT)
        assert spec_aug.describe() == "{SwapPair:1}"
        assert spec_abs.describe() == "{SubAdj:1}"

    def test_split_errors(self, keyboard_spec, keyboard_task):
        """Unknown, unassigned, mistargeted and length-changing rules fail."""
        with pytest.raises(SpecError):
            split_spec(keyboard_spec, {**SPLIT, "Dup": "aug"})
        with pytest.raises(SpecError):
            split_spec(keyboard_spec, {"SwapPair": "aug"})
        with pytest.raises(SpecError):
            split_spec(keyboard_spec, {"SwapPair": "aug", "SubAdj": "both"})
        with_delete = parse_inline_spec("{SwapPair:1, Del:1}", keyboard_task.resources)
        with pytest.raises(SpecError, match="length-preserving"):
            split_spec(with_delete, {"SwapPair": "abs", "Del": "abs"})

    def test_parse_split(self):
        """Both '=' and ':' separate names from targets."""
        assert parse_split("SwapPair=aug, SubAdj:abs") == SPLIT
        assert parse_split("") == {}
        with pytest.raises(SpecError):
            parse_split("SwapPair")

    def test_resolve_per_mode(self, keyboard_spec):
        """Each mode decides which part is enumerated and which abstracted."""
        aug, abs_ = resolve_split(TrainConfig(mode="normal"), keyboard_spec)
        assert aug.is_empty and abs_.is_empty
        aug, abs_ = resolve_split(TrainConfig(mode="hotflip-aug"), keyboard_spec)
        assert aug == keyboard_spec and abs_.is_empty
        aug, abs_ = resolve_split(TrainConfig(mode="abstract-only"), keyboard_spec)
        assert aug.is_empty and abs_.rule_names == keyboard_spec.rule_names
        aug, abs_ = resolve_split(TrainConfig(mode="a3t-search", split=SPLIT), keyboard_spec)
        assert aug.rule_names == ("SwapPair",) and abs_.rule_names == ("SubAdj",)
        with pytest.raises(SpecError):
            resolve_split(TrainConfig(mode="a3t-hotflip"), keyboard_spec)


class TestTrainConfig:
    """Test hyperparameter validation and the lambda curriculum."""

    def test_lambda_schedule(self):
        """Lambda rises linearly over the warm epochs, then stays."""
        config = TrainConfig(epochs=10, lambda_start=0.0, lambda_end=1.0, lambda_warm=0.5)
        assert config.warm_epochs == 5
        assert [config.lambda_at(e) for e in range(7)] == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0, 1.0, 1.0])
        assert not config.lambda_settled(3)
        assert config.lambda_settled(4)

    def test_no_warm_up(self):
        """Without warm-up lambda_end applies from the first epoch."""
        config = TrainConfig(epochs=4, lambda_end=0.5, lambda_warm=0.0)
        assert config.lambda_at(0) == 0.5
        assert config.lambda_settled(0)

    def test_augment_k_bounded_by_beam(self):
        """The beam must hold at least augment_k candidates."""
        with pytest.raises(ValidationError):
            TrainConfig(mode="a3t-hotflip", augment_k=5, beam_k=2)
        TrainConfig(mode="a3t-search", augment_k=5, beam_k=2)

    def test_unknown_field(self):
        """Typos in configuration are rejected."""
        with pytest.raises(ValidationError):
            TrainConfig(epoch=3)

    def test_modes(self):
        """Mode families."""
        assert TrainMode("abstract-only").is_a3t
        assert TrainMode("random-aug").is_augmentation
        assert not TrainMode("normal").is_a3t


class TestObjectives:
    """Test per-batch objectives."""

    def test_a3t_with_zero_lambda_is_normal(self, tiny_classifier, keyboard_task, keyboard_spec):
        """lambda = 0 reduces to normal training."""
        examples = list(keyboard_task.dataset)[:4]
        normal = normal_objective(tiny_classifier, examples)
        blended = a3t_objective(tiny_classifier, keyboard_spec.subset(["SubAdj"]), examples,
                                [[ex.tokens] for ex in examples], lam=0.0)
        assert blended.loss == pytest.approx(normal.loss)
        assert blended.adversarial_loss is None
        for name, grad in normal.grads.items():
            np.testing.assert_allclose(blended.grads[name], grad)

    def test_a3t_without_abstraction_is_normal(self, tiny_classifier, keyboard_task, keyboard_spec):
        """Point boxes at lambda = 1 give the normal loss and gradients."""
        examples = list(keyboard_task.dataset)[:4]
        normal = normal_objective(tiny_classifier, examples)
        point = a3t_objective(tiny_classifier, keyboard_spec.subset(()), examples,
                              [[ex.tokens] for ex in examples], lam=1.0)
        assert point.loss == pytest.approx(normal.loss)
        assert point.adversarial_loss == pytest.approx(normal.normal_loss)
        for name, grad in normal.grads.items():
            np.testing.assert_allclose(point.grads[name], grad, rtol=1e-7, atol=1e-10)

    def test_a3t_bounds_augmentation(self, tiny_classifier, keyboard_task, keyboard_spec):
        """The abstract part is at least the worst candidate's concrete loss."""
        examples = list(keyboard_task.dataset)[:3]
        candidates = [
            augmentation_candidates(tiny_classifier, keyboard_spec.subset(["SwapPair"]), ex.tokens, ex.label, k=2)
            for ex in examples
        ]
        objective = a3t_objective(tiny_classifier, keyboard_spec.subset(["SubAdj"]), examples, candidates, lam=0.5)
        worst = np.mean([tiny_classifier.losses(c, ex.label).max() for c, ex in zip(candidates, examples)])
        assert objective.adversarial_loss >= worst - 1e-9
        assert objective.loss == pytest.approx(0.5 * objective.normal_loss + 0.5 * objective.adversarial_loss)
        assert "0.weight" in objective.grads

    def test_augmentation_objective(self, tiny_classifier, keyboard_task):
        """Augmentation adds the perturbed strings' mean loss."""
        examples = list(keyboard_task.dataset)[:4]
        perturbed = [tuple(reversed(ex.tokens)) for ex in examples]
        objective = augmentation_objective(tiny_classifier, examples, perturbed)
        labels = [ex.label for ex in examples]
        clean = tiny_classifier.losses([ex.tokens for ex in examples], labels).mean()
        noisy = tiny_classifier.losses(perturbed, labels).mean()
        assert objective.normal_loss == pytest.approx(clean)
        assert objective.adversarial_loss == pytest.approx(noisy)
        assert objective.loss == pytest.approx(clean + noisy)

    def test_candidates(self, tiny_classifier, keyboard_task, keyboard_spec):
        """Empty S_aug yields x; the beam caps the candidate count."""
        example = keyboard_task.dataset[0]
        assert augmentation_candidates(tiny_classifier, keyboard_spec.subset(()), example.tokens,
                                       example.label, k=2) == [example.tokens]
        beam = augmentation_candidates(tiny_classifier, keyboard_spec, example.tokens, example.label,
                                       k=2, search=False)
        assert 1 <= len(beam) <= 2

    def test_prefix_follows_candidate_plans(self, tiny_classifier, keyboard_task):
        """With insertions in the prefix, plans widen the boxes of shifted candidates."""
        spec = replace(parse_inline_spec("{InsAdj:1, SubAdj:1}", keyboard_task.resources), prefix_len=4)
        aug, abs_ = spec.subset(["InsAdj"]), spec.subset(["SubAdj"])
        examples = list(keyboard_task.dataset)[:3]
        targets = [augmentation_targets(tiny_classifier, aug, ex.tokens, ex.label, k=3) for ex in examples]
        for example, options in zip(examples, targets):
            for candidate in options:
                assert materialize(example.tokens, candidate.plan) == candidate.tokens
        candidates = [[c.tokens for c in options] for options in targets]
        plans = [[c.plan for c in options] for options in targets]
        shifted = a3t_objective(tiny_classifier, abs_, examples, candidates, lam=1.0, plans=plans)
        fixed = a3t_objective(tiny_classifier, abs_, examples, candidates, lam=1.0)
        assert shifted.adversarial_loss >= fixed.adversarial_loss - 1e-9

    def test_adversarial_loss(self, tiny_classifier, keyboard_task, keyboard_spec):
        """lambda = 0 is the plain loss; lambda = 1 is the pure abstract loss."""
        example = keyboard_task.dataset[0]
        aug, abs_ = keyboard_spec.subset(["SwapPair"]), keyboard_spec.subset(["SubAdj"])
        plain = tiny_classifier.loss(example.tokens, example.label)
        assert adversarial_loss_a3t(tiny_classifier, aug, abs_, example.tokens, example.label, 0.0) == plain
        assert adversarial_loss_a3t(tiny_classifier, aug, abs_, example.tokens, example.label, 1.0) >= plain

    def test_parallel_map_keeps_order(self):
        """Threads do not reorder results."""
        assert parallel_map(lambda v: v * v, list(range(20)), threads=4) == [v * v for v in range(20)]


class TestTraining:
    """Short training runs."""

    @pytest.mark.parametrize("mode", [m.value for m in TrainMode])
    def test_every_mode_runs(self, mode, tiny_classifier, keyboard_task, keyboard_spec, tmp_path):
        """Each mode trains, logs one JSON line per epoch and keeps finite losses."""
        config = TrainConfig(mode=mode, epochs=2, batch_size=10, lr=1e-2, lambda_warm=1.0,
                             split=SPLIT if mode.startswith("a3t") else {}, validation_fraction=0.25)
        log_path = tmp_path / "train.jsonl"
        result = train(tiny_classifier, keyboard_spec, config, keyboard_task.dataset, log_path=log_path)

        lines = [json.loads(line) for line in log_path.read_text(encoding="utf-8").splitlines()]
        assert len(lines) == len(result.log) == 2
        assert [line["epoch"] for line in lines] == [0, 1]
        assert all(np.isfinite(line["loss"]) for line in lines)
        assert lines[1]["val_accuracy"] is not None
        if mode in ("a3t-hotflip", "a3t-search", "abstract-only"):
            assert lines[0]["lambda"] == 0.0
            assert lines[1]["lambda"] == 1.0
        assert result.best_epoch in (0, 1)

    def test_normal_training_without_spec(self, tiny_classifier, keyboard_task):
        """Normal training needs no spec."""
        before = tiny_classifier.model.snapshot()
        result = train(tiny_classifier, None, TrainConfig(epochs=1, validation_fraction=0.0), keyboard_task.dataset)
        assert len(result.log) == 1
        assert result.log[0].val_loss is None
        changed = [not np.array_equal(v, tiny_classifier.model.params()[k]) for k, v in before.items()]
        assert any(changed)

    def test_robust_modes_need_a_spec(self, tiny_classifier, keyboard_task):
        """Robust modes refuse to run without a spec."""
        with pytest.raises(TrainingError):
            train(tiny_classifier, None, TrainConfig(mode="random-aug", epochs=1), keyboard_task.dataset)

    def test_seeded_runs_repeat(self, keyboard_task, keyboard_spec):
        """The same seed gives the same log."""
        logs = []
        for _ in range(2):
            clf = build_classifier(keyboard_task.dataset, keyboard_task.resources, max_len=keyboard_task.length,
                                   seed=0, dtype="float64", embed_dim=4, kernels=3, width=3, pool=2)
            config = TrainConfig(mode="random-aug", epochs=2, batch_size=10, seed=7)
            logs.append([r.to_dict() for r in train(clf, keyboard_spec, config, keyboard_task.dataset).log])
        assert logs[0] == logs[1]
