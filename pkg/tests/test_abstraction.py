# =============================================================================
# Abstraction Tests
# =============================================================================
"""
Tests for interval boxes and the dilated convex hull over embeddings.

Run with: pytest tests/test_abstraction.py -v
"""

import pytest
import sys
import os

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from dataclasses import replace

import numpy as np
from hypothesis import given, settings as hypothesis_settings, strategies as st

from abstraction.hull import (
    abstract_batch,
    abstract_space,
    abstraction_targets,
    candidate_spec,
    dilation,
    hull_vertices,
    prefix_image,
)
from abstraction.interval import AbstractionError, IntervalTensor, contains
from corpus.embeddings import EmbeddingTable
from corpus.vocab import Vocabulary
from dsl.builtins import builtin
from dsl.models import TransformSpec
from dsl.parser import parse_spec
from dsl.resources import ADJACENCY_TABLE, ResourceTables
from perturb.models import Application, Match, MatchPlan
from perturb.space import enumerate_space

ADJACENT = {"a": ("b", "c"), "b": ("a",), "c": ("a", "b")}


@pytest.fixture(scope="module")
def adjacent_resources():
    return ResourceTables(tables={ADJACENCY_TABLE: ADJACENT})


@pytest.fixture(scope="module")
def plane():
    """a at the origin, b and c on the unit axes."""
    vocab = Vocabulary(["a", "b", "c"])
    matrix = np.array([[0, 0], [0, 0], [0, 0], [1, 0], [0, 1]], dtype=np.float64)
    return EmbeddingTable(matrix, vocab)


def make_spec(resources, **budgets):
    rules = tuple((builtin(name, resources), delta) for name, delta in budgets.items())
    return TransformSpec(rules=rules)


class TestIntervalTensor:
    """Test the box type."""

    def test_invalid_bounds(self):
        """Lower bounds may not exceed upper bounds."""
        with pytest.raises(AbstractionError):
            IntervalTensor(np.ones(2), np.zeros(2))
        with pytest.raises(AbstractionError):
            IntervalTensor(np.zeros(2), np.array([1.0, np.inf]))

    def test_point_box(self):
        """A point box is degenerate with zero radius."""
        box = IntervalTensor.point(np.array([[1.0, 2.0]]))
        assert box.is_degenerate()
        assert np.all(box.radius == 0)
        assert contains(box, np.array([[1.0, 2.0]]))

    def test_pad_and_truncate(self):
        """Padding appends zero rows and keeps the real length."""
        box = IntervalTensor(np.zeros((2, 3)), np.ones((2, 3)))
        padded = box.pad_to(4)
        assert padded.shape == (4, 3)
        assert padded.length == 2
        assert np.all(padded.upper[2:] == 0)
        assert box.pad_to(1).shape == (1, 3)

    def test_contains(self):
        """Containment with tolerance; shapes must agree."""
        box = IntervalTensor(np.zeros(2), np.ones(2))
        assert contains(box, np.array([0.5, 1.0]))
        assert not contains(box, np.array([0.5, 1.1]))
        assert contains(box, np.array([0.5, 1.05]), tolerance=0.1)
        with pytest.raises(AbstractionError):
            contains(box, np.zeros(3))


class TestHull:
    """Test the dilated hull box."""

    def test_single_substitution_box(self, adjacent_resources, plane):
        """One substitution: each position spans its own neighbours."""
        spec = make_spec(adjacent_resources, SubAdj=1)
        box = abstract_space(spec, ("a", "a"), plane)
        assert box.lower.tolist() == [[0, 0], [0, 0]]
        assert box.upper.tolist() == [[1, 1], [1, 1]]

    def test_dilation(self, adjacent_resources, plane):
        """Budget two doubles the reach of each vertex."""
        spec = make_spec(adjacent_resources, SubAdj=2)
        assert dilation(spec) == 2
        box = abstract_space(spec, ("a", "a"), plane)
        assert box.upper.tolist() == [[2, 2], [2, 2]]
        for z in enumerate_space(spec, ("a", "a")):
            assert contains(box, plane.embed(z))

    def test_dilation_can_go_negative(self, adjacent_resources, plane):
        """Vertices extend past E(x) away from the base point."""
        spec = make_spec(adjacent_resources, SubAdj=2)
        box = abstract_space(spec, ("b",), plane)
        assert box.lower.tolist() == [[-1, 0]]
        assert box.upper.tolist() == [[1, 0]]

    def test_swap_vertices(self, adjacent_resources, plane):
        """A swap moves two positions at once."""
        spec = make_spec(adjacent_resources, SwapPair=1)
        vertices = hull_vertices(spec, ("b", "c"), plane)
        assert vertices.strings == (("c", "b"),)
        box = abstract_space(spec, ("b", "c"), plane)
        assert box.lower.tolist() == [[0, 0], [0, 0]]
        assert box.upper.tolist() == [[1, 1], [1, 1]]
        assert np.array_equal(vertices.box().lower, box.lower)
        assert np.array_equal(vertices.box().upper, box.upper)

    def test_zero_budget_is_a_point(self, adjacent_resources, plane):
        """Without budget the box is E(x)."""
        spec = make_spec(adjacent_resources, SubAdj=0)
        box = abstract_space(spec, ("a", "b"), plane)
        assert box.is_degenerate()
        assert np.array_equal(box.lower, plane.embed(("a", "b")))
        assert abstract_space(spec.subset(()), ("a", "b"), plane).is_degenerate()

    def test_length_changing_rule_rejected(self, adjacent_resources, plane):
        """Deletion cannot be abstracted."""
        spec = make_spec(adjacent_resources, Del=1)
        with pytest.raises(AbstractionError):
            abstract_space(spec, ("a",), plane)

    def test_batch(self, adjacent_resources, plane):
        """Boxes are padded to max_len with a length mask."""
        spec = make_spec(adjacent_resources, SubAdj=1)
        lower, upper, mask = abstract_batch(spec, [("a",), ("a", "b", "c")], plane, max_len=4)
        assert lower.shape == upper.shape == (2, 4, 2)
        assert mask.tolist() == [[1, 0, 0, 0], [1, 1, 1, 0]]
        assert np.all(upper[0, 1:] == 0)


class TestWorkedBoxes:
    """Exact boxes for small hand-computed spaces."""

    NEIGHBOURS = """
alphabet: char
resources:
  tables:
    prev: {c: [b]}
    succ: {c: [d]}
rules:
  - name: Prev
    custom: {pattern: c, replacer: substitute, table: prev}
    delta: 1
  - name: Succ
    custom: {pattern: c, replacer: substitute, table: succ}
    delta: 1
"""

    SHIFT = """
alphabet: char
resources:
  tables:
    shift: {a: [z], b: [g]}
rules:
  - name: Shift
    custom: {pattern: $shift, replacer: substitute, table: shift}
    delta: 2
"""

    @pytest.fixture
    def line(self):
        """b, c and d on a line at -0.5, 0 and 0.5."""
        vocab = Vocabulary(["b", "c", "d"])
        matrix = np.array([[0.0], [0.0], [-0.5], [0.0], [0.5]])
        return EmbeddingTable(matrix, vocab)

    def test_two_neighbour_rules(self, line):
        """Budget 1 + 1 dilates each single step to +-1."""
        spec = parse_spec(self.NEIGHBOURS)
        x = ("c", "c")
        vertices = hull_vertices(spec, x, line)
        assert vertices.dilation == 2
        points = {tuple(v.ravel().tolist()) for v in vertices.vertices}
        assert points == {(-1.0, 0.0), (1.0, 0.0), (0.0, -1.0), (0.0, 1.0)}

        box = abstract_space(spec, x, line)
        assert box.lower.tolist() == [[-1.0], [-1.0]]
        assert box.upper.tolist() == [[1.0], [1.0]]
        for z in (("b", "d"), ("d", "b")):
            assert z in set(enumerate_space(spec, x))
            assert contains(box, line.embed(z))

    def test_one_rule_applied_twice(self):
        """A budget of two reaches the string with both tokens replaced."""
        spec = parse_spec(self.SHIFT)
        vocab = Vocabulary(["a", "b", "g", "z"])
        matrix = np.array([[0, 0], [0, 0], [0, 0], [1, 1], [3, -1], [-2, 2]], dtype=np.float64)
        emb = EmbeddingTable(matrix, vocab)
        x = ("a", "b")
        assert set(enumerate_space(spec, x)) == {("a", "b"), ("z", "b"), ("a", "g"), ("z", "g")}
        box = abstract_space(spec, x, emb)
        assert box.lower.tolist() == [[-4, 0], [1, -3]]
        assert box.upper.tolist() == [[0, 4], [5, 1]]
        assert contains(box, emb.embed(("z", "g")))


class TestSoundness:
    """The box contains every embedded perturbation."""

    @hypothesis_settings(max_examples=500, deadline=None)
    @given(
        tokens=st.lists(st.sampled_from("abc"), min_size=1, max_size=5),
        subs=st.integers(0, 2),
        swaps=st.integers(0, 2),
        seed=st.integers(0, 10 ** 6),
    )
    def test_box_contains_space(self, adjacent_resources, tokens, subs, swaps, seed):
        """E(z) lies in the box for every z in S(x)."""
        vocab = Vocabulary(["a", "b", "c"])
        matrix = np.random.default_rng(seed).normal(size=(len(vocab), 3))
        emb = EmbeddingTable(matrix, vocab)
        spec = make_spec(adjacent_resources, SubAdj=subs, SwapPair=swaps)
        x = tuple(tokens)
        box = abstract_space(spec, x, emb)
        for z in enumerate_space(spec, x):
            assert contains(box, emb.embed(z))


class TestPrefixTargets:
    """Prefix limits carried through length-changing augmentation."""

    SHIFTED = {"a": ("q",), "c": ("x",)}

    @pytest.fixture
    def shifted_resources(self):
        return ResourceTables(tables={ADJACENCY_TABLE: self.SHIFTED})

    @pytest.fixture
    def letters(self):
        vocab = Vocabulary(["a", "b", "c", "q", "x"])
        return EmbeddingTable(np.random.default_rng(3).normal(size=(len(vocab), 3)), vocab)

    def test_prefix_image(self):
        """Insertions and deletions left of the prefix end move it."""
        insert = Application(Match(0, 0, 0), 0, ("a", "q"))
        delete = Application(Match(1, 1, 0), 0, ())
        beyond = Application(Match(4, 4, 0), 0, ("c", "x"))
        straddle = Application(Match(2, 3, 0), 0, ("d", "e", "f"))
        assert prefix_image(3, MatchPlan()) == 3
        assert prefix_image(3, MatchPlan((insert,))) == 4
        assert prefix_image(3, MatchPlan((insert, delete))) == 3
        assert prefix_image(3, MatchPlan((delete, beyond))) == 2
        assert prefix_image(3, MatchPlan((straddle,))) == 5
        assert prefix_image(1, MatchPlan((Application(Match(0, 0, 0), 0, ()),))) == 1

    def test_candidate_spec(self, shifted_resources):
        """Without a prefix limit the spec is returned as is."""
        spec = make_spec(shifted_resources, SubAdj=1)
        plan = MatchPlan((Application(Match(0, 0, 0), 0, ("a", "q")),))
        assert candidate_spec(spec, plan) is spec
        assert candidate_spec(replace(spec, prefix_len=3), plan).prefix_len == 4
        assert candidate_spec(replace(spec, prefix_len=3), None).prefix_len == 3

    def test_targets_without_prefix(self, adjacent_resources):
        """Each string of S_aug(x) is paired with the unchanged S_abs."""
        spec_aug = make_spec(adjacent_resources, SwapPair=1)
        spec_abs = make_spec(adjacent_resources, SubAdj=1)
        targets = abstraction_targets(spec_aug, spec_abs, ("a", "b", "c"))
        assert [z for z, _ in targets] == list(enumerate_space(spec_aug, ("a", "b", "c")))
        assert all(s is spec_abs for _, s in targets)

    def test_targets_follow_insertion(self, shifted_resources):
        """After inserting q the prefix covers the shifted c."""
        full = replace(make_spec(shifted_resources, InsAdj=1, SubAdj=1), prefix_len=3)
        targets = dict(abstraction_targets(full.subset(["InsAdj"]), full.subset(["SubAdj"]), ("a", "b", "c")))
        assert set(targets) == {("a", "b", "c"), ("a", "q", "b", "c"), ("a", "b", "c", "x")}
        assert targets[("a", "b", "c")].prefix_len == 3
        assert targets[("a", "q", "b", "c")].prefix_len == 4
        assert targets[("a", "b", "c", "x")].prefix_len == 4

    def test_targets_respect_limit(self, shifted_resources):
        """The limit counts distinct strings."""
        full = replace(make_spec(shifted_resources, InsAdj=1, SubAdj=1), prefix_len=3)
        targets = abstraction_targets(full.subset(["InsAdj"]), full.subset(["SubAdj"]), ("a", "b", "c"), limit=2)
        assert len(targets) == 2

    def test_boxes_cover_full_space(self, shifted_resources, letters):
        """Every z in S(x) lies in the box of a same-length target."""
        full = replace(make_spec(shifted_resources, InsAdj=1, SubAdj=1), prefix_len=3)
        x = ("a", "b", "c")
        boxes = [
            abstract_space(spec, z, letters)
            for z, spec in abstraction_targets(full.subset(["InsAdj"]), full.subset(["SubAdj"]), x)
        ]
        space = list(enumerate_space(full, x))
        assert ("a", "q", "b", "x") in space
        for w in space:
            point = letters.embed(w)
            assert any(box.length == len(w) and contains(box, point) for box in boxes), w

    @hypothesis_settings(max_examples=100, deadline=None)
    @given(
        tokens=st.lists(st.sampled_from("abc"), min_size=1, max_size=5),
        inserts=st.integers(0, 2),
        deletes=st.integers(0, 1),
        subs=st.integers(0, 2),
        prefix=st.integers(1, 5),
        seed=st.integers(0, 10 ** 6),
    )
    def test_mixed_space_soundness(self, adjacent_resources, tokens, inserts, deletes, subs, prefix, seed):
        """Boxes around S_aug(x) cover S(x) under any prefix limit."""
        vocab = Vocabulary(["a", "b", "c"])
        emb = EmbeddingTable(np.random.default_rng(seed).normal(size=(len(vocab), 2)), vocab)
        full = replace(make_spec(adjacent_resources, InsAdj=inserts, Del=deletes, SubAdj=subs), prefix_len=prefix)
        x = tuple(tokens)
        boxes = [
            abstract_space(spec, z, emb)
            for z, spec in abstraction_targets(full.subset(["InsAdj", "Del"]), full.subset(["SubAdj"]), x)
        ]
        for w in enumerate_space(full, x):
            point = emb.embed(w)
            assert any(box.length == len(w) and contains(box, point) for box in boxes)


class TestProvenance:
    """Gradients of the box bounds w.r.t. the embedding table."""

    def test_embedding_grad_matches_finite_differences(self, adjacent_resources):
        """The provenance scatter is the exact gradient of the bounds."""
        vocab = Vocabulary(["a", "b", "c"])
        rng = np.random.default_rng(1)
        matrix = rng.normal(size=(len(vocab), 3))
        emb = EmbeddingTable(matrix, vocab)
        spec = make_spec(adjacent_resources, SubAdj=2, SwapPair=1)
        x = ("a", "c", "b", "a")
        box, provenance = abstract_space(spec, x, emb, with_provenance=True)
        grad_lower = rng.normal(size=box.shape)
        grad_upper = rng.normal(size=box.shape)
        analytic = provenance.embedding_grad(grad_lower, grad_upper, len(vocab))

        def objective():
            current = abstract_space(spec, x, emb)
            return float(np.sum(grad_lower * current.lower) + np.sum(grad_upper * current.upper))

        eps = 1e-6
        for row in (2, 3, 4):
            for col in range(3):
                old = matrix[row, col]
                matrix[row, col] = old + eps
                plus = objective()
                matrix[row, col] = old - eps
                minus = objective()
                matrix[row, col] = old
                assert analytic[row, col] == pytest.approx((plus - minus) / (2 * eps), rel=1e-5, abs=1e-8)
