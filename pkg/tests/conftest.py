# =============================================================================
# Shared Test Fixtures
# =============================================================================
"""
Fixtures shared across the test modules: shipped resources, the synthetic
keyboard task and a tiny float64 classifier built on it.
"""

import pytest
import sys
import os

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from pathlib import Path

from config import settings
from corpus.synthetic import make_keyboard_task
from dsl.parser import parse_inline_spec
from dsl.resources import ResourceTables
from train.trainer import build_classifier


@pytest.fixture(scope="session")
def resources():
    """Tables and classes shipped under data/."""
    return ResourceTables.load(Path(settings.BASE_DIR) / "data")


@pytest.fixture(scope="session")
def keyboard_task():
    """40 keyboard examples of 8 symbols."""
    return make_keyboard_task(40, length=8, seed=0)


@pytest.fixture(scope="session")
def keyboard_spec(keyboard_task):
    """{(SwapPair, 1), (SubAdj, 1)} over the keyboard adjacency."""
    return parse_inline_spec("{SwapPair:1, SubAdj:1}", keyboard_task.resources)


@pytest.fixture
def tiny_classifier(keyboard_task):
    """Untrained float64 model small enough for exact gradient checks."""
    return build_classifier(
        keyboard_task.dataset,
        keyboard_task.resources,
        max_len=keyboard_task.length,
        seed=0,
        dtype="float64",
        embed_dim=4,
        kernels=3,
        width=3,
        pool=2,
    )


# Seed and architecture overrides for gradient and bound checks.
MODEL_VARIANTS = {
    "conv": {"seed": 0, "embed_dim": 4, "kernels": 3, "width": 3, "pool": 2},
    "conv-fc": {"seed": 1, "embed_dim": 3, "kernels": 2, "width": 2, "pool": 3, "hidden": [3]},
    "conv-deep": {"seed": 2, "embed_dim": 5, "kernels": 4, "width": 4, "pool": 1, "hidden": [4, 3]},
}


def variant_model(keyboard_task, name, seed=None):
    """Float64 classifier for one of MODEL_VARIANTS, optionally reseeded."""
    overrides = dict(MODEL_VARIANTS[name])
    default_seed = overrides.pop("seed")
    seed = default_seed if seed is None else seed
    return build_classifier(
        keyboard_task.dataset,
        keyboard_task.resources,
        max_len=keyboard_task.length,
        seed=seed,
        dtype="float64",
        **overrides,
    )


@pytest.fixture(params=list(MODEL_VARIANTS))
def variant_classifier(request, keyboard_task):
    """Untrained float64 models over several seeds and architectures."""
    return variant_model(keyboard_task, request.param)
