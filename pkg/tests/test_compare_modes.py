# =============================================================================
# Desk-Scale Robustness Comparison Tests
# =============================================================================
"""
Tests for scripts/compare_modes.py. The full comparison trains every method on
five seeds and is marked slow.

Run with: pytest tests/test_compare_modes.py -v -m slow
"""

import pytest
import sys
import os

# Add project root and scripts/ to path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)
sys.path.insert(0, os.path.join(project_root, "scripts"))

from compare_modes import MODES, format_table, run_comparison, run_seed


class TestTable:
    """Test the summary table."""

    def test_format(self):
        """One header and one row per mode."""
        table = format_table({"normal": {"normal": 0.9, "exhaustive": 0.5}})
        assert table.splitlines() == ["mode\tnormal\texhaustive", "normal\t0.9000\t0.5000"]


class TestSingleSeed:
    """Test one short seed."""

    def test_runs_every_requested_mode(self):
        """Each mode reports accuracies in [0, 1] with exhaustive <= normal."""
        results = run_seed(0, n=60, epochs=1, modes=("normal", "a3t-search"))
        assert set(results) == {"normal", "a3t-search"}
        for metrics in results.values():
            assert 0.0 <= metrics["exhaustive"] <= metrics["normal"] <= 1.0


@pytest.mark.slow
class TestDirectional:
    """Abstraction-augmented training beats normal training on exhaustive accuracy."""

    def test_a3t_search_beats_normal(self):
        """a3t-search exceeds normal training by at least five points over five seeds."""
        summary = run_comparison(seeds=(0, 1, 2, 3, 4), n=600, epochs=10, modes=MODES)
        assert summary["a3t-search"]["exhaustive"] >= summary["normal"]["exhaustive"] + 0.05
        for mode in ("random-aug", "hotflip-aug"):
            assert summary[mode]["exhaustive"] >= summary["normal"]["exhaustive"]
