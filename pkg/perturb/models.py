# =============================================================================
# A3T Desk - Perturbation Space Models
# =============================================================================
"""
Data models for perturbation-space semantics.

A perturbed string is described by a match plan: a sorted, non-overlapping
set of applications, each replacing the span of one match by one of the
strings its rule's replacer produces for that span.

Spans are 0-based and inclusive: ``Match(l, r, j)`` covers ``x[l..r]``.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Tuple

from dsl.models import TokenString


# =============================================================================
# Errors
# =============================================================================

class PlanError(ValueError):
    """A match plan is not valid for the given string and spec."""


class SpaceBudgetExceeded(ValueError):
    """A perturbation space is larger than the configured enumeration budget."""

    def __init__(self, message: str, budget: int = 0):
        self.budget = budget
        super().__init__(message)


class PlanCountOverflow(ValueError):
    """The positions x residual-budget state space exceeds the configured bound."""


class OracleBoundExceeded(ValueError):
    """Too many matches for brute-force subset enumeration."""


# =============================================================================
# Matches and Plans
# =============================================================================

@dataclass(frozen=True, order=True)
class Match:
    """A span ``x[l..r]`` (inclusive) that satisfies rule ``rule_index``'s pattern."""
    l: int
    r: int
    rule_index: int

    @property
    def length(self) -> int:
        return self.r - self.l + 1

    def overlaps(self, other: "Match") -> bool:
        return not (self.r < other.l or other.r < self.l)

    def to_dict(self) -> Dict:
        return {"l": self.l, "r": self.r, "rule": self.rule_index}


@dataclass(frozen=True, order=True)
class Application:
    """A match together with the chosen replacement (``choice`` indexes the replacer output)."""
    match: Match
    choice: int
    replacement: TokenString = field(compare=False)

    def to_dict(self) -> Dict:
        return {**self.match.to_dict(), "choice": self.choice, "replacement": list(self.replacement)}


@dataclass(frozen=True)
class MatchPlan:
    """Sorted sequence of applications; the empty plan materialises ``x`` itself."""
    applications: Tuple[Application, ...] = ()

    def __len__(self) -> int:
        return len(self.applications)

    def __iter__(self):
        return iter(self.applications)

    @property
    def is_empty(self) -> bool:
        return not self.applications

    def rule_counts(self) -> Counter:
        """Number of applications per rule index."""
        return Counter(app.match.rule_index for app in self.applications)

    def extended(self, application: Application) -> "MatchPlan":
        """Copy with one more application, kept sorted."""
        return MatchPlan(tuple(sorted(self.applications + (application,))))

    def to_dict(self) -> Dict:
        return {"applications": [app.to_dict() for app in self.applications]}
