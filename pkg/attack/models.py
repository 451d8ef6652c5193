# =============================================================================
# A3T Desk - Attack Models
# =============================================================================
"""
Result types shared by the concrete adversaries.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from dsl.models import AlphabetMode, TokenString
from perturb.matching import detokenize
from perturb.models import MatchPlan


@dataclass(frozen=True)
class Candidate:
    """A perturbed string, its concrete loss and the plan that produced it."""
    tokens: TokenString
    loss: float
    plan: MatchPlan = field(default_factory=MatchPlan)

    def to_dict(self, alphabet: Optional[AlphabetMode] = None) -> Dict:
        return {
            "text": detokenize(self.tokens, alphabet) if alphabet is not None else list(self.tokens),
            "loss": self.loss,
            "plan": self.plan.to_dict(),
        }


@dataclass
class AttackResult:
    """Top-k candidates, sorted by descending loss, with search statistics."""
    candidates: List[Candidate]
    nodes_expanded: int = 0
    forward_passes: int = 0

    def __len__(self) -> int:
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    @property
    def worst(self) -> Candidate:
        return self.candidates[0]

    @property
    def strings(self) -> List[TokenString]:
        return [candidate.tokens for candidate in self.candidates]

    def to_dict(self, alphabet: Optional[AlphabetMode] = None) -> Dict:
        return {
            "candidates": [candidate.to_dict(alphabet) for candidate in self.candidates],
            "nodes_expanded": self.nodes_expanded,
            "forward_passes": self.forward_passes,
        }


@dataclass
class AttackRecord:
    """Per-example attack report."""
    original: TokenString
    label: int
    worst: TokenString
    loss_before: float
    loss_after: float
    prediction_before: int
    prediction_after: int

    @property
    def flipped(self) -> bool:
        return self.prediction_before != self.prediction_after

    def to_dict(self, alphabet: AlphabetMode) -> Dict:
        return {
            "original": detokenize(self.original, alphabet),
            "label": self.label,
            "worst": detokenize(self.worst, alphabet),
            "loss_before": self.loss_before,
            "loss_after": self.loss_after,
            "prediction_before": self.prediction_before,
            "prediction_after": self.prediction_after,
            "flipped": self.flipped,
        }
