# =============================================================================
# A3T Desk - Concrete Attacks
# =============================================================================
"""
Concrete adversaries over a perturbation space: HotFlip-style beam search
and exhaustive search. Used for augmentation training and for HotFlip
accuracy.

Usage:
    from attack import hotflip_beam, exhaustive_attack

    top = hotflip_beam(clf, spec_aug, x, y, k=2)
"""

from attack.models import AttackRecord, AttackResult, Candidate
from attack.search import exhaustive_attack
from attack.hotflip import hotflip_accuracy, hotflip_beam, robust_to_attack
from attack.report import ATTACK_METHODS, attack_dataset, attack_example, run_attack

__all__ = [
    'AttackRecord', 'AttackResult', 'Candidate',
    'exhaustive_attack',
    'hotflip_accuracy', 'hotflip_beam', 'robust_to_attack',
    'ATTACK_METHODS', 'attack_dataset', 'attack_example', 'run_attack',
]
