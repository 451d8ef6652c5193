# =============================================================================
# A3T Desk - Interval Bound Propagation
# =============================================================================
"""
Sound logit bounds for interval boxes, the abstract loss, certification.

Usage:
    from ibp import propagate, abstract_loss

    bounds = propagate(clf.model, box)
    loss = abstract_loss(clf.model, box, y)
"""

from ibp.transfer import BoundError, transfer, transfer_backward
from ibp.propagate import LogitBounds, backpropagate, propagate, propagate_batch
from ibp.loss import (
    abstract_loss,
    abstract_loss_and_grads,
    abstract_losses,
    worst_case_batch,
    worst_case_logits,
)
from ibp.certify import CertifyResult, Verdict, certify_dataset, certify_example, interval_margins

__all__ = [
    'BoundError', 'transfer', 'transfer_backward',
    'LogitBounds', 'backpropagate', 'propagate', 'propagate_batch',
    'abstract_loss', 'abstract_loss_and_grads', 'abstract_losses',
    'worst_case_batch', 'worst_case_logits',
    'CertifyResult', 'Verdict', 'certify_dataset', 'certify_example', 'interval_margins',
]
