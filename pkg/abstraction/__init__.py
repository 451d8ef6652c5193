# =============================================================================
# A3T Desk - Abstraction
# =============================================================================
"""
Interval over-approximation of length-preserving perturbation spaces.

Usage:
    from abstraction import abstract_space, contains

    box = abstract_space(spec_abs, x, clf.embeddings)
    assert contains(box, clf.embeddings.embed(z))
"""

from abstraction.interval import AbstractionError, IntervalTensor, contains
from abstraction.hull import (
    BoxProvenance,
    HullVertexSet,
    abstract_batch,
    abstract_space,
    abstraction_targets,
    candidate_spec,
    check_length_preserving,
    dilation,
    hull_vertices,
    prefix_image,
)

__all__ = [
    'AbstractionError', 'IntervalTensor', 'contains',
    'BoxProvenance', 'HullVertexSet', 'abstract_batch', 'abstract_space',
    'abstraction_targets', 'candidate_spec', 'check_length_preserving', 'dilation',
    'hull_vertices', 'prefix_image',
]
