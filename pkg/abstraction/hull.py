# =============================================================================
# A3T Desk - Dilated Convex Hull Abstraction
# =============================================================================
"""
Over-approximate the embeddings of a perturbation space by an interval box.

For a spec of length-preserving rules with total budget D = d1 + ... + dn,
every single application x_i (one rule applied once at one match) gives a
vertex

    v_i = E(x) + D * (E(x_i) - E(x))

and the convex hull of {E(x)} u {v_i} contains E(z) for every z in S(x).
The box is the elementwise min/max of those points. Each v_i differs from
E(x) only inside its match span, so the box is built span by span without
materialising full vertex tensors.

Dilating by the full D over-widens when matches cannot co-occur (overlaps);
the box stays sound.
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from abstraction.interval import AbstractionError, IntervalTensor
from corpus.embeddings import EmbeddingTable
from dsl.models import TokenString, TransformSpec
from perturb.matching import materialize
from perturb.models import MatchPlan
from perturb.space import enumerate_plans, enumerate_space, single_application_union, single_applications

logger = logging.getLogger(__name__)


def check_length_preserving(spec: TransformSpec) -> None:
    """Raise AbstractionError naming the first rule that can change length."""
    for rule, _ in spec.rules:
        if not rule.length_preserving:
            raise AbstractionError(
                f"rule '{rule.name}' is not length-preserving and cannot be abstracted"
            )


def dilation(spec: TransformSpec) -> int:
    """Total budget of the abstracted rules."""
    return sum(delta for _, delta in spec.rules if delta > 0)


@dataclass(frozen=True)
class HullVertexSet:
    """Base point E(x), dilated vertices and the dilation factor."""
    base: np.ndarray
    vertices: np.ndarray
    dilation: int
    strings: Tuple[TokenString, ...] = ()

    def box(self) -> IntervalTensor:
        points = np.concatenate([self.base[None], self.vertices], axis=0)
        return IntervalTensor(points.min(axis=0), points.max(axis=0))


def hull_vertices(spec_abs: TransformSpec, x: TokenString, emb: EmbeddingTable) -> HullVertexSet:
    """Explicit vertices v_i for every string of the single-application union."""
    check_length_preserving(spec_abs)
    x = tuple(x)
    base = emb.embed(x)
    factor = dilation(spec_abs)
    strings = tuple(single_application_union(spec_abs, x))
    vertices = np.array([base + factor * (emb.embed(s) - base) for s in strings]).reshape(
        (len(strings),) + base.shape
    )
    return HullVertexSet(base=base, vertices=vertices, dilation=factor, strings=strings)


@dataclass
class BoxProvenance:
    """
    Which point attains each bound, for gradients w.r.t. the embedding table.

    ``lower_source[t, c]`` is -1 when the lower bound at (t, c) is E(x)[t, c]
    and otherwise the id of the replacement token whose vertex attains it.
    """
    base_ids: np.ndarray
    lower_source: np.ndarray
    upper_source: np.ndarray
    dilation: int

    def truncate(self, max_len: int) -> "BoxProvenance":
        return BoxProvenance(
            self.base_ids[:max_len], self.lower_source[:max_len], self.upper_source[:max_len], self.dilation
        )

    def embedding_grad(self, grad_lower: np.ndarray, grad_upper: np.ndarray, vocab_size: int) -> np.ndarray:
        """
        Scatter bound gradients (rows, d) back onto the embedding table.

        A bound attained by vertex v = (1 - D) E(x_t) + D E(s_t) sends
        (1 - D) of its gradient to x_t's row and D to s_t's row.
        """
        rows = len(self.base_ids)
        grad = np.zeros((vocab_size, grad_lower.shape[1]), dtype=np.float64)
        for g, source in ((grad_lower[:rows], self.lower_source), (grad_upper[:rows], self.upper_source)):
            base_coef = np.where(source < 0, 1.0, 1.0 - self.dilation)
            np.add.at(grad, self.base_ids, g * base_coef)
            t, c = np.nonzero(source >= 0)
            np.add.at(grad, (source[t, c], c), self.dilation * g[t, c])
        return grad


def abstract_space(
    spec_abs: TransformSpec,
    x: TokenString,
    emb: EmbeddingTable,
    with_provenance: bool = False,
):
    """
    Interval box over the embeddings of S_abs(x).

    Args:
        spec_abs: Spec whose rules are all length-preserving
        x: Original string
        emb: Embedding table
        with_provenance: Also return a BoxProvenance

    Returns:
        IntervalTensor of shape (len(x), d), or (box, provenance)

    Raises:
        AbstractionError: a rule in ``spec_abs`` is not length-preserving
    """
    check_length_preserving(spec_abs)
    x = tuple(x)
    base = emb.embed(x)
    factor = dilation(spec_abs)
    lower, upper = base.copy(), base.copy()
    lower_source = np.full(base.shape, -1, dtype=np.int64)
    upper_source = np.full(base.shape, -1, dtype=np.int64)

    for app in single_applications(spec_abs, x):
        l, r = app.match.l, app.match.r
        if len(app.replacement) != r - l + 1:
            raise AbstractionError(f"replacement {app.replacement!r} changes the length of span ({l}, {r})")
        segment = base[l:r + 1]
        vertex = segment + factor * (emb.embed(app.replacement) - segment)
        ids = emb.vocab.encode(app.replacement)[:, None]

        below = vertex < lower[l:r + 1]
        lower[l:r + 1] = np.where(below, vertex, lower[l:r + 1])
        lower_source[l:r + 1] = np.where(below, ids, lower_source[l:r + 1])

        above = vertex > upper[l:r + 1]
        upper[l:r + 1] = np.where(above, vertex, upper[l:r + 1])
        upper_source[l:r + 1] = np.where(above, ids, upper_source[l:r + 1])

    box = IntervalTensor(lower, upper, len(x))
    if with_provenance:
        provenance = BoxProvenance(emb.vocab.encode(x), lower_source, upper_source, factor)
        return box, provenance
    return box


def prefix_image(prefix_len: int, plan: MatchPlan) -> int:
    """
    Length of the image of ``x[:prefix_len]`` in the string materialised by ``plan``.

    Applications left of the prefix end shift it by their length change; an
    application straddling it extends the image to the end of its replacement.
    """
    shift = 0
    for app in plan:
        if app.match.r < prefix_len:
            shift += len(app.replacement) - app.match.length
        elif app.match.l < prefix_len:
            return max(1, app.match.l + shift + len(app.replacement))
        else:
            break
    return max(1, prefix_len + shift)


def candidate_spec(spec_abs: TransformSpec, plan: Optional[MatchPlan]) -> TransformSpec:
    """``spec_abs`` with its prefix moved onto the string ``plan`` produced."""
    if spec_abs.prefix_len is None or plan is None:
        return spec_abs
    return replace(spec_abs, prefix_len=prefix_image(spec_abs.prefix_len, plan))


def abstraction_targets(
    spec_aug: TransformSpec,
    spec_abs: TransformSpec,
    x: TokenString,
    limit: Optional[int] = None,
) -> List[Tuple[TokenString, TransformSpec]]:
    """
    Every z in S_aug(x) paired with the spec to abstract around it.

    Without a prefix limit the pair is just (z, spec_abs). With one, the
    S_abs prefix is mapped through the plans that produce z, keeping the
    widest image when several plans give the same string, so S_abs matches
    on untouched prefix tokens of x stay reachable after insertions or
    deletions shift them.

    Args:
        limit: Stop after this many distinct strings
    """
    x = tuple(x)
    if spec_abs.prefix_len is None:
        return [(z, spec_abs) for z in enumerate_space(spec_aug, x, limit=limit)]

    prefixes: Dict[TokenString, int] = {}
    for plan in enumerate_plans(spec_aug, x):
        z = materialize(x, plan)
        image = prefix_image(spec_abs.prefix_len, plan)
        if z in prefixes:
            prefixes[z] = max(prefixes[z], image)
            continue
        if limit is not None and len(prefixes) >= limit:
            break
        prefixes[z] = image
    return [(z, replace(spec_abs, prefix_len=p)) for z, p in prefixes.items()]


def abstract_batch(
    spec_abs: Union[TransformSpec, Sequence[TransformSpec]],
    strings: List[TokenString],
    emb: EmbeddingTable,
    max_len: int,
    with_provenance: bool = False,
):
    """
    Boxes for several strings, truncated and padded to ``max_len``.

    Args:
        spec_abs: One spec for every string, or one per string

    Returns:
        (lower, upper, mask) arrays of shapes (n, max_len, d) and
        (n, max_len), plus the provenances when requested
    """
    specs = [spec_abs] * len(strings) if isinstance(spec_abs, TransformSpec) else list(spec_abs)
    if len(specs) != len(strings):
        raise AbstractionError(f"{len(specs)} specs given for {len(strings)} strings")
    lowers, uppers, provenances = [], [], []
    mask = np.zeros((len(strings), max_len), dtype=emb.matrix.dtype)
    for row, (tokens, spec) in enumerate(zip(strings, specs)):
        result = abstract_space(spec, tokens, emb, with_provenance=with_provenance)
        box, provenance = result if with_provenance else (result, None)
        box = box.pad_to(max_len)
        lowers.append(box.lower)
        uppers.append(box.upper)
        mask[row, :box.length] = 1.0
        if provenance is not None:
            provenances.append(provenance.truncate(max_len))
    dim = emb.dim
    lower = np.array(lowers).reshape(len(strings), max_len, dim)
    upper = np.array(uppers).reshape(len(strings), max_len, dim)
    if with_provenance:
        return lower, upper, mask, provenances
    return lower, upper, mask
