# =============================================================================
# A3T Desk - Perturbation Space Enumeration
# =============================================================================
"""
The perturbation space S(x) of a specification.

A string z is in S(x) when it results from replacing a set of
non-overlapping matches of x (at most delta_j of rule j) by replacer outputs.
Transformations only ever match the original string, never a replacement.

Provides:
- enumerate_plans / enumerate_space: lazy, lexicographic, deduplicated
- count_plans: dynamic programming over positions x residual budgets
- sample_sequential: the rule-by-rule random augmentation sampler
- oracle_enumerate / oracle_plan_count: brute-force reference semantics
- single_applications / single_application_union: one application at a time
- find_plan / is_member: membership by plan search
"""

import itertools
import logging
from typing import Dict, Iterator, List, Optional, Set, Tuple, Union

import numpy as np

from config import settings
from dsl.models import TokenString, TransformSpec
from perturb.matching import find_matches, materialize, replacements
from perturb.models import (
    Application,
    Match,
    MatchPlan,
    OracleBoundExceeded,
    PlanCountOverflow,
    SpaceBudgetExceeded,
)

logger = logging.getLogger(__name__)


# =============================================================================
# Enumeration
# =============================================================================

def enumerate_plans(spec: TransformSpec, x: TokenString) -> Iterator[MatchPlan]:
    """
    Lazily yield every valid match plan, the empty plan first.

    Plans come in lexicographic order of their (sorted) matches and
    replacement indices, so the stream is deterministic.
    """
    x = tuple(x)
    matches = find_matches(spec, x)
    options = [replacements(spec, x, match) for match in matches]

    def extend(start: int, min_l: int, remaining: Tuple[int, ...], current: Tuple[Application, ...]):
        yield MatchPlan(current)
        for i in range(start, len(matches)):
            match = matches[i]
            if match.l < min_l or remaining[match.rule_index] == 0:
                continue
            left = remaining[:match.rule_index] + (remaining[match.rule_index] - 1,) + remaining[match.rule_index + 1:]
            for choice, replacement in enumerate(options[i]):
                app = Application(match=match, choice=choice, replacement=replacement)
                yield from extend(i + 1, match.r + 1, left, current + (app,))

    yield from extend(0, 0, spec.budgets, ())


def enumerate_space(spec: TransformSpec, x: TokenString, limit: Optional[int] = None) -> Iterator[TokenString]:
    """
    Lazily yield every distinct string of S(x) exactly once, ``x`` first.

    Args:
        spec: Transformation specification
        x: Original string
        limit: Stop after this many distinct strings
    """
    x = tuple(x)
    seen: Set[TokenString] = set()
    for plan in enumerate_plans(spec, x):
        z = materialize(x, plan)
        if z in seen:
            continue
        seen.add(z)
        yield z
        if limit is not None and len(seen) >= limit:
            return


def enumerate_with_plans(
    spec: TransformSpec,
    x: TokenString,
    max_space: Optional[int] = None,
) -> List[Tuple[TokenString, MatchPlan]]:
    """
    Materialise S(x) with the first plan producing each string.

    Raises:
        SpaceBudgetExceeded: more than ``max_space`` distinct strings
    """
    x = tuple(x)
    seen: Dict[TokenString, MatchPlan] = {}
    for plan in enumerate_plans(spec, x):
        z = materialize(x, plan)
        if z in seen:
            continue
        seen[z] = plan
        if max_space is not None and len(seen) > max_space:
            raise SpaceBudgetExceeded(
                f"perturbation space exceeds {max_space} strings", budget=max_space
            )
    return list(seen.items())


def count_strings(spec: TransformSpec, x: TokenString, max_space: Optional[int] = None) -> int:
    """Number of distinct strings in S(x) (by enumeration)."""
    limit = None if max_space is None else max_space + 1
    count = sum(1 for _ in enumerate_space(spec, x, limit=limit))
    if max_space is not None and count > max_space:
        raise SpaceBudgetExceeded(f"perturbation space exceeds {max_space} strings", budget=max_space)
    return count


# =============================================================================
# Counting
# =============================================================================

def count_plans(spec: TransformSpec, x: TokenString, max_states: Optional[int] = None) -> int:
    """
    Count valid match plans (including the empty plan) without enumeration.

    f(pos, b) = f(pos + 1, b) + sum over matches m starting at pos with
    b[rule(m)] > 0 of |replacements(m)| * f(r(m) + 1, b - e_rule(m)).

    Raises:
        PlanCountOverflow: the state space exceeds ``max_states``
            (default ``settings.MAX_DP_STATES``)
    """
    x = tuple(x)
    bound = settings.MAX_DP_STATES if max_states is None else max_states
    budgets = spec.budgets

    states = len(x) + 1
    for delta in budgets:
        states *= delta + 1
        if states > bound:
            raise PlanCountOverflow(
                f"plan counting needs more than {bound} states for {spec.describe()} on length {len(x)}"
            )

    by_start: Dict[int, List[Tuple[Match, int]]] = {}
    for match in find_matches(spec, x):
        by_start.setdefault(match.l, []).append((match, len(replacements(spec, x, match))))

    vectors = list(itertools.product(*(range(delta + 1) for delta in budgets)))
    table: List[Dict[Tuple[int, ...], int]] = [dict() for _ in range(len(x) + 1)]
    table[len(x)] = {b: 1 for b in vectors}

    for pos in range(len(x) - 1, -1, -1):
        nxt = table[pos + 1]
        row = {}
        for b in vectors:
            total = nxt[b]
            for match, fanout in by_start.get(pos, ()):
                j = match.rule_index
                if b[j] == 0:
                    continue
                reduced = b[:j] + (b[j] - 1,) + b[j + 1:]
                total += fanout * table[match.r + 1][reduced]
            row[b] = total
        table[pos] = row

    return table[0][tuple(budgets)]


# =============================================================================
# Sampling
# =============================================================================

def sample_sequential(
    spec: TransformSpec,
    x: TokenString,
    seed: Union[int, np.random.Generator, None] = None,
    max_space: Optional[int] = None,
) -> TokenString:
    """
    Random augmentation sampler.

    For each rule in spec order, draw uniformly from the current string's
    single-rule perturbation space and pass the draw on to the next rule.

    Args:
        spec: Transformation specification
        x: Original string
        seed: Seed or numpy Generator (deterministic for a fixed seed)
        max_space: Largest single-rule space enumerated per step
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    budget = settings.MAX_SPACE if max_space is None else max_space
    z = tuple(x)
    for rule, delta in spec.rules:
        if delta == 0:
            continue
        single = TransformSpec(rules=((rule, delta),), alphabet=spec.alphabet, prefix_len=spec.prefix_len)
        space = list(enumerate_space(single, z, limit=budget + 1))
        if len(space) > budget:
            logger.warning(f"Sampling '{rule.name}' from the first {budget} strings of a larger space")
            space = space[:budget]
        z = space[int(rng.integers(len(space)))]
    return z


# =============================================================================
# Single Applications
# =============================================================================

def single_applications(spec: TransformSpec, x: TokenString) -> List[Application]:
    """Every application of one rule with positive budget at one match."""
    x = tuple(x)
    apps = []
    for match in find_matches(spec, x):
        if spec.rules[match.rule_index][1] == 0:
            continue
        for choice, replacement in enumerate(replacements(spec, x, match)):
            apps.append(Application(match=match, choice=choice, replacement=replacement))
    return apps


def single_application_union(spec: TransformSpec, x: TokenString) -> List[TokenString]:
    """T1(x) u ... u Tn(x): distinct strings produced by exactly one application."""
    x = tuple(x)
    seen: Dict[TokenString, None] = {}
    for app in single_applications(spec, x):
        seen.setdefault(materialize(x, MatchPlan((app,))), None)
    return list(seen)


# =============================================================================
# Membership
# =============================================================================

def find_plan(spec: TransformSpec, x: TokenString, z: TokenString) -> Optional[MatchPlan]:
    """
    Find a plan that turns ``x`` into ``z``, or None when ``z`` is not in S(x).

    Aligns x and z left to right: each position of x is either copied or
    starts a match whose replacement must equal the next tokens of z. The
    search runs on an explicit stack over (i, k, remaining budgets) states,
    each visited once, so long inputs do not hit the recursion limit.
    """
    x, z = tuple(x), tuple(z)
    by_start: Dict[int, List[Tuple[Match, Tuple[TokenString, ...]]]] = {}
    for match in find_matches(spec, x):
        by_start.setdefault(match.l, []).append((match, replacements(spec, x, match)))

    State = Tuple[int, int, Tuple[int, ...]]
    stack: List[Tuple[State, Tuple[Application, ...]]] = [((0, 0, spec.budgets), ())]
    seen: Set[State] = set()
    while stack:
        state, path = stack.pop()
        if state in seen:
            continue
        seen.add(state)
        i, k, remaining = state
        if i == len(x):
            if k == len(z):
                return MatchPlan(path)
            continue

        successors = []
        for match, options in by_start.get(i, ()):
            j = match.rule_index
            if remaining[j] == 0:
                continue
            reduced = remaining[:j] + (remaining[j] - 1,) + remaining[j + 1:]
            for choice, replacement in enumerate(options):
                if z[k:k + len(replacement)] != replacement:
                    continue
                app = Application(match=match, choice=choice, replacement=replacement)
                successors.append(((match.r + 1, k + len(replacement), reduced), path + (app,)))
        if k < len(z) and z[k] == x[i]:
            successors.append(((i + 1, k + 1, remaining), path))
        # First successor on top keeps the match-first search order.
        stack.extend(reversed(successors))
    return None


def is_member(spec: TransformSpec, x: TokenString, z: TokenString) -> bool:
    """True iff ``z`` is in S(x)."""
    return find_plan(spec, x, z) is not None


# =============================================================================
# Brute-Force Oracle
# =============================================================================

def _oracle_plans(spec: TransformSpec, x: TokenString, max_matches: Optional[int]):
    bound = settings.ORACLE_MAX_MATCHES if max_matches is None else max_matches
    width_of = [rule.pattern.length for rule, _ in spec.rules]

    # Independent scan: every span of every rule, filtered by pattern and output.
    candidates = []
    for l in range(len(x)):
        for j, (rule, _) in enumerate(spec.rules):
            r = l + width_of[j] - 1
            if r >= len(x) or (spec.prefix_len is not None and r >= spec.prefix_len):
                continue
            span = x[l:r + 1]
            outputs = rule.replacer.apply(span) if rule.pattern.matches(span) else ()
            if outputs:
                candidates.append((l, r, j, outputs))

    if len(candidates) > bound:
        raise OracleBoundExceeded(f"{len(candidates)} matches exceed the oracle bound of {bound}")

    for size in range(len(candidates) + 1):
        for subset in itertools.combinations(candidates, size):
            ordered = sorted(subset)
            if any(a[1] >= b[0] for a, b in zip(ordered, ordered[1:])):
                continue
            counts = [0] * len(spec.rules)
            for _, _, j, _ in ordered:
                counts[j] += 1
            if any(count > delta for count, (_, delta) in zip(counts, spec.rules)):
                continue
            for choice in itertools.product(*(outputs for _, _, _, outputs in ordered)):
                yield ordered, choice


def oracle_enumerate(spec: TransformSpec, x: TokenString, max_matches: Optional[int] = None) -> Set[TokenString]:
    """
    Reference semantics: brute force over all subsets of matches.

    Raises:
        OracleBoundExceeded: more than ``max_matches`` matches
            (default ``settings.ORACLE_MAX_MATCHES``)
    """
    x = tuple(x)
    space = set()
    for ordered, choice in _oracle_plans(spec, x, max_matches):
        out = []
        cursor = 0
        for (l, r, _, _), replacement in zip(ordered, choice):
            out.extend(x[cursor:l])
            out.extend(replacement)
            cursor = r + 1
        out.extend(x[cursor:])
        space.add(tuple(out))
    return space


def oracle_plan_count(spec: TransformSpec, x: TokenString, max_matches: Optional[int] = None) -> int:
    """Number of valid plans found by brute force."""
    return sum(1 for _ in _oracle_plans(spec, tuple(x), max_matches))
