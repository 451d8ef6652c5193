# =============================================================================
# A3T Desk - Match Finding and Materialisation
# =============================================================================
"""
Match finding, plan validation and string materialisation.

Provides:
- tokenize / detokenize: text <-> TokenString for an alphabet mode
- find_matches: every (span, rule) whose span satisfies the rule's pattern
- replacements: the replacer output for a match
- validate_plan: checks non-overlap, budgets and replacement membership
- materialize: splice a plan's replacements into the original string
"""

import logging
from typing import List, Optional, Sequence, Tuple

from dsl.models import AlphabetMode, TokenString, TransformSpec
from perturb.models import Application, Match, MatchPlan, PlanError

logger = logging.getLogger(__name__)


# =============================================================================
# Tokenisation
# =============================================================================

def tokenize(text: str, alphabet: AlphabetMode, lowercase: Optional[bool] = None) -> TokenString:
    """
    Split text into surface tokens.

    Char-level text is lower-cased by default; word-level text keeps its case
    and its punctuation attached to the words.
    """
    alphabet = AlphabetMode(alphabet)
    if lowercase is None:
        lowercase = alphabet is AlphabetMode.CHAR
    if lowercase:
        text = text.lower()
    return alphabet.split(text)


def detokenize(tokens: Sequence[str], alphabet: AlphabetMode) -> str:
    return AlphabetMode(alphabet).join(tokens)


# =============================================================================
# Matches
# =============================================================================

def replacements(spec: TransformSpec, x: TokenString, match: Match) -> Tuple[TokenString, ...]:
    """Replacer output for the span of ``match``."""
    rule, _ = spec.rules[match.rule_index]
    return rule.replacer.apply(tuple(x[match.l:match.r + 1]))


def find_matches(spec: TransformSpec, x: TokenString) -> List[Match]:
    """
    Find every valid match of every rule in ``x``.

    A span is a match when it satisfies the rule's pattern and the replacer
    produces at least one replacement for it. With ``spec.prefix_len`` set,
    only spans ending before that position are considered.

    Returns:
        Matches sorted by (l, r, rule_index)
    """
    x = tuple(x)
    limit = len(x) if spec.prefix_len is None else min(len(x), spec.prefix_len)
    matches = []
    for j, (rule, _) in enumerate(spec.rules):
        width = rule.pattern.length
        for l in range(0, limit - width + 1):
            span = x[l:l + width]
            if rule.pattern.matches(span) and rule.replacer.apply(span):
                matches.append(Match(l, l + width - 1, j))
    matches.sort()
    return matches


# =============================================================================
# Plans
# =============================================================================

def _check_ordering(plan: MatchPlan) -> None:
    previous = None
    for app in plan:
        if previous is not None and not previous.match.r < app.match.l:
            raise PlanError(
                f"overlapping or unsorted applications: {previous.match.to_dict()} and {app.match.to_dict()}"
            )
        previous = app


def validate_plan(spec: TransformSpec, x: TokenString, plan: MatchPlan) -> None:
    """
    Check that ``plan`` is a valid match plan for ``x`` under ``spec``.

    Raises:
        PlanError: on out-of-range spans, pattern mismatch, replacement not
            produced by the replacer, overlap, or budget violation
    """
    x = tuple(x)
    _check_ordering(plan)
    for app in plan:
        match = app.match
        if not 0 <= match.rule_index < len(spec.rules):
            raise PlanError(f"unknown rule index {match.rule_index}")
        if not 0 <= match.l <= match.r < len(x):
            raise PlanError(f"span ({match.l}, {match.r}) out of range for length {len(x)}")
        if spec.prefix_len is not None and match.r >= spec.prefix_len:
            raise PlanError(f"span ({match.l}, {match.r}) outside prefix of length {spec.prefix_len}")
        rule, _ = spec.rules[match.rule_index]
        span = x[match.l:match.r + 1]
        if not rule.pattern.matches(span):
            raise PlanError(f"rule '{rule.name}' does not match span ({match.l}, {match.r})")
        if tuple(app.replacement) not in rule.replacer.apply(span):
            raise PlanError(f"replacement {app.replacement!r} not produced by rule '{rule.name}'")

    for j, count in plan.rule_counts().items():
        rule, delta = spec.rules[j]
        if count > delta:
            raise PlanError(f"rule '{rule.name}' applied {count} times, budget {delta}")


def materialize(x: TokenString, plan: MatchPlan, spec: Optional[TransformSpec] = None) -> TokenString:
    """
    Replace each planned span by its replacement, left to right.

    Args:
        x: Original string
        plan: Match plan
        spec: When given, the plan is fully validated against it first

    Raises:
        PlanError: overlapping applications (always checked) or, with
            ``spec``, any other validity violation
    """
    x = tuple(x)
    if spec is not None:
        validate_plan(spec, x, plan)
    else:
        _check_ordering(plan)

    out: List[str] = []
    cursor = 0
    for app in plan:
        out.extend(x[cursor:app.match.l])
        out.extend(app.replacement)
        cursor = app.match.r + 1
    out.extend(x[cursor:])
    return tuple(out)


def apply_match(spec: TransformSpec, x: TokenString, match: Match, choice: int) -> Application:
    """Build the application of replacement ``choice`` at ``match``."""
    options = replacements(spec, x, match)
    if not 0 <= choice < len(options):
        raise PlanError(f"choice {choice} out of range for match {match.to_dict()}")
    return Application(match=match, choice=choice, replacement=options[choice])
