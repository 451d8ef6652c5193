# =============================================================================
# A3T Desk - Perturbation Spaces
# =============================================================================
"""
Perturbation-space semantics: matches, plans, enumeration, counting, sampling.

Usage:
    from perturb import enumerate_space, tokenize

    x = tokenize("They are at school", spec.alphabet)
    for z in enumerate_space(spec, x):
        print(detokenize(z, spec.alphabet))
"""

from perturb.models import (
    Application,
    Match,
    MatchPlan,
    OracleBoundExceeded,
    PlanCountOverflow,
    PlanError,
    SpaceBudgetExceeded,
)
from perturb.matching import (
    apply_match,
    detokenize,
    find_matches,
    materialize,
    replacements,
    tokenize,
    validate_plan,
)
from perturb.space import (
    count_plans,
    count_strings,
    enumerate_plans,
    enumerate_space,
    enumerate_with_plans,
    find_plan,
    is_member,
    oracle_enumerate,
    oracle_plan_count,
    sample_sequential,
    single_application_union,
    single_applications,
)

__all__ = [
    'Application', 'Match', 'MatchPlan', 'OracleBoundExceeded', 'PlanCountOverflow',
    'PlanError', 'SpaceBudgetExceeded',
    'apply_match', 'detokenize', 'find_matches', 'materialize', 'replacements',
    'tokenize', 'validate_plan',
    'count_plans', 'count_strings', 'enumerate_plans', 'enumerate_space',
    'enumerate_with_plans', 'find_plan', 'is_member', 'oracle_enumerate',
    'oracle_plan_count', 'sample_sequential', 'single_application_union',
    'single_applications',
]
