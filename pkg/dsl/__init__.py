# =============================================================================
# A3T Desk - Transformation Language
# =============================================================================
"""
Programmable string transformations: rules, built-ins, resources, parsing.

Usage:
    from dsl import ResourceTables, load_spec

    resources = ResourceTables.default()
    spec = load_spec("{SwapPair:2, SubAdj:2}", resources)
"""

from dsl.models import (
    AlphabetMode,
    AnyToken,
    Replacer,
    ReplacerKind,
    ResourceError,
    SpecError,
    SpecSyntaxError,
    TableKey,
    TokenClass,
    TokenInSet,
    TokenPattern,
    TokenString,
    TransformRule,
    TransformSpec,
)
from dsl.resources import ResourceTables, load_class, load_table
from dsl.builtins import BUILTIN_NAMES, builtin, is_length_preserving
from dsl.parser import load_spec, parse_inline_spec, parse_spec, print_spec

__all__ = [
    'AlphabetMode', 'AnyToken', 'Replacer', 'ReplacerKind', 'ResourceError',
    'SpecError', 'SpecSyntaxError', 'TableKey', 'TokenClass', 'TokenInSet',
    'TokenPattern', 'TokenString', 'TransformRule', 'TransformSpec',
    'ResourceTables', 'load_class', 'load_table',
    'BUILTIN_NAMES', 'builtin', 'is_length_preserving',
    'load_spec', 'parse_inline_spec', 'parse_spec', 'print_spec',
]
