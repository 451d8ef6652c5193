# =============================================================================
# A3T Desk - Built-in Transformations
# =============================================================================
"""
The seven built-in transformations and resource binding helpers.

    SwapPair  swap a pair of two adjacent tokens              (char)
    Del       delete a token                                  (char)
    InsAdj    insert a keyboard-adjacent token to the right   (char)
    SubAdj    substitute a keyboard-adjacent token            (char)
    DelStop   delete a stop word                              (word)
    Dup       duplicate a token                               (word)
    SubSyn    substitute a synonym                            (word)

SubAdj and SubSyn are the usual candidates for abstraction;
SwapPair is length-preserving too, so it may also be abstracted.
"""

import logging
from types import MappingProxyType
from typing import Callable, Dict, Optional, Tuple

from dsl.models import (
    AlphabetMode,
    AnyToken,
    Replacer,
    ReplacerKind,
    ResourceError,
    SpecError,
    TableKey,
    TokenClass,
    TokenPattern,
    TransformRule,
)
from dsl.resources import ADJACENCY_TABLE, STOP_CLASS, SYNONYM_TABLE, ResourceTables

logger = logging.getLogger(__name__)


# =============================================================================
# Resource Binding
# =============================================================================

def make_replacer(
    kind: ReplacerKind,
    alphabet: AlphabetMode,
    resources: ResourceTables,
    table_id: Optional[str] = None,
) -> Replacer:
    """
    Build a replacer with its table resolved and values tokenised.

    Raises:
        ResourceError: if the table does not exist
    """
    if not kind.needs_table:
        return Replacer(kind=kind, separator=alphabet.separator)
    if not table_id:
        raise SpecError(f"replacer '{kind.value}' requires a table")
    raw = resources.table(table_id)
    entries = {
        key: tuple(alphabet.split(value) for value in values)
        for key, values in raw.items()
    }
    return Replacer(
        kind=kind,
        table_id=table_id,
        entries=MappingProxyType(entries),
        separator=alphabet.separator,
    )


def table_key(resources: ResourceTables, table_id: str) -> TableKey:
    """Predicate matching tokens with an entry in ``table_id``."""
    return TableKey(table=table_id, keys=frozenset(resources.table(table_id).keys()))


def token_class(resources: ResourceTables, name: str) -> TokenClass:
    """Predicate matching members of class ``name``."""
    return TokenClass(name=name, members=resources.token_class(name))


# =============================================================================
# Built-ins
# =============================================================================

def _swap_pair(resources: ResourceTables, alphabet: AlphabetMode) -> Tuple[TokenPattern, Replacer]:
    return (
        TokenPattern((AnyToken(), AnyToken())),
        make_replacer(ReplacerKind.SWAP, alphabet, resources),
    )


def _delete(resources: ResourceTables, alphabet: AlphabetMode) -> Tuple[TokenPattern, Replacer]:
    return TokenPattern((AnyToken(),)), make_replacer(ReplacerKind.DELETE, alphabet, resources)


def _insert_adjacent(resources: ResourceTables, alphabet: AlphabetMode) -> Tuple[TokenPattern, Replacer]:
    return (
        TokenPattern((table_key(resources, ADJACENCY_TABLE),)),
        make_replacer(ReplacerKind.INSERT, alphabet, resources, ADJACENCY_TABLE),
    )


def _substitute_adjacent(resources: ResourceTables, alphabet: AlphabetMode) -> Tuple[TokenPattern, Replacer]:
    return (
        TokenPattern((table_key(resources, ADJACENCY_TABLE),)),
        make_replacer(ReplacerKind.SUBSTITUTE, alphabet, resources, ADJACENCY_TABLE),
    )


def _delete_stop(resources: ResourceTables, alphabet: AlphabetMode) -> Tuple[TokenPattern, Replacer]:
    return (
        TokenPattern((token_class(resources, STOP_CLASS),)),
        make_replacer(ReplacerKind.DELETE, alphabet, resources),
    )


def _duplicate(resources: ResourceTables, alphabet: AlphabetMode) -> Tuple[TokenPattern, Replacer]:
    return TokenPattern((AnyToken(),)), make_replacer(ReplacerKind.DUPLICATE, alphabet, resources)


def _substitute_synonym(resources: ResourceTables, alphabet: AlphabetMode) -> Tuple[TokenPattern, Replacer]:
    return (
        TokenPattern((table_key(resources, SYNONYM_TABLE),)),
        make_replacer(ReplacerKind.SUBSTITUTE, alphabet, resources, SYNONYM_TABLE),
    )


_BUILTINS: Dict[str, Tuple[Callable, AlphabetMode]] = {
    "SwapPair": (_swap_pair, AlphabetMode.CHAR),
    "Del": (_delete, AlphabetMode.CHAR),
    "InsAdj": (_insert_adjacent, AlphabetMode.CHAR),
    "SubAdj": (_substitute_adjacent, AlphabetMode.CHAR),
    "DelStop": (_delete_stop, AlphabetMode.WORD),
    "Dup": (_duplicate, AlphabetMode.WORD),
    "SubSyn": (_substitute_synonym, AlphabetMode.WORD),
}

BUILTIN_NAMES: Tuple[str, ...] = tuple(_BUILTINS)


def default_alphabet(name: str) -> AlphabetMode:
    """Alphabet a built-in is defined for."""
    if name not in _BUILTINS:
        raise SpecError(f"unknown built-in transformation: {name}")
    return _BUILTINS[name][1]


def builtin(
    name: str,
    resources: ResourceTables,
    alphabet: Optional[AlphabetMode] = None,
    rule_name: Optional[str] = None,
) -> TransformRule:
    """
    Get a built-in transformation rule.

    Args:
        name: One of BUILTIN_NAMES
        resources: Tables and classes (QWERTY adjacency, stop words, synonyms)
        alphabet: Override the built-in's default alphabet
        rule_name: Rule name (defaults to ``name``)

    Raises:
        SpecError: unknown built-in
        ResourceError: required table or class missing
    """
    if name not in _BUILTINS:
        raise SpecError(f"unknown built-in transformation: {name} (expected one of {', '.join(BUILTIN_NAMES)})")
    factory, default = _BUILTINS[name]
    mode = AlphabetMode(alphabet) if alphabet is not None else default
    try:
        pattern, replacer = factory(resources, mode)
    except ResourceError as e:
        raise ResourceError(f"built-in {name}: {e}") from e
    return TransformRule(
        name=rule_name or name,
        pattern=pattern,
        replacer=replacer,
        alphabet=mode,
        builtin=name,
    )


def is_length_preserving(rule: TransformRule) -> bool:
    """True iff every replacement the rule can emit has the matched span's length."""
    return rule.length_preserving
