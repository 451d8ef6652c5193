# =============================================================================
# A3T Desk - Transformation Language Models
# =============================================================================
"""
In-memory model of the string-transformation language.

A specification is a list of (rule, budget) pairs. A rule pairs a fixed-length
token pattern (the match predicate) with a replacer (the transformer that maps
a matched span to the set of strings it may be replaced with).

Provides:
- AlphabetMode: char-level or word-level tokenisation
- Token predicates: AnyToken, TokenInSet, TokenClass, TableKey
- TokenPattern, Replacer, TransformRule, TransformSpec
- SpecError / SpecSyntaxError / ResourceError
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterator, Mapping, Optional, Sequence, Tuple, Union

# A token string is a tuple of surface tokens (characters or words).
TokenString = Tuple[str, ...]


# =============================================================================
# Errors
# =============================================================================

class SpecError(ValueError):
    """Invalid transformation specification."""


class SpecSyntaxError(SpecError):
    """Syntax error with a source position (1-based line and column)."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class ResourceError(SpecError):
    """A referenced substitution table or token class does not exist."""


# =============================================================================
# Enums
# =============================================================================

class AlphabetMode(str, Enum):
    """Tokenisation granularity shared by every rule of a spec."""
    CHAR = "char"
    WORD = "word"

    @property
    def separator(self) -> str:
        """String used to join tokens back into text."""
        return "" if self is AlphabetMode.CHAR else " "

    def split(self, text: str) -> TokenString:
        """Split text into tokens (no case folding)."""
        if self is AlphabetMode.CHAR:
            return tuple(text)
        return tuple(text.split())

    def join(self, tokens: Sequence[str]) -> str:
        return self.separator.join(tokens)


class ReplacerKind(str, Enum):
    """Kinds of transformers."""
    DELETE = "delete"
    SWAP = "swap"
    SUBSTITUTE = "substitute"
    DUPLICATE = "duplicate"
    INSERT = "insert"

    @property
    def needs_table(self) -> bool:
        return self in (ReplacerKind.SUBSTITUTE, ReplacerKind.INSERT)


# =============================================================================
# Token Predicates
# =============================================================================

@dataclass(frozen=True)
class AnyToken:
    """Matches every token."""

    def __call__(self, token: str) -> bool:
        return True


@dataclass(frozen=True)
class TokenInSet:
    """Matches tokens from an explicit set (a single literal is a one-element set)."""
    tokens: FrozenSet[str]

    def __post_init__(self):
        if not self.tokens:
            raise SpecError("token set predicate must list at least one token")

    def __call__(self, token: str) -> bool:
        return token in self.tokens


@dataclass(frozen=True)
class TokenClass:
    """Matches members of a named class loaded from a class file."""
    name: str
    members: FrozenSet[str] = field(default=frozenset(), compare=False, repr=False)

    def __call__(self, token: str) -> bool:
        return token in self.members


@dataclass(frozen=True)
class TableKey:
    """Matches tokens that have an entry in a named substitution table."""
    table: str
    keys: FrozenSet[str] = field(default=frozenset(), compare=False, repr=False)

    def __call__(self, token: str) -> bool:
        return token in self.keys


TokenPredicate = Union[AnyToken, TokenInSet, TokenClass, TableKey]


@dataclass(frozen=True)
class TokenPattern:
    """Fixed-length sequence of per-token predicates."""
    positions: Tuple[TokenPredicate, ...]

    def __post_init__(self):
        if len(self.positions) < 1:
            raise SpecError("pattern must have at least one position")

    @property
    def length(self) -> int:
        return len(self.positions)

    def matches(self, span: Sequence[str]) -> bool:
        """True iff ``span`` has the pattern's length and every token satisfies its predicate."""
        if len(span) != len(self.positions):
            return False
        return all(predicate(token) for predicate, token in zip(self.positions, span))


# =============================================================================
# Replacer
# =============================================================================

@dataclass(frozen=True)
class Replacer:
    """
    Transformer mapping a matched span to its replacement strings.

    ``entries`` is the resolved substitution/insertion table with values
    already tokenised by the rule's alphabet; it is excluded from equality so
    that two specs compare by table id, not by table contents.
    """
    kind: ReplacerKind
    table_id: Optional[str] = None
    entries: Mapping[str, Tuple[TokenString, ...]] = field(
        default_factory=lambda: MappingProxyType({}), compare=False, repr=False
    )
    separator: str = field(default="", compare=False, repr=False)

    def __post_init__(self):
        if self.kind.needs_table and not self.table_id:
            raise SpecError(f"replacer '{self.kind.value}' requires a table")
        if not self.kind.needs_table and self.table_id:
            raise SpecError(f"replacer '{self.kind.value}' does not take a table")

    def apply(self, span: TokenString) -> Tuple[TokenString, ...]:
        """Return every replacement for ``span`` (empty when the table has no entry)."""
        if self.kind is ReplacerKind.DELETE:
            return ((),)
        if self.kind is ReplacerKind.SWAP:
            if len(span) != 2:
                return ()
            return ((span[1], span[0]),)
        if self.kind is ReplacerKind.DUPLICATE:
            return (span + span,)

        values = self.entries.get(self.separator.join(span), ())
        if self.kind is ReplacerKind.INSERT:
            return tuple(span + value for value in values)
        return values

    def is_length_preserving(self, span_length: int) -> bool:
        """True iff every output for spans of ``span_length`` tokens keeps that length."""
        if self.kind is ReplacerKind.SWAP:
            return span_length == 2
        if self.kind is not ReplacerKind.SUBSTITUTE:
            return False
        for key, values in self.entries.items():
            key_length = len(key) if self.separator == "" else len(key.split())
            if key_length != span_length:
                continue
            if any(len(value) != span_length for value in values):
                return False
        return True


# =============================================================================
# Rules and Specifications
# =============================================================================

@dataclass(frozen=True)
class TransformRule:
    """A transformation T = (pattern, replacer) with a unique name."""
    name: str
    pattern: TokenPattern
    replacer: Replacer
    alphabet: AlphabetMode = AlphabetMode.CHAR
    builtin: Optional[str] = None

    def __post_init__(self):
        if not self.name or not self.name.replace("_", "").replace("-", "").isalnum():
            raise SpecError(f"invalid rule name: {self.name!r}")
        if self.replacer.kind is ReplacerKind.SWAP and self.pattern.length != 2:
            raise SpecError(f"rule '{self.name}': swap requires a pattern of length 2")

    @property
    def length_preserving(self) -> bool:
        return self.replacer.is_length_preserving(self.pattern.length)

    def renamed(self, name: str) -> "TransformRule":
        return replace(self, name=name)


@dataclass(frozen=True)
class TransformSpec:
    """
    Specification S = {(T1, d1), ..., (Tn, dn)}.

    Parsed specs always hold at least one rule; empty specs only arise from
    splitting a spec into augmentation and abstraction parts.
    """
    rules: Tuple[Tuple[TransformRule, int], ...]
    alphabet: AlphabetMode = AlphabetMode.CHAR
    prefix_len: Optional[int] = None

    def __post_init__(self):
        names = [rule.name for rule, _ in self.rules]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise SpecError(f"duplicate rule names: {', '.join(duplicates)}")
        for rule, delta in self.rules:
            if delta < 0:
                raise SpecError(f"rule '{rule.name}': budget must be non-negative, got {delta}")
            if rule.alphabet is not self.alphabet:
                raise SpecError(
                    f"mixed alphabet modes: rule '{rule.name}' is {rule.alphabet.value}-level "
                    f"in a {self.alphabet.value}-level spec"
                )
        if self.prefix_len is not None and self.prefix_len < 1:
            raise SpecError(f"prefix_len must be positive, got {self.prefix_len}")

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self) -> Iterator[Tuple[TransformRule, int]]:
        return iter(self.rules)

    @property
    def is_empty(self) -> bool:
        return not self.rules

    @property
    def rule_names(self) -> Tuple[str, ...]:
        return tuple(rule.name for rule, _ in self.rules)

    @property
    def budgets(self) -> Tuple[int, ...]:
        return tuple(delta for _, delta in self.rules)

    @property
    def total_budget(self) -> int:
        return sum(self.budgets)

    def rule(self, name: str) -> TransformRule:
        for rule, _ in self.rules:
            if rule.name == name:
                return rule
        raise SpecError(f"unknown rule: {name}")

    def with_budget(self, name: str, delta: int) -> "TransformSpec":
        """Copy of this spec with one rule's budget changed."""
        self.rule(name)
        rules = tuple((rule, delta if rule.name == name else d) for rule, d in self.rules)
        return replace(self, rules=rules)

    def subset(self, names: Sequence[str]) -> "TransformSpec":
        """Copy keeping only the named rules, in spec order."""
        wanted = set(names)
        return replace(self, rules=tuple((rule, d) for rule, d in self.rules if rule.name in wanted))

    def describe(self) -> str:
        """Compact ``{Name:delta, ...}`` rendering."""
        return "{" + ", ".join(f"{rule.name}:{delta}" for rule, delta in self.rules) + "}"

    def to_dict(self) -> Dict:
        return {
            "alphabet": self.alphabet.value,
            "prefix_len": self.prefix_len,
            "rules": [{"name": rule.name, "delta": delta} for rule, delta in self.rules],
        }
