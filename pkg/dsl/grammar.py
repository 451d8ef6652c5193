# =============================================================================
# A3T Desk - Pattern and Inline-Spec Grammar
# =============================================================================
"""
Lark grammars for the custom-rule pattern language and the inline spec form.

Pattern language (whitespace separated predicates):

    any              any token
    nice             a literal token (or "quoted", for tokens with spaces/specials)
    {nice, good}     one of a set of tokens
    @vowel           a member of a token class
    $qwerty          a token with an entry in a table

Inline spec:

    {SwapPair:2, SubAdj:2}
"""

import json
from typing import List, Tuple

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError

from dsl.builtins import table_key, token_class
from dsl.models import AnyToken, SpecError, SpecSyntaxError, TokenClass, TokenInSet, TokenPattern, TokenPredicate
from dsl.resources import ResourceTables

PATTERN_GRAMMAR = r"""
    start: predicate+

    ?predicate: "any"                      -> any_token
              | "{" token ("," token)* "}" -> token_set
              | "@" NAME                   -> token_class
              | "$" NAME                   -> table_key
              | token                      -> literal

    ?token: ESCAPED_STRING -> quoted
          | BARE           -> bare

    NAME: /[A-Za-z_][A-Za-z0-9_\-]*/
    BARE: /[^\s{},@$"]+/

    %import common.ESCAPED_STRING
    %import common.WS
    %ignore WS
"""

INLINE_SPEC_GRAMMAR = r"""
    start: "{" [entry ("," entry)*] "}"
    entry: NAME ":" SIGNED_INT

    NAME: /[A-Za-z_][A-Za-z0-9_\-]*/

    %import common.SIGNED_INT
    %import common.WS
    %ignore WS
"""

_pattern_parser = Lark(PATTERN_GRAMMAR, parser="lalr")
_inline_parser = Lark(INLINE_SPEC_GRAMMAR, parser="lalr")

_SPECIAL = set(' \t\n{},@$"')


class PatternTransformer(Transformer):
    """Turns a pattern parse tree into resolved token predicates."""

    def __init__(self, resources: ResourceTables):
        super().__init__()
        self.resources = resources

    def start(self, predicates: List[TokenPredicate]) -> TokenPattern:
        return TokenPattern(tuple(predicates))

    def any_token(self, _) -> AnyToken:
        return AnyToken()

    def token_set(self, tokens: List[str]) -> TokenInSet:
        return TokenInSet(frozenset(tokens))

    def literal(self, tokens: List[str]) -> TokenInSet:
        return TokenInSet(frozenset(tokens))

    @v_args(inline=True)
    def token_class(self, name: Token):
        return token_class(self.resources, str(name))

    @v_args(inline=True)
    def table_key(self, name: Token):
        return table_key(self.resources, str(name))

    @v_args(inline=True)
    def quoted(self, token: Token) -> str:
        return json.loads(str(token))

    @v_args(inline=True)
    def bare(self, token: Token) -> str:
        return str(token)


def _syntax_error(e: UnexpectedInput, text: str, what: str) -> SpecSyntaxError:
    context = e.get_context(text).strip().splitlines()[0] if text else ""
    return SpecSyntaxError(f"{what}: unexpected input near {context!r}", e.line, e.column)


def parse_pattern(text: str, resources: ResourceTables) -> TokenPattern:
    """
    Parse a custom-rule pattern.

    Raises:
        SpecSyntaxError: malformed pattern (position-annotated)
        ResourceError: unknown class or table
    """
    try:
        tree = _pattern_parser.parse(text)
    except UnexpectedInput as e:
        raise _syntax_error(e, text, "invalid pattern") from e
    try:
        return PatternTransformer(resources).transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, SpecError):
            raise e.orig_exc
        raise


def parse_inline_entries(text: str) -> List[Tuple[str, int]]:
    """
    Parse ``{Name:delta, ...}`` into (name, delta) pairs.

    Raises:
        SpecSyntaxError: malformed input (position-annotated)
    """
    try:
        tree = _inline_parser.parse(text)
    except UnexpectedInput as e:
        raise _syntax_error(e, text, "invalid inline spec") from e
    entries = []
    for entry in tree.children:
        if entry is None:
            continue
        name, delta = entry.children
        entries.append((str(name), int(delta)))
    return entries


def render_token(token: str) -> str:
    """Render a token so that the pattern parser reads it back unchanged."""
    if token == "any" or not token or any(ch in _SPECIAL for ch in token):
        return json.dumps(token, ensure_ascii=False)
    return token


def render_pattern(pattern: TokenPattern) -> str:
    """Inverse of parse_pattern."""
    parts = []
    for predicate in pattern.positions:
        if isinstance(predicate, AnyToken):
            parts.append("any")
        elif isinstance(predicate, TokenInSet):
            tokens = sorted(predicate.tokens)
            if len(tokens) == 1:
                parts.append(render_token(tokens[0]))
            else:
                parts.append("{" + ", ".join(render_token(t) for t in tokens) + "}")
        elif isinstance(predicate, TokenClass):
            parts.append(f"@{predicate.name}")
        else:
            parts.append(f"${predicate.table}")
    return " ".join(parts)
