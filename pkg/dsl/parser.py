# =============================================================================
# A3T Desk - Spec File Parser
# =============================================================================
"""
Parse perturbation specifications into validated TransformSpec objects.

Two surface forms are accepted:

1. YAML spec files::

    alphabet: char
    prefix_len: 35            # optional
    resources:
      tables:
        nice_syn:             # inline table
          nice: [enjoyable, pleasant]
        adj: tables/qwerty.tsv  # or a path (relative to the spec file)
      classes:
        vowel: classes/vowel.txt
    rules:
      - builtin: SwapPair
        delta: 2
      - name: SubNice
        custom:
          pattern: nice
          replacer: substitute
          table: nice_syn
        delta: 1

2. The compact inline form over built-ins: ``{SwapPair:2, SubAdj:2}``

Usage:
    from dsl import load_spec, print_spec

    spec = load_spec("data/specs/swap_subadj.yaml")
    print(print_spec(spec))
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from dsl.builtins import builtin, default_alphabet, make_replacer
from dsl.grammar import parse_inline_entries, parse_pattern, render_pattern
from dsl.models import (
    AlphabetMode,
    ReplacerKind,
    SpecError,
    SpecSyntaxError,
    TransformRule,
    TransformSpec,
)
from dsl.resources import ResourceTables, load_class, load_table

logger = logging.getLogger(__name__)


# =============================================================================
# File Schema
# =============================================================================

class CustomRuleModel(BaseModel):
    """User-defined transformation: pattern + replacer (+ table)."""
    model_config = ConfigDict(extra="forbid")

    pattern: str = Field(..., min_length=1, description="Whitespace separated token predicates")
    replacer: ReplacerKind = Field(..., description="delete | swap | substitute | duplicate | insert")
    table: Optional[str] = Field(default=None, description="Table id for substitute/insert")


class RuleModel(BaseModel):
    """One (rule, budget) entry."""
    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    builtin: Optional[str] = None
    custom: Optional[CustomRuleModel] = None
    delta: int = Field(..., description="Budget: maximum number of applications")
    alphabet: Optional[AlphabetMode] = None


class ResourcesModel(BaseModel):
    """Resources declared by the spec file itself."""
    model_config = ConfigDict(extra="forbid")

    tables: Dict[str, Union[str, Dict[str, List[str]]]] = Field(default_factory=dict)
    classes: Dict[str, Union[str, List[str]]] = Field(default_factory=dict)


class SpecFileModel(BaseModel):
    """Top-level spec file."""
    model_config = ConfigDict(extra="forbid")

    alphabet: AlphabetMode = AlphabetMode.CHAR
    prefix_len: Optional[int] = None
    resources: ResourcesModel = Field(default_factory=ResourcesModel)
    rules: List[RuleModel] = Field(default_factory=list)


def _format_validation_error(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        location = ".".join(str(part) for part in err.get("loc", ()))
        parts.append(f"{location}: {err.get('msg')}")
    return "; ".join(parts)


# =============================================================================
# Resource Resolution
# =============================================================================

def _declared_resources(model: ResourcesModel, base_dir: Optional[Path]) -> ResourceTables:
    def resolve(path: str) -> Path:
        candidate = Path(path)
        if base_dir is not None and not candidate.is_absolute():
            return base_dir / candidate
        return candidate

    tables = {}
    for name, value in model.tables.items():
        if isinstance(value, str):
            tables[name] = load_table(resolve(value))
        else:
            tables[name] = {key: tuple(dict.fromkeys(values)) for key, values in value.items()}

    classes = {}
    for name, value in model.classes.items():
        classes[name] = load_class(resolve(value)) if isinstance(value, str) else frozenset(value)

    return ResourceTables(tables=tables, classes=classes)


# =============================================================================
# Parsing
# =============================================================================

def _build_rule(entry: RuleModel, index: int, alphabet: AlphabetMode, resources: ResourceTables) -> TransformRule:
    if (entry.builtin is None) == (entry.custom is None):
        raise SpecError(f"rules[{index}]: exactly one of 'builtin' or 'custom' is required")

    mode = entry.alphabet or alphabet
    if entry.builtin is not None:
        return builtin(entry.builtin, resources, alphabet=mode, rule_name=entry.name)

    if not entry.name:
        raise SpecError(f"rules[{index}]: custom rules need a 'name'")
    custom = entry.custom
    try:
        pattern = parse_pattern(custom.pattern, resources)
    except SpecSyntaxError as e:
        raise SpecSyntaxError(f"rule '{entry.name}': {e.args[0]}") from e
    replacer = make_replacer(custom.replacer, mode, resources, custom.table)
    if custom.table and not custom.replacer.needs_table:
        raise SpecError(f"rule '{entry.name}': replacer '{custom.replacer.value}' does not take a table")
    return TransformRule(name=entry.name, pattern=pattern, replacer=replacer, alphabet=mode)


def parse_spec(
    text: str,
    resources: Optional[ResourceTables] = None,
    base_dir: Optional[Union[str, Path]] = None,
) -> TransformSpec:
    """
    Parse spec-file contents.

    Args:
        text: YAML spec file contents
        resources: Tables and classes available to the spec (default: shipped resources)
        base_dir: Directory that resource paths in the file are relative to

    Returns:
        Validated TransformSpec

    Raises:
        SpecSyntaxError: malformed YAML (with line and column)
        SpecError: schema violation, unknown built-in, no rules, negative
            budget, mixed alphabet modes
        ResourceError: unknown table or class
    """
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line, column = (mark.line + 1, mark.column + 1) if mark is not None else (0, 0)
        problem = getattr(e, "problem", None) or str(e)
        raise SpecSyntaxError(f"invalid spec file: {problem}", line, column) from e

    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise SpecError("spec file must be a mapping with 'alphabet' and 'rules'")

    try:
        model = SpecFileModel.model_validate(raw)
    except ValidationError as e:
        raise SpecError(f"invalid spec file: {_format_validation_error(e)}") from e

    if not model.rules:
        raise SpecError("spec must contain at least one rule")

    base = Path(base_dir) if base_dir is not None else None
    available = resources if resources is not None else ResourceTables.default()
    available = available.merged(_declared_resources(model.resources, base))

    rules = tuple(
        (_build_rule(entry, index, model.alphabet, available), entry.delta)
        for index, entry in enumerate(model.rules)
    )
    spec = TransformSpec(rules=rules, alphabet=model.alphabet, prefix_len=model.prefix_len)
    logger.debug(f"Parsed spec {spec.describe()} ({spec.alphabet.value}-level)")
    return spec


def parse_inline_spec(
    text: str,
    resources: Optional[ResourceTables] = None,
    alphabet: Optional[AlphabetMode] = None,
) -> TransformSpec:
    """
    Parse the compact ``{Name:delta, ...}`` form over built-ins.

    The alphabet defaults to the built-ins' own (which must agree).
    """
    entries = parse_inline_entries(text)
    if not entries:
        raise SpecError("spec must contain at least one rule")

    if alphabet is None:
        modes = {default_alphabet(name) for name, _ in entries}
        if len(modes) > 1:
            raise SpecError(
                f"mixed alphabet modes in {text.strip()}: pass an explicit alphabet"
            )
        alphabet = modes.pop()
    alphabet = AlphabetMode(alphabet)

    available = resources if resources is not None else ResourceTables.default()
    rules = tuple((builtin(name, available, alphabet=alphabet), delta) for name, delta in entries)
    return TransformSpec(rules=rules, alphabet=alphabet)


def load_spec(
    source: Union[str, Path],
    resources: Optional[ResourceTables] = None,
    alphabet: Optional[AlphabetMode] = None,
) -> TransformSpec:
    """
    Load a spec from a YAML file path or an inline ``{...}`` string.

    Raises:
        FileNotFoundError: spec file does not exist
    """
    text = str(source)
    if text.lstrip().startswith("{"):
        return parse_inline_spec(text, resources, alphabet)

    path = Path(source)
    if not path.is_file():
        raise FileNotFoundError(f"spec file not found: {path}")
    spec = parse_spec(path.read_text(encoding="utf-8"), resources, base_dir=path.parent)
    logger.info(f"Loaded spec {spec.describe()} from {path}")
    return spec


# =============================================================================
# Printing
# =============================================================================

def _inline_tables(spec: TransformSpec) -> Dict[str, Dict[str, List[str]]]:
    tables: Dict[str, Dict[str, List[str]]] = {}
    for rule, _ in spec:
        replacer = rule.replacer
        if rule.builtin is not None or not replacer.table_id:
            continue
        tables[replacer.table_id] = {
            key: [replacer.separator.join(value) for value in values]
            for key, values in replacer.entries.items()
        }
    return tables


def spec_to_dict(spec: TransformSpec) -> Dict:
    """Plain-data form of a spec, as written by print_spec."""
    data: Dict = {"alphabet": spec.alphabet.value}
    if spec.prefix_len is not None:
        data["prefix_len"] = spec.prefix_len
    tables = _inline_tables(spec)
    if tables:
        data["resources"] = {"tables": tables}

    rules = []
    for rule, delta in spec:
        if rule.builtin is not None:
            entry: Dict = {"builtin": rule.builtin}
            if rule.name != rule.builtin:
                entry = {"name": rule.name, **entry}
        else:
            custom: Dict = {"pattern": render_pattern(rule.pattern), "replacer": rule.replacer.kind.value}
            if rule.replacer.table_id:
                custom["table"] = rule.replacer.table_id
            entry = {"name": rule.name, "custom": custom}
        entry["delta"] = delta
        rules.append(entry)
    data["rules"] = rules
    return data


def print_spec(spec: TransformSpec) -> str:
    """Render a spec as YAML; ``parse_spec(print_spec(s), resources) == s``."""
    return yaml.safe_dump(spec_to_dict(spec), sort_keys=False, allow_unicode=True)
