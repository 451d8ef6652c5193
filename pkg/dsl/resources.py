# =============================================================================
# A3T Desk - Resource Tables
# =============================================================================
"""
Substitution tables and token classes referenced by transformation rules.

File formats (UTF-8):
- Table file: one entry per line, ``key<TAB>value1,value2,...``
- Class file: one token per line

Blank lines and lines starting with ``#`` are ignored. A directory holding
``tables/*.tsv`` and ``classes/*.txt`` can be loaded at once; each file's
stem becomes its table or class id.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Dict, FrozenSet, Mapping, Optional, Tuple, Union

from dsl.models import ResourceError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Ids the built-in transformations look up.
ADJACENCY_TABLE = "qwerty"
SYNONYM_TABLE = "synonyms"
STOP_CLASS = "stop"
VOWEL_CLASS = "vowel"


def _read_lines(path: PathLike):
    with open(path, "r", encoding="utf-8") as f:
        for number, raw in enumerate(f, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield number, line


def load_table(path: PathLike) -> Dict[str, Tuple[str, ...]]:
    """
    Load a substitution table.

    Args:
        path: Table file path

    Returns:
        Mapping key -> ordered, de-duplicated tuple of values
    """
    table: Dict[str, Tuple[str, ...]] = {}
    for number, line in _read_lines(path):
        if "\t" not in line:
            raise ResourceError(f"{path}:{number}: expected 'key<TAB>values', got {line!r}")
        key, _, raw_values = line.partition("\t")
        values = [value for value in raw_values.split(",") if value != ""]
        merged = list(table.get(key, ()))
        for value in values:
            if value not in merged:
                merged.append(value)
        table[key] = tuple(merged)
    logger.debug(f"Loaded table {path} with {len(table)} keys")
    return table


def load_class(path: PathLike) -> FrozenSet[str]:
    """Load a token class (one token per line)."""
    members = frozenset(line.strip() for _, line in _read_lines(path))
    logger.debug(f"Loaded class {path} with {len(members)} tokens")
    return members


@dataclass(frozen=True)
class ResourceTables:
    """
    Immutable collection of substitution tables and token classes.

    Tokens missing from a table simply produce no matches; only unknown
    table or class ids are errors.
    """
    tables: Mapping[str, Mapping[str, Tuple[str, ...]]] = field(
        default_factory=lambda: MappingProxyType({})
    )
    classes: Mapping[str, FrozenSet[str]] = field(default_factory=lambda: MappingProxyType({}))

    def __post_init__(self):
        frozen_tables = {name: MappingProxyType(dict(entries)) for name, entries in self.tables.items()}
        object.__setattr__(self, "tables", MappingProxyType(frozen_tables))
        object.__setattr__(self, "classes", MappingProxyType({k: frozenset(v) for k, v in self.classes.items()}))

    def table(self, name: str) -> Mapping[str, Tuple[str, ...]]:
        """Get a table by id."""
        if name not in self.tables:
            raise ResourceError(f"unknown table: {name}")
        return self.tables[name]

    def token_class(self, name: str) -> FrozenSet[str]:
        """Get a token class by id."""
        if name not in self.classes:
            raise ResourceError(f"unknown class: {name}")
        return self.classes[name]

    def has_table(self, name: str) -> bool:
        return name in self.tables

    def has_class(self, name: str) -> bool:
        return name in self.classes

    def merged(self, other: "ResourceTables") -> "ResourceTables":
        """Union of both collections; ``other`` wins on id clashes."""
        return ResourceTables(
            tables={**self.tables, **other.tables},
            classes={**self.classes, **other.classes},
        )

    def with_table(self, name: str, entries: Mapping[str, Tuple[str, ...]]) -> "ResourceTables":
        return self.merged(ResourceTables(tables={name: entries}))

    def with_class(self, name: str, members) -> "ResourceTables":
        return self.merged(ResourceTables(classes={name: frozenset(members)}))

    def all_tokens(self) -> FrozenSet[str]:
        """Every key, value and class member (vocabulary seeding)."""
        tokens = set()
        for entries in self.tables.values():
            for key, values in entries.items():
                tokens.add(key)
                tokens.update(values)
        for members in self.classes.values():
            tokens.update(members)
        return frozenset(tokens)

    def summary(self) -> Dict[str, int]:
        return {
            **{f"table:{name}": len(entries) for name, entries in self.tables.items()},
            **{f"class:{name}": len(members) for name, members in self.classes.items()},
        }

    # =========================================================================
    # Loading
    # =========================================================================

    @classmethod
    def from_files(
        cls,
        tables: Optional[Mapping[str, PathLike]] = None,
        classes: Optional[Mapping[str, PathLike]] = None,
        base_dir: Optional[PathLike] = None,
    ) -> "ResourceTables":
        """
        Load explicitly named files.

        Args:
            tables: table id -> path
            classes: class id -> path
            base_dir: Directory relative paths are resolved against
        """
        base = Path(base_dir) if base_dir else None

        def resolve(path: PathLike) -> Path:
            path = Path(path)
            return base / path if base is not None and not path.is_absolute() else path

        return cls(
            tables={name: load_table(resolve(path)) for name, path in (tables or {}).items()},
            classes={name: load_class(resolve(path)) for name, path in (classes or {}).items()},
        )

    @classmethod
    def load(cls, directory: PathLike) -> "ResourceTables":
        """Load ``tables/*.tsv`` and ``classes/*.txt`` from a directory."""
        directory = Path(directory)
        if not directory.is_dir():
            raise FileNotFoundError(f"resource directory not found: {directory}")
        tables = {path.stem: path for path in sorted((directory / "tables").glob("*.tsv"))}
        classes = {path.stem: path for path in sorted((directory / "classes").glob("*.txt"))}
        resources = cls.from_files(tables=tables, classes=classes)
        logger.info(f"Loaded resources from {directory}: {len(tables)} tables, {len(classes)} classes")
        return resources

    @classmethod
    def default(cls) -> "ResourceTables":
        """The resources shipped under the configured resources directory."""
        from config import settings
        return cls.load(settings.RESOURCES_DIR)
