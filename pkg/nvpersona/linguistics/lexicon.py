"""Lexicon — dictionary of word categories in a LIWC-style text format.

Grammar::

    # comment lines and blank lines are ignored everywhere
    %
    <category id> TAB <display name>
    ...
    %
    <pattern> TAB <category id>[,<category id>...]
    ...

A pattern is a lowercase word (``happy``, ``don't``) or a prefix
wildcard (``feel*`` matches feel, feels, feeling).  Category lists may be
separated by commas or whitespace, so dictionaries whose pattern lines
read ``word<TAB>1 2 7`` load unchanged.  A token may belong to any number
of categories; every category it matches counts it once.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from nvpersona.errors import LexiconError

_CAT_SPLIT_RE = re.compile(r"[,\s]+")


@dataclass(frozen=True)
class Category:
    """One lexicon category.

    Attributes:
        cat_id: Short identifier used in reports (``posemo``).
        name: Display name (``Positive emotion``).
        patterns: Literal words and ``stem*`` wildcards, file order.
    """

    cat_id: str
    name: str
    patterns: tuple[str, ...] = ()


@dataclass
class Lexicon:
    """Parsed category dictionary with a token lookup.

    Attributes:
        categories: Categories keyed by id, in header order.
        source: Where the lexicon was read from.
    """

    categories: dict[str, Category]
    source: str = "<memory>"
    _exact: dict[str, frozenset[str]] = field(init=False, repr=False)
    _prefix: dict[str, frozenset[str]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        """Index patterns for lookup."""
        exact: dict[str, set[str]] = {}
        prefix: dict[str, set[str]] = {}
        for cat in self.categories.values():
            for pattern in cat.patterns:
                if pattern.endswith("*"):
                    prefix.setdefault(pattern[:-1], set()).add(cat.cat_id)
                else:
                    exact.setdefault(pattern, set()).add(cat.cat_id)
        self._exact = {k: frozenset(v) for k, v in exact.items()}
        self._prefix = {k: frozenset(v) for k, v in prefix.items()}

    def ids(self) -> list[str]:
        """Category ids in header order."""
        return list(self.categories)

    def name_of(self, cat_id: str) -> str:
        """Display name of ``cat_id``."""
        return self.categories[cat_id].name

    def categories_for(self, token: str) -> frozenset[str]:
        """Every category matching ``token`` (already lowercased)."""
        found = set(self._exact.get(token, ()))
        for end in range(1, len(token) + 1):
            cats = self._prefix.get(token[:end])
            if cats:
                found.update(cats)
        return frozenset(found)

    def without(self, cat_id: str) -> Lexicon:
        """Copy of the lexicon with one category removed."""
        return Lexicon(
            {k: c for k, c in self.categories.items() if k != cat_id},
            source=self.source,
        )


def _check_pattern(pattern: str, line: int) -> None:
    if pattern != pattern.lower():
        msg = f"pattern {pattern!r} must be lowercase"
        raise LexiconError(msg, line)
    if pattern == "*":
        msg = "wildcard needs a non-empty stem"
        raise LexiconError(msg, line)
    if "*" in pattern[:-1]:
        msg = f"pattern {pattern!r}: '*' is only allowed at the end"
        raise LexiconError(msg, line)


def parse_lexicon(text: str, source: str = "<memory>") -> Lexicon:
    """Parse lexicon text.

    Raises:
        LexiconError: On any grammar or invariant violation, with the
            1-based line number.
    """
    section = 0  # 0 = preamble, 1 = header, 2 = patterns
    names: dict[str, str] = {}
    patterns: dict[str, list[str]] = {}
    last_line = 0

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        last_line = lineno
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if line == "%":
            section += 1
            if section > 2:
                msg = "more than two '%' separators"
                raise LexiconError(msg, lineno)
            continue
        if section == 0:
            msg = "content before the opening '%'"
            raise LexiconError(msg, lineno)

        key, sep, rest = raw_line.strip().partition("\t")
        if not sep:
            key, _, rest = line.partition(" ")
        key, rest = key.strip(), rest.strip()
        if not key or not rest:
            msg = f"expected '<key><TAB><value>', got {line!r}"
            raise LexiconError(msg, lineno)

        if section == 1:
            if key in names:
                msg = f"category {key!r} defined twice"
                raise LexiconError(msg, lineno)
            names[key] = rest
            patterns[key] = []
            continue

        _check_pattern(key, lineno)
        for cat_id in (c for c in _CAT_SPLIT_RE.split(rest) if c):
            if cat_id not in names:
                msg = f"unknown category {cat_id!r}"
                raise LexiconError(msg, lineno)
            if key in patterns[cat_id]:
                msg = f"pattern {key!r} listed twice for {cat_id}"
                raise LexiconError(msg, lineno)
            patterns[cat_id].append(key)

    if section < 2:
        msg = "expected a '%'-delimited category header followed by patterns"
        raise LexiconError(msg, last_line or None)
    if not names:
        msg = "no categories defined"
        raise LexiconError(msg, last_line or None)

    categories = {
        cat_id: Category(cat_id, name, tuple(patterns[cat_id]))
        for cat_id, name in names.items()
    }
    return Lexicon(categories, source=source)


def load_lexicon(path: str | Path) -> Lexicon:
    """Read a lexicon file.

    Raises:
        FileNotFoundError: If the file does not exist.
        LexiconError: On parse errors; the message names the file.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        return parse_lexicon(text, source=str(path))
    except LexiconError as exc:
        raise LexiconError(exc.message, exc.line, source=str(path)) from exc
