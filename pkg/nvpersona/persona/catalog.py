"""Catalog — natural-language descriptions of the animation clips.

Each schema action is backed by one or more animation clips.  The
offline description step (``nvpersona.llm.describe``) turns every clip
into prose such as "the right hand moves in a large circular motion
followed by a simultaneous raise of both arms"; prompts then show the
model one description per action so it can reason about what each
action looks like.

File format (line-delimited JSON)::

    {"complete": true, "k": 3, "kind": "nvpersona.description_catalog",
     "schema_version": 1}
    {"action": "Nod", "description": "..."}
    ...

The header's ``complete`` flag is the resume marker: a catalog written
mid-run has ``complete: false`` and the remaining actions are generated
on the next invocation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from numpy.random import Generator

from nvpersona.behavior.schema import ActionSchema
from nvpersona.errors import CatalogIncomplete, ConfigError
from nvpersona.fileio import write_text_atomic

CATALOG_KIND = "nvpersona.description_catalog"
CATALOG_SCHEMA_VERSION = 1


@dataclass
class DescriptionCatalog:
    """Mapping from action name to clip descriptions.

    Attributes:
        descriptions: Descriptions per action, in generation order.
        k: Target number of descriptions per action.
    """

    descriptions: dict[str, list[str]] = field(default_factory=dict)
    k: int = 1

    def add(self, action: str, description: str) -> None:
        """Append one description for ``action``.

        Raises:
            ConfigError: If the description is blank.
        """
        if not description.strip():
            msg = f"blank description for {action}"
            raise ConfigError(msg)
        self.descriptions.setdefault(action, []).append(description.strip())

    def missing(self, schema: ActionSchema, k: int = 1) -> list[str]:
        """Return schema actions with fewer than ``k`` descriptions."""
        return [
            name for name in schema.names() if len(self.descriptions.get(name, [])) < k
        ]

    def is_complete(self, schema: ActionSchema, k: int | None = None) -> bool:
        """Whether every action has at least ``k`` descriptions."""
        return not self.missing(schema, self.k if k is None else k)

    def require_complete(self, schema: ActionSchema) -> None:
        """Raise ``CatalogIncomplete`` unless every action has a description."""
        missing = self.missing(schema, 1)
        if missing:
            raise CatalogIncomplete(missing)

    def sample(self, schema: ActionSchema, rng: Generator) -> dict[str, str]:
        """Pick one description per action, in schema order.

        Args:
            schema: Actions to cover.
            rng: Seeded generator; one draw per action, schema order.

        Returns:
            Action name to chosen description.

        Raises:
            CatalogIncomplete: If some action has no description.
        """
        self.require_complete(schema)
        chosen: dict[str, str] = {}
        for name in schema.names():
            options = self.descriptions[name]
            chosen[name] = options[int(rng.integers(len(options)))]
        return chosen

    def total(self) -> int:
        """Total number of stored descriptions."""
        return sum(len(v) for v in self.descriptions.values())


def load_catalog(path: str | Path) -> tuple[DescriptionCatalog, bool]:
    """Read a catalog file.

    Args:
        path: Catalog file location.

    Returns:
        The catalog and the header's ``complete`` flag.

    Raises:
        FileNotFoundError: If the file does not exist.
        ConfigError: On an unknown header or malformed record.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8") as f:
        lines = [line for line in f if line.strip()]
    if not lines:
        msg = f"{path}: empty catalog file"
        raise ConfigError(msg)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        msg = f"{path}:1: bad header: {exc}"
        raise ConfigError(msg) from exc
    if header.get("kind") != CATALOG_KIND:
        msg = f"{path}: not a description catalog"
        raise ConfigError(msg)
    if header.get("schema_version") != CATALOG_SCHEMA_VERSION:
        msg = f"{path}: unsupported catalog version {header.get('schema_version')}"
        raise ConfigError(msg)

    catalog = DescriptionCatalog(k=int(header.get("k", 1)))
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            record = json.loads(line)
            catalog.add(record["action"], record["description"])
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            msg = f"{path}:{lineno}: bad record: {exc}"
            raise ConfigError(msg) from exc
    return catalog, bool(header.get("complete", False))


def write_catalog(
    path: str | Path,
    catalog: DescriptionCatalog,
    schema: ActionSchema,
    *,
    complete: bool,
) -> None:
    """Write a catalog atomically (temp file, then rename).

    Records are written in schema order so the file diffs cleanly.
    """
    header = {
        "kind": CATALOG_KIND,
        "schema_version": CATALOG_SCHEMA_VERSION,
        "k": catalog.k,
        "complete": complete,
    }
    order = {name: i for i, name in enumerate(schema.names())}
    actions = sorted(catalog.descriptions, key=lambda a: (order.get(a, len(order)), a))
    lines = [json.dumps(header, sort_keys=True) + "\n"]
    for action in actions:
        for description in catalog.descriptions[action]:
            record = {"action": action, "description": description}
            lines.append(json.dumps(record, ensure_ascii=False) + "\n")
    write_text_atomic(path, "".join(lines))
