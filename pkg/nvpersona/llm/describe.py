"""Describe — offline natural-language descriptions of animation clips.

For every action in the schema, the model is shown the metadata of one
of its animation clips and asked for a one-sentence description of the
visible movement.  ``k`` descriptions are collected per action (cycling
through the action's clips) and written to the description catalog.

Progress is saved after every action with ``complete: false`` in the
catalog header, so an interrupted run resumes where it stopped.  A
catalog that is already complete is left untouched unless ``force`` is
set.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from nvpersona.behavior.schema import ActionSchema, load_schema
from nvpersona.errors import ConfigError, GatewayError, PartialCatalog
from nvpersona.llm.gateway import (
    DEFAULT_MODEL,
    Backend,
    ChatMessage,
    ChatRequest,
    Gateway,
)
from nvpersona.persona.catalog import DescriptionCatalog, load_catalog, write_catalog

logger = logging.getLogger(__name__)

DEFAULT_K = 3

_SYSTEM_PROMPT = (
    "You describe short character-animation clips for a virtual conversational "
    "agent. Given a clip's metadata, write one sentence describing the visible "
    "movement: which body parts move, in what direction, how large and how fast. "
    "Do not repeat the action label and do not interpret emotions beyond what is "
    "visible. Reply with the sentence only."
)


@dataclass(frozen=True)
class ClipSpec:
    """Metadata of one animation clip.

    Attributes:
        action: Schema action the clip realizes.
        clip: Clip identifier (file or asset name).
        duration: Length in seconds.
        body_parts: Body parts that move.
        notes: Free-form animator notes.
    """

    action: str
    clip: str
    duration: float = 0.0
    body_parts: tuple[str, ...] = ()
    notes: str = ""

    def to_prompt(self) -> str:
        """Render the metadata as the user message."""
        lines = [f"Clip: {self.clip}"]
        if self.duration:
            lines.append(f"Duration: {self.duration:g} s")
        if self.body_parts:
            lines.append("Moving body parts: " + ", ".join(self.body_parts))
        if self.notes:
            lines.append(f"Notes: {self.notes}")
        return "\n".join(lines)


@dataclass
class ClipManifest:
    """All clips, grouped per action.

    Attributes:
        clips: Clips per action name, in file order.
    """

    clips: dict[str, list[ClipSpec]] = field(default_factory=dict)

    @classmethod
    def from_entries(cls, entries: list[ClipSpec]) -> ClipManifest:
        """Group a flat clip list by action."""
        manifest = cls()
        for entry in entries:
            manifest.clips.setdefault(entry.action, []).append(entry)
        return manifest

    def check_covers(self, schema: ActionSchema) -> None:
        """Raise ``ConfigError`` unless every action has a clip or names exist."""
        unknown = sorted(a for a in self.clips if a not in schema)
        if unknown:
            msg = "clip manifest names unknown actions: " + ", ".join(unknown)
            raise ConfigError(msg)
        missing = [a for a in schema.names() if not self.clips.get(a)]
        if missing:
            msg = "clip manifest has no clip for: " + ", ".join(missing)
            raise ConfigError(msg)


def load_clip_manifest(path: str | Path) -> ClipManifest:
    """Read a YAML clip manifest (``clips:`` list of clip mappings).

    Raises:
        FileNotFoundError: If the file does not exist.
        ConfigError: On entries without ``action`` or ``clip``.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8") as f:
        data: dict[str, Any] = yaml.safe_load(f) or {}
    entries = []
    for i, item in enumerate(data.get("clips", [])):
        if not isinstance(item, dict) or "action" not in item or "clip" not in item:
            msg = f"{path}: clip #{i} needs 'action' and 'clip'"
            raise ConfigError(msg)
        entries.append(
            ClipSpec(
                action=item["action"],
                clip=item["clip"],
                duration=float(item.get("duration", 0.0)),
                body_parts=tuple(item.get("body_parts", ())),
                notes=item.get("notes", ""),
            )
        )
    return ClipManifest.from_entries(entries)


def generate_descriptions(
    manifest: ClipManifest,
    backend: Backend | Gateway,
    k: int,
    catalog_path: str | Path,
    *,
    schema: ActionSchema | None = None,
    force: bool = False,
    model: str = DEFAULT_MODEL,
) -> DescriptionCatalog:
    """Build (or finish) the description catalog.

    Args:
        manifest: Clip metadata covering every schema action.
        backend: Where description requests go.
        k: Descriptions per action.
        catalog_path: Catalog file to read progress from and write to.
        schema: Action schema (defaults to the shared one).
        force: Regenerate even if a complete catalog exists.
        model: Model identifier for the requests.

    Returns:
        The complete catalog.

    Raises:
        ConfigError: If ``k < 1`` or the manifest misses actions.
        PartialCatalog: If the backend fails midway; progress is saved.
    """
    if k < 1:
        msg = f"k must be >= 1, got {k}"
        raise ConfigError(msg)
    schema = schema or load_schema()
    manifest.check_covers(schema)
    catalog_path = Path(catalog_path)

    catalog = DescriptionCatalog(k=k)
    if catalog_path.exists() and not force:
        existing, complete = load_catalog(catalog_path)
        if complete and existing.is_complete(schema, k):
            logger.info("catalog %s already complete, nothing to do", catalog_path)
            return existing
        catalog = existing
        catalog.k = k
        logger.info(
            "resuming catalog %s (%d descriptions present)",
            catalog_path,
            catalog.total(),
        )

    todo = catalog.missing(schema, k)
    for done, action in enumerate(todo):
        clips = manifest.clips[action]
        while len(catalog.descriptions.get(action, [])) < k:
            index = len(catalog.descriptions.get(action, []))
            clip = clips[index % len(clips)]
            request = ChatRequest(
                messages=(
                    ChatMessage("system", _SYSTEM_PROMPT),
                    ChatMessage(
                        "user",
                        f"{clip.to_prompt()}\n"
                        f"This is description {index + 1} of {k}; vary the "
                        "wording from earlier descriptions.",
                    ),
                ),
                model=model,
                context={"action": action, "clip": clip.clip},
            )
            try:
                text = backend.complete(request)
                catalog.add(action, " ".join(text.split()))
            except (GatewayError, ConfigError) as exc:
                write_catalog(catalog_path, catalog, schema, complete=False)
                covered = len(schema) - len(catalog.missing(schema, k))
                raise PartialCatalog(str(catalog_path), covered, len(schema)) from exc
        write_catalog(catalog_path, catalog, schema, complete=False)
        logger.debug("described %s (%d/%d)", action, done + 1, len(todo))

    write_catalog(catalog_path, catalog, schema, complete=True)
    logger.info(
        "catalog %s complete: %d descriptions for %d actions",
        catalog_path,
        catalog.total(),
        len(schema),
    )
    return catalog
