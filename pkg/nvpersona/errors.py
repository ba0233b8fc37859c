"""Errors — the exception hierarchy shared by every nvpersona package.

Each exception keeps the offending values as attributes so callers (the
CLI, the simulation engine's failure accounting, tests) can inspect them
without parsing messages.
"""

from __future__ import annotations

from collections.abc import Iterable


class NvPersonaError(Exception):
    """Root of all nvpersona errors."""


class ConfigError(NvPersonaError):
    """A configuration file or flag combination is invalid."""


# -- behavior markup ---------------------------------------------------------


class SchemaError(NvPersonaError):
    """An annotated utterance violates the nonverbal action schema."""


class UnknownAction(SchemaError):
    """A tag or JSON entry names no action in the schema."""

    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"unknown nonverbal action: {name!r}")


class ExclusionViolation(SchemaError):
    """Two or more actions from one exclusion group were selected together."""

    def __init__(self, group: str, actions: Iterable[str]) -> None:
        self.group = group
        self.actions = tuple(actions)
        joined = ", ".join(self.actions)
        super().__init__(f"actions [{joined}] share exclusion group {group!r}")


class EmptyText(SchemaError):
    """The utterance text is empty once tags are stripped."""


class MalformedPayload(SchemaError):
    """The raw LLM payload cannot be read in the requested format."""


# -- prompting ---------------------------------------------------------------


class PromptError(NvPersonaError):
    """A system prompt cannot be assembled."""


class CatalogIncomplete(PromptError):
    """The description catalog lacks entries for some schema actions."""

    def __init__(self, missing: Iterable[str]) -> None:
        self.missing = tuple(missing)
        super().__init__(
            f"description catalog missing {len(self.missing)} action(s): "
            + ", ".join(self.missing)
        )


# -- llm gateway -------------------------------------------------------------


class GatewayError(NvPersonaError):
    """A chat-completion backend failed."""


class TransportError(GatewayError):
    """An HTTP call failed; status 0 means no response (connection error)."""

    def __init__(self, status: int, detail: str = "") -> None:
        self.status = status
        self.detail = detail
        msg = f"HTTP {status}" if status else "connection failed"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)

    @property
    def transient(self) -> bool:
        """Whether the failure is worth retrying (no response, 429 or 5xx)."""
        return self.status in (0, 429) or self.status >= 500


class InvalidEndpoint(GatewayError):
    """The configured endpoint is not a usable URL; never retried."""

    def __init__(self, endpoint: str, detail: str = "") -> None:
        self.endpoint = endpoint
        msg = f"invalid endpoint {endpoint!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class AuthMissing(GatewayError):
    """The API-key environment variable is unset or empty."""

    def __init__(self, env_var: str) -> None:
        self.env_var = env_var
        super().__init__(f"environment variable {env_var} is not set")


class ScriptExhausted(GatewayError):
    """A scripted or replay backend has no responses left."""


class GatewayTimeout(GatewayError):
    """The HTTP backend did not answer within the configured timeout."""


class PartialCatalog(GatewayError):
    """Description generation stopped before covering every action.

    The catalog written so far is on disk and a rerun resumes from it.
    """

    def __init__(self, path: str, done: int, total: int) -> None:
        self.path = path
        self.done = done
        self.total = total
        super().__init__(
            f"description catalog {path} is partial ({done}/{total} actions); "
            "rerun to resume"
        )


# -- linguistics -------------------------------------------------------------


class LexiconError(NvPersonaError):
    """A lexicon file cannot be parsed."""

    def __init__(
        self, message: str, line: int | None = None, source: str | None = None
    ) -> None:
        self.message = message
        self.line = line
        self.source = source
        if line is not None:
            message = f"line {line}: {message}"
        if source is not None:
            message = f"{source}: {message}"
        super().__init__(message)


class EmptyDocument(NvPersonaError):
    """A document has no word tokens and cannot be scored."""


class EmptyGroup(NvPersonaError):
    """An aggregation group has no scoreable documents."""

    def __init__(self, group: str) -> None:
        self.group = group
        super().__init__(f"group {group} has no scoreable documents")


# -- statistics --------------------------------------------------------------


class StatsError(NvPersonaError):
    """A statistical test received inputs outside its domain."""


class DegenerateSamples(StatsError):
    """Both samples have zero variance but different means.

    Attributes:
        cohens_d: Signed infinity pointing in the direction of the mean
            difference.
    """

    def __init__(self, mean_a: float, mean_b: float) -> None:
        self.mean_a = mean_a
        self.mean_b = mean_b
        self.cohens_d = float("inf") if mean_a > mean_b else float("-inf")
        super().__init__(
            f"zero-variance samples with different means ({mean_a} vs {mean_b})"
        )


class ZeroMarginal(StatsError):
    """A contingency table has an all-zero row or column."""

    def __init__(self, axis: str, index: int) -> None:
        self.axis = axis
        self.index = index
        super().__init__(f"{axis} {index} of the contingency table sums to zero")


class YatesOnlyFor2x2(StatsError):
    """Yates' continuity correction was requested for a table with df != 1."""


# -- corpus ------------------------------------------------------------------


class CorpusError(NvPersonaError):
    """A run directory or transcript is unusable."""


class ManifestError(CorpusError):
    """A run manifest is missing, corrupt or inconsistent with its trials."""


class InvariantViolation(CorpusError):
    """A persisted trial breaks a protocol invariant."""

    def __init__(self, trial_id: str, rule: str, detail: str) -> None:
        self.trial_id = trial_id
        self.rule = rule
        self.detail = detail
        super().__init__(f"{trial_id}: {rule}: {detail}")
