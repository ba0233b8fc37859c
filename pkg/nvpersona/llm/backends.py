"""Backends — HTTP chat completion, scripted responses and transcript replay.

``HttpBackend`` speaks the chat-completion JSON wire format::

    POST {endpoint}
    {"model": ..., "messages": [{"role": ..., "content": ...}], "temperature"?: ...}
    -> {"choices": [{"message": {"content": "..."}}]}

and retries 429/5xx responses and timeouts with exponential backoff.

``ScriptedBackend`` replays an ordered list of canned responses and never
touches the network or the clock.  Script files are line-delimited JSON,
one response per line, either a bare JSON string or an object::

    {"content": "Hello!", "speaker": "generic"}
    {"content": {"text": "Hi!", "face": ["Smile Broadly"]}, "personality": "extrovert"}

Keys other than ``content`` are filters matched against the request's
routing context (speaker, scenario, personality, action...).  Object
contents are sent back as compact JSON.  Each trial consumes its own copy
of the script, so concurrent trials stay deterministic.  An optional
first line ``{"script": {"cycle": true}}`` restarts an exhausted script.

``ReplayBackend`` serves the raw payloads recorded in an earlier run
directory, trial by trial and speaker by speaker.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import backoff
import httpx

from nvpersona.errors import (
    AuthMissing,
    ConfigError,
    GatewayTimeout,
    InvalidEndpoint,
    ScriptExhausted,
    TransportError,
)
from nvpersona.llm.gateway import DEFAULT_MODEL, Backend, ChatRequest

logger = logging.getLogger(__name__)

DEFAULT_ENDPOINT = "https://api.openai.com/v1/chat/completions"
DEFAULT_API_KEY_ENV = "OPENAI_API_KEY"


class BackendKind(Enum):
    """Kind of chat-completion backend."""

    HTTP = "http"
    SCRIPTED = "scripted"
    REPLAY = "replay"


# -- scripted ----------------------------------------------------------------


@dataclass(frozen=True)
class ScriptEntry:
    """One canned response with optional routing filters."""

    content: str
    filters: tuple[tuple[str, str], ...] = ()

    def matches(self, context: dict[str, str]) -> bool:
        """Whether every filter equals the request's context value."""
        return all(context.get(key) == value for key, value in self.filters)

    @classmethod
    def from_record(cls, record: Any) -> ScriptEntry:
        """Build from a script-file record (string or object)."""
        if isinstance(record, str):
            return cls(content=record)
        if not isinstance(record, dict) or "content" not in record:
            msg = f"script record needs a 'content' field: {record!r}"
            raise ConfigError(msg)
        content = record["content"]
        if not isinstance(content, str):
            content = json.dumps(content, ensure_ascii=False)
        filters = tuple(
            sorted((k, str(v)) for k, v in record.items() if k != "content")
        )
        return cls(content=content, filters=filters)


@dataclass
class ScriptedBackend:
    """Deterministic backend answering from a fixed script.

    Attributes:
        entries: Responses in consumption order.
        cycle: Restart matching entries when they run out instead of
            raising ``ScriptExhausted``.
        source: Where the script came from (for the descriptor).
    """

    entries: list[ScriptEntry] = field(default_factory=list)
    cycle: bool = False
    source: str = "<inline>"
    _consumed: dict[str, set[int]] = field(init=False, default_factory=dict)
    _lock: threading.Lock = field(init=False, default_factory=threading.Lock)

    @classmethod
    def from_responses(
        cls, responses: Iterable[str], *, cycle: bool = False
    ) -> ScriptedBackend:
        """Script answering ``responses`` in order, regardless of context."""
        return cls(entries=[ScriptEntry(content=r) for r in responses], cycle=cycle)

    @classmethod
    def from_file(cls, path: str | Path) -> ScriptedBackend:
        """Load a line-delimited JSON script file.

        Raises:
            FileNotFoundError: If the file does not exist.
            ConfigError: On malformed lines.
        """
        path = Path(path)
        entries: list[ScriptEntry] = []
        cycle = False
        with path.open("r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    msg = f"{path}:{lineno}: {exc}"
                    raise ConfigError(msg) from exc
                if isinstance(record, dict) and "script" in record:
                    cycle = bool(record["script"].get("cycle", False))
                    continue
                try:
                    entries.append(ScriptEntry.from_record(record))
                except ConfigError as exc:
                    msg = f"{path}:{lineno}: {exc}"
                    raise ConfigError(msg) from exc
        return cls(entries=entries, cycle=cycle, source=str(path))

    @property
    def descriptor(self) -> str:
        """``scripted:<source>``."""
        return f"scripted:{Path(self.source).name}"

    def complete(self, request: ChatRequest) -> str:
        """Return the next unconsumed entry matching the request context.

        Raises:
            ScriptExhausted: If no matching entry is left (and not cycling).
        """
        context = dict(request.context)
        session = context.get("trial_id", "")
        with self._lock:
            consumed = self._consumed.setdefault(session, set())
            index = self._next_index(context, consumed)
            if index is None and self.cycle:
                consumed.difference_update(
                    i for i, e in enumerate(self.entries) if e.matches(context)
                )
                index = self._next_index(context, consumed)
            if index is None:
                msg = f"script {self.source} exhausted for context {context}"
                raise ScriptExhausted(msg)
            consumed.add(index)
            return self.entries[index].content

    def _next_index(self, context: dict[str, str], consumed: set[int]) -> int | None:
        for i, entry in enumerate(self.entries):
            if i not in consumed and entry.matches(context):
                return i
        return None


# -- http --------------------------------------------------------------------


def _is_permanent(exc: Exception) -> bool:
    return isinstance(exc, TransportError) and not exc.transient


def _log_backoff(details: dict[str, Any]) -> None:
    logger.warning(
        "HTTP attempt %d failed (%s); retrying in %.1fs",
        details["tries"],
        details.get("exception"),
        details.get("wait", 0.0),
    )


@dataclass
class HttpBackend:
    """Chat-completion client over HTTP.

    Attributes:
        endpoint: Full URL of the chat-completions route.
        api_key_env: Environment variable holding the bearer token.
        timeout: Per-request timeout in seconds.
        max_attempts: Attempts per request, first try included.
        backoff_base: First retry delay in seconds; doubles per retry.
        transport: Optional httpx transport (tests use ``MockTransport``).
    """

    endpoint: str = DEFAULT_ENDPOINT
    api_key_env: str = DEFAULT_API_KEY_ENV
    timeout: float = 60.0
    max_attempts: int = 3
    backoff_base: float = 1.0
    transport: httpx.BaseTransport | None = None
    _client: httpx.Client | None = field(init=False, default=None, repr=False)
    _client_lock: threading.Lock = field(init=False, default_factory=threading.Lock)

    @property
    def descriptor(self) -> str:
        """``http:<endpoint>``."""
        return f"http:{self.endpoint}"

    def api_key(self) -> str:
        """Return the API key.

        Raises:
            AuthMissing: If the environment variable is unset or empty.
        """
        key = os.environ.get(self.api_key_env, "").strip()
        if not key:
            raise AuthMissing(self.api_key_env)
        return key

    def _http(self) -> httpx.Client:
        with self._client_lock:
            if self._client is None:
                self._client = httpx.Client(
                    timeout=httpx.Timeout(self.timeout),
                    transport=self.transport,
                )
            return self._client

    def close(self) -> None:
        """Release the pooled HTTP connections."""
        with self._client_lock:
            if self._client is not None:
                self._client.close()
                self._client = None

    def _post(self, body: dict[str, Any], key: str) -> dict[str, Any]:
        headers = {"Content-Type": "application/json"}
        if key:
            headers["Authorization"] = f"Bearer {key}"
        try:
            response = self._http().post(self.endpoint, json=body, headers=headers)
        except httpx.InvalidURL as exc:
            raise InvalidEndpoint(self.endpoint, str(exc)) from exc
        except httpx.TimeoutException:
            raise
        except httpx.HTTPError as exc:
            raise TransportError(0, str(exc)) from exc
        if response.status_code >= 400:
            raise TransportError(response.status_code, response.text[:300])
        try:
            return response.json()
        except ValueError as exc:
            raise TransportError(response.status_code, "reply is not JSON") from exc

    def post_json(self, body: dict[str, Any], *, auth: bool = True) -> dict[str, Any]:
        """POST ``body`` with the retry policy and return the decoded reply.

        Args:
            body: JSON request body.
            auth: Send the bearer token (requires the key variable).

        Raises:
            AuthMissing: If ``auth`` and the key variable is unset.
            TransportError: Non-success status after retries.
            GatewayTimeout: Timed out on every attempt.
            InvalidEndpoint: If the endpoint is not a valid URL.
        """
        key = self.api_key() if auth else ""
        send = backoff.on_exception(
            backoff.expo,
            (TransportError, httpx.TimeoutException),
            max_tries=self.max_attempts,
            giveup=_is_permanent,
            factor=self.backoff_base,
            jitter=None,
            on_backoff=_log_backoff,
            raise_on_giveup=True,
        )(self._post)
        try:
            return send(body, key)
        except httpx.TimeoutException as exc:
            msg = f"no answer from {self.endpoint} within {self.timeout}s"
            raise GatewayTimeout(msg) from exc

    def complete(self, request: ChatRequest) -> str:
        """Send one chat-completion request.

        Raises:
            AuthMissing: Before any network call, if the key is missing.
            TransportError: Non-success status after retries, or a reply
                without ``choices[0].message.content``.
            GatewayTimeout: Timed out on every attempt.
        """
        data = self.post_json(request.to_wire())
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            msg = "reply lacks choices[0].message.content"
            raise TransportError(200, msg) from exc
        if not isinstance(content, str):
            raise TransportError(200, "reply content is not a string")
        return content


# -- replay ------------------------------------------------------------------


@dataclass
class ReplayBackend:
    """Serve raw payloads recorded in an earlier run directory.

    Attributes:
        run_dir: Run directory holding ``trials/*.jsonl``.
    """

    run_dir: Path
    _queues: dict[tuple[str, str], list[str]] = field(init=False, default_factory=dict)
    _lock: threading.Lock = field(init=False, default_factory=threading.Lock)

    def __post_init__(self) -> None:
        """Index every model-written utterance by (trial id, speaker)."""
        self.run_dir = Path(self.run_dir)
        trial_dir = self.run_dir / "trials"
        if not trial_dir.is_dir():
            msg = f"{self.run_dir} has no trials/ directory to replay"
            raise ConfigError(msg)
        for path in sorted(trial_dir.glob("*.jsonl")):
            with path.open("r", encoding="utf-8") as f:
                records = [json.loads(line) for line in f if line.strip()]
            for record in sorted(records, key=lambda r: r["turn_index"]):
                if record.get("origin") == "engine":
                    continue
                key = (record["trial_id"], record["speaker"])
                self._queues.setdefault(key, []).append(record["raw"])

    @property
    def descriptor(self) -> str:
        """``replay:<run dir name>``."""
        return f"replay:{self.run_dir.name}"

    def complete(self, request: ChatRequest) -> str:
        """Pop the next recorded payload for the request's trial and speaker.

        Raises:
            ScriptExhausted: If the recording has no payload left.
        """
        key = (request.context.get("trial_id", ""), request.context.get("speaker", ""))
        with self._lock:
            queue = self._queues.get(key)
            if not queue:
                msg = f"no recorded payload left for trial {key[0]} speaker {key[1]}"
                raise ScriptExhausted(msg)
            return queue.pop(0)


# -- construction ------------------------------------------------------------


@dataclass
class BackendConfig:
    """Backend settings from the config file and CLI.

    Attributes:
        kind: Which backend to build.
        script: Script file (scripted backend).
        replay_dir: Run directory (replay backend).
        endpoint: Chat-completions URL (http backend).
        api_key_env: Name of the API-key variable (http backend).
        model: Model identifier.
        temperature: Sampling temperature; ``None`` = provider default.
        timeout: Request timeout in seconds.
        max_attempts: Attempts per request.
        backoff_base: First retry delay in seconds.
        max_concurrency: In-flight request cap.
    """

    kind: BackendKind = BackendKind.SCRIPTED
    script: str | None = None
    replay_dir: str | None = None
    endpoint: str = DEFAULT_ENDPOINT
    api_key_env: str = DEFAULT_API_KEY_ENV
    model: str = DEFAULT_MODEL
    temperature: float | None = None
    timeout: float = 60.0
    max_attempts: int = 3
    backoff_base: float = 1.0
    max_concurrency: int = 4

    @classmethod
    def from_dict(cls, data: dict[str, Any] | None) -> BackendConfig:
        """Build from the config file's ``backend`` mapping."""
        data = data or {}
        try:
            kind = BackendKind(data.get("kind", cls.kind.value))
        except ValueError:
            msg = f"unknown backend kind {data.get('kind')!r}"
            raise ConfigError(msg) from None
        return cls(
            kind=kind,
            script=data.get("script"),
            replay_dir=data.get("replay_dir"),
            endpoint=data.get("endpoint", cls.endpoint),
            api_key_env=data.get("api_key_env", cls.api_key_env),
            model=data.get("model", cls.model),
            temperature=data.get("temperature"),
            timeout=float(data.get("timeout", cls.timeout)),
            max_attempts=int(data.get("max_attempts", cls.max_attempts)),
            backoff_base=float(data.get("backoff_base", cls.backoff_base)),
            max_concurrency=int(data.get("max_concurrency", cls.max_concurrency)),
        )

    def with_spec(self, spec: str) -> BackendConfig:
        """Apply a CLI backend spec: ``http``, ``scripted:FILE`` or ``replay:DIR``."""
        kind_text, _, arg = spec.partition(":")
        try:
            kind = BackendKind(kind_text)
        except ValueError:
            msg = f"unknown backend {spec!r} (use http, scripted:FILE or replay:DIR)"
            raise ConfigError(msg) from None
        data = self.to_dict()
        data["kind"] = kind.value
        if kind is BackendKind.SCRIPTED:
            data["script"] = arg or self.script
        elif kind is BackendKind.REPLAY:
            data["replay_dir"] = arg or self.replay_dir
        elif arg:
            data["endpoint"] = arg
        return BackendConfig.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form for the run manifest."""
        return {
            "kind": self.kind.value,
            "script": self.script,
            "replay_dir": self.replay_dir,
            "endpoint": self.endpoint,
            "api_key_env": self.api_key_env,
            "model": self.model,
            "temperature": self.temperature,
            "timeout": self.timeout,
            "max_attempts": self.max_attempts,
            "backoff_base": self.backoff_base,
            "max_concurrency": self.max_concurrency,
        }


def build_backend(config: BackendConfig) -> Backend:
    """Instantiate the backend described by ``config``.

    Raises:
        ConfigError: If a scripted/replay backend lacks its file.
    """
    match config.kind:
        case BackendKind.SCRIPTED:
            if not config.script:
                msg = "scripted backend needs a script file (scripted:FILE)"
                raise ConfigError(msg)
            return ScriptedBackend.from_file(config.script)
        case BackendKind.REPLAY:
            if not config.replay_dir:
                msg = "replay backend needs a run directory (replay:DIR)"
                raise ConfigError(msg)
            return ReplayBackend(run_dir=Path(config.replay_dir))
        case BackendKind.HTTP:
            return HttpBackend(
                endpoint=config.endpoint,
                api_key_env=config.api_key_env,
                timeout=config.timeout,
                max_attempts=config.max_attempts,
                backoff_base=config.backoff_base,
            )
    msg = f"unsupported backend kind {config.kind}"
    raise ConfigError(msg)
