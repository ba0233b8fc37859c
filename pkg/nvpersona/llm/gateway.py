"""Gateway — uniform chat-completion interface over interchangeable backends.

Every model call in the package goes through ``Gateway.complete`` (or the
module-level ``complete`` helper).  Backends implement one method,
``complete(request) -> str``; the gateway adds the concurrency cap.  It
is the only place network activity can happen: everything downstream
is a pure function of the strings it returns.
"""

from __future__ import annotations

import logging
import threading
from collections.abc import Mapping
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Protocol

logger = logging.getLogger(__name__)

DEFAULT_MODEL = "gpt-4o-mini-2024-07-18"


@dataclass(frozen=True)
class ChatMessage:
    """One chat message.

    Attributes:
        role: ``"system"``, ``"user"`` or ``"assistant"``.
        content: Message text.
    """

    role: str
    content: str

    def to_wire(self) -> dict[str, str]:
        """Chat-completion JSON shape."""
        return {"role": self.role, "content": self.content}


@dataclass(frozen=True)
class ChatRequest:
    """A chat-completion request.

    Attributes:
        messages: Conversation so far; the first message is the system
            prompt.
        model: Model identifier.
        temperature: Sampling temperature; ``None`` leaves the field out
            so the provider default applies.
        seed: Provider-side sampling seed, sent only when set.
        context: Routing metadata (trial id, speaker, scenario...) used
            by scripted and replay backends.  Never sent over the wire.
    """

    messages: tuple[ChatMessage, ...]
    model: str = DEFAULT_MODEL
    temperature: float | None = None
    seed: int | None = None
    context: Mapping[str, str] = field(
        default_factory=lambda: MappingProxyType({}), compare=False
    )

    def __post_init__(self) -> None:
        """Require a leading system prompt."""
        if not self.messages:
            msg = "a chat request needs at least one message"
            raise ValueError(msg)
        if self.messages[0].role != "system":
            first = self.messages[0].role
            msg = f"first message must be the system prompt, got {first!r}"
            raise ValueError(msg)

    def to_wire(self) -> dict[str, Any]:
        """Request body in the chat-completion JSON shape."""
        body: dict[str, Any] = {
            "model": self.model,
            "messages": [m.to_wire() for m in self.messages],
        }
        if self.temperature is not None:
            body["temperature"] = self.temperature
        if self.seed is not None:
            body["seed"] = self.seed
        return body


class Backend(Protocol):
    """Anything that can answer a chat request."""

    @property
    def descriptor(self) -> str:
        """Short description recorded in trial metadata."""
        ...

    def complete(self, request: ChatRequest) -> str:
        """Return the assistant message content for ``request``."""
        ...


@dataclass
class Gateway:
    """A backend behind a concurrency cap.

    Attributes:
        backend: Where requests go.
        max_concurrency: Maximum simultaneous in-flight requests.
    """

    backend: Backend
    max_concurrency: int = 4
    _slots: threading.BoundedSemaphore = field(init=False, repr=False)

    def __post_init__(self) -> None:
        """Create the semaphore guarding in-flight requests."""
        if self.max_concurrency < 1:
            msg = f"max_concurrency must be >= 1, got {self.max_concurrency}"
            raise ValueError(msg)
        self._slots = threading.BoundedSemaphore(self.max_concurrency)

    @property
    def descriptor(self) -> str:
        """The wrapped backend's descriptor."""
        return self.backend.descriptor

    def complete(self, request: ChatRequest) -> str:
        """Send ``request`` once a slot is free.

        Raises:
            GatewayError: Whatever the backend raises.
        """
        with self._slots:
            logger.debug(
                "completion request (%d messages, context=%s)",
                len(request.messages),
                dict(request.context),
            )
            return self.backend.complete(request)


def complete(request: ChatRequest, backend: Backend | Gateway) -> str:
    """Return the assistant content for ``request`` from ``backend``."""
    return backend.complete(request)
