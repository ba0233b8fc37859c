"""DialogueEngine — the turn loop of one simulated conversation.

Two agents share a scenario: the personality agent, conditioned on
Extrovert or Introvert, and the generic agent, which gets no personality
block.  The engine alternates speakers starting with the scenario's
opening speaker and, on every turn:

1. writes the fixed ice-breaking question itself if it is the
   questioner's turn and a question is still pending;
2. otherwise asks the model for the next payload, with the dialogue so
   far as chat history;
3. parses the payload (annotated for the personality agent, plain text
   for the generic one unless ``annotate_generic`` is set);
4. appends the accepted utterance and flushes it to the transcript.

A dialogue ends when the turn cap is reached or an agent emits the
scenario's terminator (once every fixed question has been asked).  A turn
whose payload cannot be parsed, whose request fails, or which holds only
the terminator while questions are pending is recorded and retried;
after ``max_consecutive_failures`` failures in a row the trial is marked
failed and the engine moves on.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

from nvpersona.behavior.markup import (
    AnnotatedUtterance,
    PayloadFormat,
    parse_annotated,
)
from nvpersona.behavior.schema import ActionSchema, load_schema
from nvpersona.errors import (
    AuthMissing,
    EmptyText,
    GatewayError,
    MalformedPayload,
    SchemaError,
)
from nvpersona.llm.gateway import (
    DEFAULT_MODEL,
    Backend,
    ChatMessage,
    ChatRequest,
    Gateway,
)
from nvpersona.persona.catalog import DescriptionCatalog
from nvpersona.persona.profiles import (
    Personality,
    PersonalityProfile,
    default_profiles,
)
from nvpersona.persona.prompts import build_system_prompt
from nvpersona.persona.scenarios import ScenarioConfig, ScenarioKind, Speaker
from nvpersona.simulation.transcript import (
    ENGINE_ORIGIN,
    MODEL_ORIGIN,
    TranscriptWriter,
    Trial,
    TrialStatus,
    TurnError,
    trial_id_for,
)

logger = logging.getLogger(__name__)

KICKOFF = "(The conversation begins. You speak first.)"


def utc_now() -> str:
    """Current UTC time in ISO-8601, to the second."""
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class TrialSettings:
    """Inputs shared by every trial of a run.

    Attributes:
        catalog: Clip descriptions for the action list.
        schema: The nonverbal action schema.
        profiles: Persona conditioning per personality.
        payload_format: Annotation syntax asked of annotated agents.
        annotate_generic: Give the generic agent the action list.
        lenient: Downgrade unknown tags to warnings.
        max_consecutive_failures: Failed turns in a row before aborting.
        model: Model identifier sent with every request.
        temperature: Sampling temperature (``None`` = provider default).
        clock: Timestamp source; ``None`` records no times.
    """

    catalog: DescriptionCatalog
    schema: ActionSchema = field(default_factory=load_schema)
    profiles: dict[Personality, PersonalityProfile] = field(
        default_factory=default_profiles
    )
    payload_format: PayloadFormat = PayloadFormat.STRUCTURED_JSON
    annotate_generic: bool = False
    lenient: bool = False
    max_consecutive_failures: int = 3
    model: str = DEFAULT_MODEL
    temperature: float | None = None
    clock: Callable[[], str] | None = None


@dataclass
class DialogueEngine:
    """Drives one dialogue forward turn by turn.

    Attributes:
        scenario: Conversation setting.
        personality: Personality of the conditioned agent.
        backend: Where completion requests go.
        settings: Run-wide inputs.
        trial: The trial being filled in.
        writer: Transcript sink; ``None`` keeps the dialogue in memory.
    """

    scenario: ScenarioConfig
    personality: Personality
    backend: Backend | Gateway
    settings: TrialSettings
    trial: Trial
    writer: TranscriptWriter | None = None
    prompts: dict[Speaker, str] = field(init=False)
    questions_asked: int = field(init=False, default=0)
    failures: int = field(init=False, default=0)
    finished: bool = field(init=False, default=False)

    def __post_init__(self) -> None:
        """Build both agents' system prompts."""
        s = self.settings
        self.prompts = {
            Speaker.PERSONALITY: build_system_prompt(
                s.profiles[self.personality],
                self.scenario,
                s.schema,
                s.catalog,
                Speaker.PERSONALITY,
                seed=self.trial.seed,
                fmt=s.payload_format,
            ),
            Speaker.GENERIC: build_system_prompt(
                s.profiles[Personality.GENERIC],
                self.scenario,
                s.schema,
                s.catalog,
                Speaker.GENERIC,
                seed=self.trial.seed,
                annotate=s.annotate_generic,
                fmt=s.payload_format,
            ),
        }

    @property
    def turn_index(self) -> int:
        """Index of the next turn."""
        return len(self.trial.utterances)

    @property
    def next_speaker(self) -> Speaker:
        """Agent whose turn it is."""
        opener = self.scenario.opening_speaker
        return opener if self.turn_index % 2 == 0 else opener.other

    @property
    def questions_pending(self) -> bool:
        """Whether fixed ice-breaking questions remain to be asked."""
        return self.scenario.kind is ScenarioKind.ICE_BREAKING and (
            self.questions_asked < len(self.scenario.fixed_questions)
        )

    def annotates(self, speaker: Speaker) -> bool:
        """Whether ``speaker`` answers with nonverbal annotations."""
        return speaker is Speaker.PERSONALITY or self.settings.annotate_generic

    def messages_for(self, speaker: Speaker) -> tuple[ChatMessage, ...]:
        """Chat history from ``speaker``'s point of view."""
        messages = [ChatMessage("system", self.prompts[speaker])]
        if speaker is self.scenario.opening_speaker:
            messages.append(ChatMessage("user", KICKOFF))
        for u in self.trial.utterances:
            if u.speaker == speaker.value:
                own = u.raw if self.annotates(speaker) and u.raw else u.text
                messages.append(ChatMessage("assistant", own))
            else:
                messages.append(ChatMessage("user", u.text))
        return tuple(messages)

    def step(self) -> None:
        """Play one turn (or one failed attempt at it)."""
        speaker = self.next_speaker
        turn = self.turn_index

        if speaker is self.scenario.questioner and self.questions_pending:
            question = self.scenario.fixed_questions[self.questions_asked]
            self.questions_asked += 1
            self._accept(
                AnnotatedUtterance(
                    speaker=speaker.value, text=question, turn_index=turn, raw=question
                ),
                origin=ENGINE_ORIGIN,
            )
            return

        request = ChatRequest(
            messages=self.messages_for(speaker),
            model=self.settings.model,
            temperature=self.settings.temperature,
            context={
                "trial_id": self.trial.trial_id,
                "speaker": speaker.value,
                "scenario": self.scenario.kind.value,
                "personality": self.personality.value,
                "turn_index": str(turn),
            },
        )
        raw = ""
        try:
            raw = self.backend.complete(request)
            utterance, terminated = self._parse(raw, speaker, turn)
        except AuthMissing:
            raise
        except (GatewayError, SchemaError) as exc:
            self._record_failure(turn, speaker, exc, raw)
            return

        if utterance is None and self.questions_pending:
            # Nothing to append, and the dialogue cannot end yet.
            msg = "terminator-only reply while fixed questions are pending"
            self._record_failure(turn, speaker, EmptyText(msg), raw)
            return
        self.failures = 0
        if utterance is not None:
            self._accept(utterance, origin=MODEL_ORIGIN)
        if terminated:
            if self.questions_pending:
                logger.debug(
                    "%s: ignoring terminator at turn %d, questions pending",
                    self.trial.trial_id,
                    turn,
                )
            else:
                logger.debug("%s: terminator at turn %d", self.trial.trial_id, turn)
                self.finished = True

    def run(self) -> Trial:
        """Play turns until the dialogue ends, the cap is hit or it fails."""
        trial = self.trial
        trial.backend = self.backend.descriptor
        if self.settings.clock is not None:
            trial.started = self.settings.clock()
        logger.info("trial %s started", trial.trial_id)

        while not self.finished and self.turn_index < self.scenario.max_turns:
            self.step()

        if trial.status is not TrialStatus.FAILED:
            trial.status = TrialStatus.COMPLETED
        if self.settings.clock is not None:
            trial.ended = self.settings.clock()
        logger.info(
            "trial %s %s after %d utterances",
            trial.trial_id,
            trial.status.value,
            len(trial.utterances),
        )
        return trial

    # -- internals -----------------------------------------------------------

    def _parse(
        self, raw: str, speaker: Speaker, turn: int
    ) -> tuple[AnnotatedUtterance | None, bool]:
        """Parse a payload; ``None`` means it held nothing but the terminator."""
        terminator = self.scenario.terminator
        terminated = terminator in raw
        body = raw.replace(terminator, " ") if terminated else raw

        if not self.annotates(speaker):
            text = " ".join(body.split())
            if not text:
                if terminated:
                    return None, True
                msg = "empty reply"
                raise EmptyText(msg)
            return (
                AnnotatedUtterance(
                    speaker=speaker.value, text=text, turn_index=turn, raw=raw
                ),
                terminated,
            )

        fmt = self.settings.payload_format
        # Models asked for JSON sometimes answer in prose with inline tags.
        if fmt is PayloadFormat.STRUCTURED_JSON and "{" not in body:
            fmt = PayloadFormat.INLINE_TAGS
        try:
            utterance = parse_annotated(
                body,
                fmt,
                speaker=speaker.value,
                turn_index=turn,
                schema=self.settings.schema,
                lenient=self.settings.lenient,
            )
        except (EmptyText, MalformedPayload):
            if terminated:
                return None, True
            raise
        return replace(utterance, raw=raw), terminated

    def _accept(self, utterance: AnnotatedUtterance, *, origin: str) -> None:
        self.trial.utterances.append(utterance)
        if self.writer is not None:
            self.writer.write(self.trial.trial_id, utterance, origin=origin)
        logger.debug(
            "%s turn %d (%s): %s",
            self.trial.trial_id,
            utterance.turn_index,
            utterance.speaker,
            utterance.text,
        )

    def _record_failure(
        self, turn: int, speaker: Speaker, exc: Exception, raw: str
    ) -> None:
        error = f"{type(exc).__name__}: {exc}"
        self.trial.errors.append(TurnError(turn, speaker.value, error, raw))
        self.failures += 1
        logger.warning(
            "%s turn %d (%s) discarded: %s",
            self.trial.trial_id,
            turn,
            speaker.value,
            error,
        )
        if self.failures >= self.settings.max_consecutive_failures:
            self.trial.status = TrialStatus.FAILED
            self.trial.failure = f"{self.failures} consecutive failed turns; {error}"
            self.finished = True


def run_trial(
    scenario: ScenarioConfig,
    personality: Personality,
    backend: Backend | Gateway,
    seed: int,
    *,
    settings: TrialSettings,
    trial_id: str | None = None,
    index: int = 0,
    writer: TranscriptWriter | None = None,
) -> Trial:
    """Simulate one dialogue.

    Args:
        scenario: Conversation setting.
        personality: Extrovert or Introvert for the conditioned agent.
        backend: Where completion requests go.
        seed: Trial seed (drives description sampling in the prompts).
        settings: Run-wide inputs.
        trial_id: Identifier; defaults to ``<scenario>-<personality>-<index>``.
        index: Trial number within its cell.
        writer: Transcript sink, written turn by turn.

    Returns:
        The trial, completed or failed.

    Raises:
        CatalogIncomplete: If the catalog misses actions.
        AuthMissing: If the HTTP backend has no API key.
    """
    if personality is Personality.GENERIC:
        msg = "the conditioned agent must be Extrovert or Introvert"
        raise ValueError(msg)
    settings.catalog.require_complete(settings.schema)
    trial = Trial(
        trial_id=trial_id or trial_id_for(scenario.kind, personality, index),
        scenario=scenario.kind,
        personality=personality,
        index=index,
        seed=seed,
    )
    engine = DialogueEngine(
        scenario=scenario,
        personality=personality,
        backend=backend,
        settings=settings,
        trial=trial,
        writer=writer,
    )
    return engine.run()
