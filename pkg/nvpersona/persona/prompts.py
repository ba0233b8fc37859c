"""Prompts — system prompts conditioning an agent on personality and scenario.

A prompt is built from five blocks, in this order:

1. the personality block (trait definition plus per-modality guidance),
   omitted entirely for the Generic profile;
2. the scenario narrative and the agent's role brief (with the fixed
   questions when the agent is the ice-breaking questioner);
3. the nonverbal action list, every action with one sampled clip
   description;
4. the output-format contract;
5. the end-of-dialogue rule.

Extrovert and Introvert prompts for the same scenario, role and seed
differ only inside block 1, so simulation contrasts isolate personality.
"""

from __future__ import annotations

import numpy as np

from nvpersona.behavior.markup import PayloadFormat
from nvpersona.behavior.schema import ActionSchema, Modality
from nvpersona.persona.catalog import DescriptionCatalog
from nvpersona.persona.profiles import PersonalityProfile
from nvpersona.persona.scenarios import ScenarioConfig, ScenarioKind, Speaker

_JSON_CONTRACT = (
    "Reply with a single JSON object and nothing else:\n"
    '{{"text": "<what you say>", "face": [...], "body": [...], "voice": [...]}}\n'
    "Each list holds action names copied exactly from the action list above, "
    "for the matching modality. Choose the actions that fit what you say and "
    "how you feel; a list may be empty. Never pick two actions that contradict "
    "each other (e.g. both volumes, both paces, or eye contact while looking "
    "away). Keep the text free of stage directions.\n"
    "When the conversation has reached its natural end, append {terminator} "
    "to the end of your text."
)

_TAGS_CONTRACT = (
    "Reply with the words you say, followed by the nonverbal actions you "
    "perform, each in parentheses and copied exactly from the action list "
    "above, e.g. \"Nice to meet you! (Smile Broadly) (Nod)\". Use no other "
    "parentheses. Never pick two actions that contradict each other.\n"
    "When the conversation has reached its natural end, append {terminator} "
    "to the end of your reply."
)

_TEXT_CONTRACT = (
    "Reply with the words you say only, as plain text without stage "
    "directions, quotation marks or speaker labels.\n"
    "When the conversation has reached its natural end, append {terminator} "
    "to the end of your reply."
)


def _personality_block(profile: PersonalityProfile) -> str:
    lines = ["# Personality", profile.trait_definition.strip()]
    for modality in Modality:
        hint = profile.behavioral_guidance.get(modality)
        if hint:
            lines.append(f"- {modality.label}: {hint.strip()}")
    return "\n".join(lines)


def _scenario_block(scenario: ScenarioConfig, role: Speaker) -> str:
    me = scenario.role_of(role)
    other = scenario.role_of(role.other)
    lines = [
        f"# Scenario: {scenario.kind.title}",
        scenario.narrative.strip(),
        "",
        f"You are {me.name}, talking with {other.name}.",
        me.brief.strip(),
    ]
    if scenario.kind is ScenarioKind.ICE_BREAKING and role is scenario.questioner:
        lines.append("")
        lines.append("Ask these questions in this order, one per turn:")
        lines.extend(
            f"{i}. {question}"
            for i, question in enumerate(scenario.fixed_questions, start=1)
        )
    lines.append("")
    lines.append(
        "Speak one turn at a time and stay in your role. Keep each turn to a "
        "natural conversational length."
    )
    return "\n".join(lines)


def _action_block(schema: ActionSchema, chosen: dict[str, str]) -> str:
    lines = [
        "# Nonverbal actions",
        "Alongside your words you can perform nonverbal actions. These are "
        "the only available actions, each with a description of how it looks:",
    ]
    for modality in Modality:
        lines.append(f"## {modality.label}")
        lines.extend(
            f"- {action.name}: {chosen[action.name]}"
            for action in schema.by_modality(modality)
        )
    return "\n".join(lines)


def build_system_prompt(
    profile: PersonalityProfile,
    scenario: ScenarioConfig,
    schema: ActionSchema,
    catalog: DescriptionCatalog,
    role: Speaker,
    *,
    seed: int = 0,
    annotate: bool = True,
    fmt: PayloadFormat = PayloadFormat.STRUCTURED_JSON,
) -> str:
    """Assemble the system prompt for one agent.

    Args:
        profile: Personality conditioning; Generic adds no trait block.
        scenario: Conversation setting.
        schema: The nonverbal action list.
        catalog: Clip descriptions, one of which is sampled per action.
        role: Which side of the scenario this agent plays.
        seed: Seed for description sampling; identical inputs and seed
            give a byte-identical prompt.
        annotate: Include the action list and the annotation contract.
            Without it the agent answers in plain text.
        fmt: Annotation syntax the contract asks for.

    Returns:
        The prompt text.

    Raises:
        CatalogIncomplete: If ``annotate`` and the catalog misses actions.
    """
    blocks = []
    if profile.trait_definition.strip():
        blocks.append(_personality_block(profile))
    blocks.append(_scenario_block(scenario, role))
    if annotate:
        rng = np.random.default_rng(seed)
        chosen = catalog.sample(schema, rng)
        blocks.append(_action_block(schema, chosen))
        if fmt is PayloadFormat.INLINE_TAGS:
            contract = _TAGS_CONTRACT
        else:
            contract = _JSON_CONTRACT
    else:
        contract = _TEXT_CONTRACT
    blocks.append("# Output format\n" + contract.format(terminator=scenario.terminator))
    return "\n\n".join(blocks) + "\n"
