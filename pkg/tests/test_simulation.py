"""Tests for nvpersona.simulation — config, dialogue engine and run directories."""

import functools
import logging
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import pytest
from hypothesis import given
from hypothesis import settings as hypothesis_settings
from hypothesis import strategies as st

from nvpersona.behavior.markup import PayloadFormat
from nvpersona.behavior.schema import ActionSchema, load_schema
from nvpersona.errors import AuthMissing, ConfigError, CorpusError, ManifestError
from nvpersona.llm.backends import (
    BackendKind,
    HttpBackend,
    ReplayBackend,
    ScriptedBackend,
    ScriptEntry,
)
from nvpersona.llm.gateway import Backend, ChatRequest
from nvpersona.persona.catalog import DescriptionCatalog, load_catalog
from nvpersona.persona.profiles import Personality
from nvpersona.persona.scenarios import (
    DEFAULT_QUESTIONS,
    ScenarioKind,
    Speaker,
    default_scenarios,
)
from nvpersona.simulation.config import (
    CONFIG_DIR,
    DEFAULT_CONFIG,
    RunConfig,
    config_hash,
)
from nvpersona.simulation.engine import KICKOFF, TrialSettings, run_trial
from nvpersona.simulation.experiment import (
    MANIFEST_NAME,
    Corpus,
    RunManifest,
    load_corpus,
    run_experiment,
    trial_seed,
)
from nvpersona.simulation.transcript import (
    ENGINE_ORIGIN,
    TranscriptWriter,
    TrialStatus,
    read_records,
)
from nvpersona.simulation.validate import validate_corpus

DEMO_SCRIPT = CONFIG_DIR / "demo_script.jsonl"


@dataclass
class _Recorder:
    """Backend wrapper remembering every request it forwards."""

    inner: Backend
    requests: list[ChatRequest] = field(default_factory=list)

    @property
    def descriptor(self) -> str:
        return self.inner.descriptor

    def complete(self, request: ChatRequest) -> str:
        self.requests.append(request)
        return self.inner.complete(request)

    def trial_ids(self) -> set[str]:
        return {r.context["trial_id"] for r in self.requests}


def _config(**overrides: Any) -> RunConfig:
    data: dict[str, Any] = {
        "trials": 1,
        "backend": {
            "kind": "scripted",
            "script": "demo_script.jsonl",
            "max_attempts": 1,
            "backoff_base": 0,
        },
    }
    data.update(overrides)
    return RunConfig.from_dict(data)


def _scripted(*records: Any, cycle: bool = False) -> ScriptedBackend:
    return ScriptedBackend(
        entries=[ScriptEntry.from_record(r) for r in records], cycle=cycle
    )


def _transcripts(run_dir: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted((run_dir / "trials").iterdir())}


@functools.cache
def _shared_settings() -> TrialSettings:
    return TrialSettings(
        catalog=load_catalog(CONFIG_DIR / "descriptions.jsonl")[0],
        schema=load_schema(),
    )


REPLIES = (
    '{"text": "Fine by me.", "face": ["Smile Broadly"], "voice": ["Loud Volume"]}',
    "(Nod) Sure.",
    "Plain words.",
    "<END>",
    "See you. <END>",
    "(Dance Wildly) Hm.",
    "",
)
reply_scripts = st.lists(st.sampled_from(REPLIES), min_size=1, max_size=12)
kinds = st.sampled_from(list(ScenarioKind))
personalities = st.sampled_from([Personality.EXTROVERT, Personality.INTROVERT])


@pytest.fixture
def settings(catalog: DescriptionCatalog, schema: ActionSchema) -> TrialSettings:
    return TrialSettings(catalog=catalog, schema=schema)


class TestRunConfig:
    """Tests for YAML config loading and the config hash."""

    def test_defaults(self) -> None:
        cfg = RunConfig()
        assert cfg.seed == 42
        assert cfg.trials == 10
        assert cfg.analysis.alpha == 0.05
        assert cfg.payload_format is PayloadFormat.STRUCTURED_JSON
        assert not cfg.stamps_time

    def test_shipped_config(self) -> None:
        cfg = RunConfig.from_yaml(DEFAULT_CONFIG)
        assert cfg.backend.kind is BackendKind.SCRIPTED
        assert cfg.backend.script == str(DEMO_SCRIPT)
        assert cfg.lexicon_path == CONFIG_DIR / "demo_lexicon.dic"
        ice = cfg.scenarios[ScenarioKind.ICE_BREAKING]
        assert ice.fixed_questions == DEFAULT_QUESTIONS

    def test_paths_relative_to_file(self, tmp_path: Path) -> None:
        path = tmp_path / "run.yaml"
        path.write_text("seed: 7\npaths:\n  lexicon: my.dic\n")
        cfg = RunConfig.from_yaml(path)
        assert cfg.seed == 7
        assert cfg.lexicon_path == (tmp_path / "my.dic").resolve()

    def test_top_level_must_be_mapping(self, tmp_path: Path) -> None:
        path = tmp_path / "run.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError):
            RunConfig.from_yaml(path)

    @pytest.mark.parametrize(
        "data",
        [
            {"trials": 0},
            {"payload_format": "xml"},
            {"scenarios": {"debate": {}}},
            {"analysis": {"unit": "paragraph"}},
            {"backend": {"kind": "carrier-pigeon"}},
            {"jobs": 0},
        ],
    )
    def test_invalid_values(self, data: dict[str, Any]) -> None:
        with pytest.raises(ConfigError):
            RunConfig.from_dict(data)

    def test_stamps_time_for_http(self) -> None:
        assert RunConfig.from_dict({"backend": {"kind": "http"}}).stamps_time
        cfg = RunConfig.from_dict({"record_timestamps": True})
        assert cfg.stamps_time

    def test_swap_roles(self) -> None:
        cfg = RunConfig(swap_roles=True)
        negotiation = cfg.effective_scenarios()[ScenarioKind.NEGOTIATION]
        assert negotiation.opening_speaker is Speaker.GENERIC
        assert negotiation.personality_role.name == "the seller"


class TestConfigHash:
    """Tests for the short hash guarding run directories."""

    def test_stable(self) -> None:
        first = config_hash(_config().hash_inputs("abc"))
        assert first == config_hash(_config().hash_inputs("abc"))
        assert len(first) == 12
        int(first, 16)

    def test_ignores_trial_count(self) -> None:
        one = config_hash(_config(trials=1).hash_inputs())
        three = config_hash(_config(trials=3).hash_inputs())
        assert one == three

    def test_ignores_backend(self) -> None:
        http = _config(backend={"kind": "http"})
        assert config_hash(http.hash_inputs()) == config_hash(_config().hash_inputs())

    @pytest.mark.parametrize(
        "overrides",
        [
            {"payload_format": "tags"},
            {"annotate_generic": True},
            {"swap_roles": True},
            {"scenarios": {"negotiation": {"terminator": "[DONE]"}}},
        ],
    )
    def test_tracks_what_agents_see(self, overrides: dict[str, Any]) -> None:
        base = config_hash(_config().hash_inputs())
        assert config_hash(_config(**overrides).hash_inputs()) != base

    def test_tracks_catalog(self) -> None:
        cfg = _config()
        assert config_hash(cfg.hash_inputs("a")) != config_hash(cfg.hash_inputs("b"))


class TestTrialSeed:
    """Tests for per-trial seed derivation."""

    def test_deterministic(self) -> None:
        a = trial_seed(42, ScenarioKind.NEGOTIATION, Personality.EXTROVERT, 3)
        b = trial_seed(42, ScenarioKind.NEGOTIATION, Personality.EXTROVERT, 3)
        assert a == b
        assert 0 <= a < 2**32

    def test_cells_differ(self) -> None:
        seeds = {
            trial_seed(42, kind, personality, index)
            for kind in ScenarioKind
            for personality in (Personality.EXTROVERT, Personality.INTROVERT)
            for index in range(5)
        }
        assert len(seeds) == 20


class TestDialogueEngine:
    """Tests for one simulated dialogue."""

    def test_negotiation(self, settings: TrialSettings) -> None:
        scenario = default_scenarios(trials=1)[ScenarioKind.NEGOTIATION]
        backend = ScriptedBackend.from_file(DEMO_SCRIPT)
        trial = run_trial(
            scenario, Personality.EXTROVERT, backend, 7, settings=settings
        )
        assert trial.status is TrialStatus.COMPLETED
        assert trial.trial_id == "negotiation-extrovert-00"
        assert trial.backend == "scripted:demo_script.jsonl"
        assert len(trial.utterances) == 9
        speakers = [u.speaker for u in trial.utterances]
        assert speakers[::2] == ["personality"] * 5
        assert speakers[1::2] == ["generic"] * 4
        assert "Strong Anger" in trial.utterances[0].actions
        assert all("<END>" not in u.text for u in trial.utterances)
        assert trial.started is None

    def test_generic_turns_are_text_only(self, settings: TrialSettings) -> None:
        scenario = default_scenarios(trials=1)[ScenarioKind.NEGOTIATION]
        backend = ScriptedBackend.from_file(DEMO_SCRIPT)
        trial = run_trial(
            scenario, Personality.INTROVERT, backend, 7, settings=settings
        )
        for u in trial.utterances_of("generic"):
            assert u.actions == frozenset()

    def test_ice_breaking_questions_verbatim(
        self, settings: TrialSettings, tmp_path: Path
    ) -> None:
        scenario = default_scenarios(trials=1)[ScenarioKind.ICE_BREAKING]
        backend = ScriptedBackend.from_file(DEMO_SCRIPT)
        path = tmp_path / "ice.jsonl"
        with TranscriptWriter(path) as writer:
            trial = run_trial(
                scenario,
                Personality.INTROVERT,
                backend,
                7,
                settings=settings,
                writer=writer,
            )
        assert len(trial.utterances) == 7
        assert [trial.utterances[i].text for i in (0, 2, 4)] == list(DEFAULT_QUESTIONS)
        records = read_records(path)
        assert [r["origin"] for r in records[:5:2]] == [ENGINE_ORIGIN] * 3
        assert records[6]["speaker"] == "generic"
        assert records[6]["origin"] == "model"

    def test_terminator_ignored_while_questions_pending(
        self, settings: TrialSettings
    ) -> None:
        scenario = default_scenarios(trials=1)[ScenarioKind.ICE_BREAKING]
        backend = _scripted(
            {"speaker": "personality", "content": '{"text": "Reading."} <END>'},
            {"speaker": "generic", "content": "Lovely. <END>"},
            cycle=True,
        )
        trial = run_trial(
            scenario, Personality.EXTROVERT, backend, 1, settings=settings
        )
        assert len(trial.utterances) == 6
        assert trial.utterances[1].text == "Reading."
        assert trial.utterances[-1].speaker == "personality"

    def test_turn_cap(self, settings: TrialSettings) -> None:
        scenario = default_scenarios(trials=1)[ScenarioKind.NEGOTIATION]
        backend = _scripted(
            {"speaker": "personality", "content": {"text": "Still talking."}},
            {"speaker": "generic", "content": "Go on."},
            cycle=True,
        )
        trial = run_trial(
            scenario, Personality.EXTROVERT, backend, 1, settings=settings
        )
        assert trial.status is TrialStatus.COMPLETED
        assert len(trial.utterances) == 10

    def test_terminator_only_reply(self, settings: TrialSettings) -> None:
        scenario = default_scenarios(trials=1)[ScenarioKind.NEGOTIATION]
        backend = ScriptedBackend.from_responses(['{"text": "Bye."}', "<END>"])
        trial = run_trial(
            scenario, Personality.EXTROVERT, backend, 1, settings=settings
        )
        assert trial.status is TrialStatus.COMPLETED
        assert [u.text for u in trial.utterances] == ["Bye."]

    def test_bad_payload_is_retried(self, settings: TrialSettings) -> None:
        scenario = default_scenarios(trials=1)[ScenarioKind.NEGOTIATION]
        backend = ScriptedBackend.from_responses(
            [
                "(Dance Wildly) Hi.",
                '{"text": "Hi.", "face": ["smile broadly"]}',
                "Hello. <END>",
            ]
        )
        trial = run_trial(
            scenario, Personality.EXTROVERT, backend, 1, settings=settings
        )
        assert trial.status is TrialStatus.COMPLETED
        assert [u.text for u in trial.utterances] == ["Hi.", "Hello."]
        assert trial.utterances[0].actions == {"Smile Broadly"}
        assert len(trial.errors) == 1
        assert trial.errors[0].turn_index == 0
        assert trial.errors[0].raw == "(Dance Wildly) Hi."
        assert "UnknownAction" in trial.errors[0].error

    def test_inline_tags_accepted_in_json_mode(self, settings: TrialSettings) -> None:
        scenario = default_scenarios(trials=1)[ScenarioKind.NEGOTIATION]
        backend = ScriptedBackend.from_responses(["(Nod) Deal. <END>"])
        trial = run_trial(
            scenario, Personality.EXTROVERT, backend, 1, settings=settings
        )
        assert trial.utterances[0].text == "Deal."
        assert trial.utterances[0].actions == {"Nod"}

    def test_consecutive_failures_abort(self, settings: TrialSettings) -> None:
        scenario = default_scenarios(trials=1)[ScenarioKind.NEGOTIATION]
        trial = run_trial(
            scenario, Personality.EXTROVERT, ScriptedBackend(), 1, settings=settings
        )
        assert trial.status is TrialStatus.FAILED
        assert trial.utterances == []
        assert len(trial.errors) == 3
        assert trial.failure is not None
        assert trial.failure.startswith("3 consecutive failed turns")

    def test_requests_carry_context(self, settings: TrialSettings) -> None:
        scenario = default_scenarios(trials=1)[ScenarioKind.NEGOTIATION]
        recorder = _Recorder(ScriptedBackend.from_file(DEMO_SCRIPT))
        run_trial(scenario, Personality.INTROVERT, recorder, 1, settings=settings)
        first, second = recorder.requests[:2]
        assert dict(first.context) == {
            "trial_id": "negotiation-introvert-00",
            "speaker": "personality",
            "scenario": "negotiation",
            "personality": "introvert",
            "turn_index": "0",
        }
        assert [m.role for m in first.messages] == ["system", "user"]
        assert first.messages[1].content == KICKOFF
        assert [m.role for m in second.messages] == ["system", "user"]
        assert second.context["speaker"] == "generic"
        assert "introverted" not in second.messages[0].content

    def test_generic_cannot_be_conditioned(self, settings: TrialSettings) -> None:
        scenario = default_scenarios(trials=1)[ScenarioKind.NEGOTIATION]
        with pytest.raises(ValueError):
            run_trial(
                scenario, Personality.GENERIC, ScriptedBackend(), 1, settings=settings
            )

    def test_missing_key_aborts(
        self, settings: TrialSettings, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.delenv("NVPERSONA_TEST_KEY", raising=False)
        scenario = default_scenarios(trials=1)[ScenarioKind.NEGOTIATION]
        backend = HttpBackend(api_key_env="NVPERSONA_TEST_KEY")
        with pytest.raises(AuthMissing):
            run_trial(scenario, Personality.EXTROVERT, backend, 1, settings=settings)

    def test_terminator_only_while_questions_pending(
        self, settings: TrialSettings
    ) -> None:
        scenario = default_scenarios(trials=1)[ScenarioKind.ICE_BREAKING]
        recorder = _Recorder(ScriptedBackend.from_responses(["<END>"], cycle=True))
        trial = run_trial(
            scenario, Personality.EXTROVERT, recorder, 1, settings=settings
        )
        assert trial.status is TrialStatus.FAILED
        assert len(recorder.requests) <= scenario.max_turns
        assert len(recorder.requests) == settings.max_consecutive_failures
        assert [u.text for u in trial.utterances] == [DEFAULT_QUESTIONS[0]]
        assert all("EmptyText" in e.error for e in trial.errors)


class TestDialogueProperties:
    """Invariants of any dialogue, whatever the model answers."""

    @hypothesis_settings(max_examples=200, deadline=None)
    @given(replies=reply_scripts, kind=kinds, personality=personalities)
    def test_turn_cap(
        self, replies: list[str], kind: ScenarioKind, personality: Personality
    ) -> None:
        shared = _shared_settings()
        scenario = default_scenarios(trials=1)[kind]
        recorder = _Recorder(_scripted(*replies, cycle=True))
        trial = run_trial(scenario, personality, recorder, 3, settings=shared)
        assert len(trial.utterances) <= scenario.max_turns
        limit = scenario.max_turns * shared.max_consecutive_failures
        assert len(recorder.requests) <= limit
        assert trial.status in (TrialStatus.COMPLETED, TrialStatus.FAILED)

    @hypothesis_settings(max_examples=200, deadline=None)
    @given(replies=reply_scripts, kind=kinds, personality=personalities)
    def test_speakers_alternate(
        self, replies: list[str], kind: ScenarioKind, personality: Personality
    ) -> None:
        scenario = default_scenarios(trials=1)[kind]
        trial = run_trial(
            scenario,
            personality,
            _scripted(*replies, cycle=True),
            3,
            settings=_shared_settings(),
        )
        opener = scenario.opening_speaker
        for i, u in enumerate(trial.utterances):
            assert u.turn_index == i
            expected = opener if i % 2 == 0 else opener.other
            assert u.speaker == expected.value
            assert u.text.strip()
            assert "<END>" not in u.text


class TestExperiment:
    """Tests for run directories, reproducibility and resume."""

    def test_run_writes_corpus(self, tmp_path: Path) -> None:
        corpus = run_experiment(_config(), run_dir=tmp_path / "run")
        assert len(corpus.trials) == 4
        assert len(corpus.completed()) == 4
        assert (tmp_path / "run" / MANIFEST_NAME).exists()
        assert len(_transcripts(tmp_path / "run")) == 4
        assert corpus.manifest.created is None
        assert validate_corpus(tmp_path / "run") == []

    def test_default_run_dir_name(self, tmp_path: Path) -> None:
        corpus = run_experiment(_config(), out_dir=tmp_path)
        assert corpus.run_dir.parent == tmp_path
        assert corpus.run_dir.name.endswith(f"-{corpus.config_hash}")

    def test_reproducible(self, tmp_path: Path) -> None:
        run_experiment(_config(), run_dir=tmp_path / "a")
        run_experiment(_config(jobs=2), run_dir=tmp_path / "b")
        assert _transcripts(tmp_path / "a") == _transcripts(tmp_path / "b")
        manifest_a = (tmp_path / "a" / MANIFEST_NAME).read_bytes()
        assert manifest_a == (tmp_path / "b" / MANIFEST_NAME).read_bytes()

    def test_replay_reproduces(self, tmp_path: Path) -> None:
        run_experiment(_config(), run_dir=tmp_path / "live")
        replay = ReplayBackend(run_dir=tmp_path / "live")
        run_experiment(_config(), replay, run_dir=tmp_path / "replayed")
        assert _transcripts(tmp_path / "live") == _transcripts(tmp_path / "replayed")

    def test_existing_run_refused(self, tmp_path: Path) -> None:
        run_experiment(_config(), run_dir=tmp_path / "run")
        with pytest.raises(ManifestError):
            run_experiment(_config(), run_dir=tmp_path / "run")

    def test_resume_extends(self, tmp_path: Path) -> None:
        run_dir = tmp_path / "run"
        run_experiment(_config(), run_dir=run_dir)
        before = _transcripts(run_dir)
        recorder = _Recorder(ScriptedBackend.from_file(DEMO_SCRIPT))
        corpus = run_experiment(
            _config(trials=2), recorder, run_dir=run_dir, resume=True
        )
        assert len(corpus.completed()) == 8
        assert all(tid.endswith("-01") for tid in recorder.trial_ids())
        after = _transcripts(run_dir)
        assert {k: after[k] for k in before} == before

    def test_resume_reruns_missing_transcript(self, tmp_path: Path) -> None:
        run_dir = tmp_path / "run"
        run_experiment(_config(), run_dir=run_dir)
        (run_dir / "trials" / "negotiation-extrovert-00.jsonl").unlink()
        recorder = _Recorder(ScriptedBackend.from_file(DEMO_SCRIPT))
        corpus = run_experiment(_config(), recorder, run_dir=run_dir, resume=True)
        assert recorder.trial_ids() == {"negotiation-extrovert-00"}
        assert len(corpus.completed()) == 4

    def test_resume_rejects_other_config(self, tmp_path: Path) -> None:
        run_dir = tmp_path / "run"
        run_experiment(_config(), run_dir=run_dir)
        with pytest.raises(ManifestError, match="refusing to mix"):
            run_experiment(_config(payload_format="tags"), run_dir=run_dir, resume=True)

    def test_resume_needs_run_dir(self) -> None:
        with pytest.raises(ManifestError):
            run_experiment(_config(), resume=True)

    def test_failed_trials_recorded(
        self, tmp_path: Path, caplog: pytest.LogCaptureFixture
    ) -> None:
        with caplog.at_level(logging.WARNING):
            corpus = run_experiment(_config(), ScriptedBackend(), run_dir=tmp_path)
        assert corpus.completed() == []
        statuses = {e["status"] for e in corpus.manifest.trials.values()}
        assert statuses == {"failed"}
        assert "4 trials failed" in caplog.text

    def test_only_selected_cells(self, tmp_path: Path) -> None:
        cfg = _config()
        cfg.only_scenarios = (ScenarioKind.NEGOTIATION,)
        corpus = run_experiment(cfg, run_dir=tmp_path)
        assert corpus.scenarios() == [ScenarioKind.NEGOTIATION]
        assert len(corpus.trials) == 2


class TestCorpus:
    """Tests for reading run directories back."""

    def test_fixture_run(self, fixture_run: Path) -> None:
        corpus = load_corpus(fixture_run)
        assert [t.trial_id for t in corpus][:2] == [
            "icebreaking-extrovert-00",
            "icebreaking-extrovert-01",
        ]
        assert len(corpus.cell(ScenarioKind.NEGOTIATION, Personality.INTROVERT)) == 2
        assert corpus.scenarios() == [
            ScenarioKind.NEGOTIATION,
            ScenarioKind.ICE_BREAKING,
        ]
        assert corpus.fixed_questions(ScenarioKind.NEGOTIATION) == ()
        assert corpus.fixed_questions(ScenarioKind.ICE_BREAKING) == DEFAULT_QUESTIONS
        opener = corpus.trials[0].utterances[0]
        assert opener.speaker == "generic"
        assert opener.text == DEFAULT_QUESTIONS[0]
        assert corpus.config_hash == "97c13cc2cf1c"

    def test_unlisted_transcript(self, fixture_run: Path, tmp_path: Path) -> None:
        run_dir = tmp_path / "run"
        shutil.copytree(fixture_run, run_dir)
        (run_dir / "trials" / "stray.jsonl").write_text("")
        with pytest.raises(ManifestError, match="stray"):
            load_corpus(run_dir)

    def test_missing_transcript(self, fixture_run: Path, tmp_path: Path) -> None:
        run_dir = tmp_path / "run"
        shutil.copytree(fixture_run, run_dir)
        (run_dir / "trials" / "negotiation-introvert-01.jsonl").unlink()
        with pytest.raises(ManifestError, match="missing"):
            load_corpus(run_dir)

    def test_malformed_record(self, fixture_run: Path, tmp_path: Path) -> None:
        run_dir = tmp_path / "run"
        shutil.copytree(fixture_run, run_dir)
        path = run_dir / "trials" / "negotiation-introvert-01.jsonl"
        path.write_text(path.read_text() + "[1, 2]\n")
        with pytest.raises(CorpusError):
            load_corpus(run_dir)

    def test_tampered_hash(self, fixture_run: Path, tmp_path: Path) -> None:
        run_dir = tmp_path / "run"
        shutil.copytree(fixture_run, run_dir)
        manifest = run_dir / MANIFEST_NAME
        text = manifest.read_text().replace("97c13cc2cf1c", "000000000000")
        manifest.write_text(text)
        with pytest.raises(ManifestError, match="config_hash"):
            RunManifest.load(run_dir)

    def test_not_a_run_dir(self, tmp_path: Path) -> None:
        with pytest.raises(ManifestError, match="not found"):
            load_corpus(tmp_path)

    def test_writer_flushes_each_line(self, tmp_path: Path, corpus: Corpus) -> None:
        path = tmp_path / "t.jsonl"
        path.write_text("stale\n")
        first, second = corpus.trials[0].utterances[:2]
        with TranscriptWriter(path) as writer:
            writer.write("t", first)
            assert len(path.read_text().splitlines()) == 1
            writer.write("t", second)
            assert [r["turn_index"] for r in read_records(path)] == [0, 1]

    def test_writer_outside_context(self, tmp_path: Path, corpus: Corpus) -> None:
        writer = TranscriptWriter(tmp_path / "t.jsonl")
        with pytest.raises(RuntimeError):
            writer.write("x", corpus.trials[0].utterances[0])
