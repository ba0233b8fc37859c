"""Tests for nvpersona.analysis — verbal, classification and nonverbal sections."""

import json
from pathlib import Path
from typing import Any

import httpx
import pytest

from nvpersona.analysis.classification import (
    HttpClassifier,
    LabelRecord,
    LexiconBaseline,
    classify_extraversion,
    independence_test,
    proportions_from_labels,
    tally,
)
from nvpersona.analysis.nonverbal import analyze_nonverbal
from nvpersona.analysis.verbal import (
    ExpectedDirections,
    analyze_verbal,
    load_expected_directions,
    personality_documents,
)
from nvpersona.behavior.markup import AnnotatedUtterance
from nvpersona.behavior.schema import ActionSchema
from nvpersona.errors import ConfigError, CorpusError, EmptyGroup, ZeroMarginal
from nvpersona.linguistics.lexicon import Lexicon
from nvpersona.linguistics.scoring import DocumentUnit
from nvpersona.llm.backends import BackendConfig
from nvpersona.persona.profiles import Personality
from nvpersona.persona.scenarios import ScenarioKind
from nvpersona.simulation.config import AnalysisOptions
from nvpersona.simulation.experiment import Corpus, RunManifest
from nvpersona.simulation.transcript import Trial, TrialStatus
from nvpersona.stats.filtering import EXT_EQUAL, EXT_GREATER, EXT_LESS

NEG = ScenarioKind.NEGOTIATION
ICE = ScenarioKind.ICE_BREAKING
EXT = Personality.EXTROVERT
INT = Personality.INTROVERT
CLASSIFIER_URL = "http://classifier.test/predict"


def _trial(personality: Personality, index: int, *actions: frozenset[str]) -> Trial:
    trial = Trial(
        trial_id=f"negotiation-{personality.value}-{index:02d}",
        scenario=NEG,
        personality=personality,
        index=index,
        seed=index,
        status=TrialStatus.COMPLETED,
    )
    for turn, chosen in enumerate(actions):
        trial.utterances.append(
            AnnotatedUtterance("personality", "Hello.", chosen, 2 * turn)
        )
        trial.utterances.append(
            AnnotatedUtterance("generic", "Hi.", turn_index=2 * turn + 1)
        )
    return trial


def _in_memory(*trials: Trial) -> Corpus:
    manifest = RunManifest(config_hash="0" * 12, hash_inputs={}, config={})
    return Corpus(run_dir=Path("memory"), manifest=manifest, trials=list(trials))


def _classifier(handler: Any) -> HttpClassifier:
    settings = BackendConfig(max_attempts=1, backoff_base=0)
    return HttpClassifier.for_endpoint(
        CLASSIFIER_URL, settings, transport=httpx.MockTransport(handler)
    )


class TestExpectedDirections:
    """Tests for the literature direction map."""

    def test_shipped_map(self, directions: ExpectedDirections) -> None:
        assert directions.directions["you"] == EXT_GREATER
        assert directions.directions["tentat"] == EXT_LESS
        assert "Mairesse" in directions.sources["you"]

    def test_verdict(self, directions: ExpectedDirections) -> None:
        assert directions.verdict("social", EXT_GREATER) == "Y"
        assert directions.verdict("social", EXT_LESS) == "N"
        assert directions.verdict("social", EXT_EQUAL) == "-"
        assert directions.verdict("unheard", EXT_GREATER) == "-"

    def test_shorthand_and_spacing(self, tmp_path: Path) -> None:
        path = tmp_path / "dirs.yaml"
        path.write_text("directions:\n  posemo: EXT > INT\n")
        assert load_expected_directions(path).directions == {"posemo": EXT_GREATER}

    def test_bad_label(self, tmp_path: Path) -> None:
        path = tmp_path / "dirs.yaml"
        path.write_text("directions:\n  posemo: {expected: more}\n")
        with pytest.raises(ConfigError):
            load_expected_directions(path)


class TestVerbal:
    """Tests for the lexical comparison."""

    def test_documents(self, corpus: Corpus) -> None:
        docs = personality_documents(corpus)
        assert len(docs) == 20
        assert {d.group for d in docs} == {
            (NEG, EXT),
            (NEG, INT),
            (ICE, EXT),
            (ICE, INT),
        }

    def test_selected_features(
        self, corpus: Corpus, lexicon: Lexicon, directions: ExpectedDirections
    ) -> None:
        section = analyze_verbal(corpus, lexicon, directions)
        assert section.test == "welch"
        negotiation, icebreaking = section.scenarios
        assert negotiation.scenario is NEG
        assert negotiation.documents == {EXT: 4, INT: 4}
        assert icebreaking.documents == {EXT: 6, INT: 6}
        for scenario in section.scenarios:
            assert [r.feature for r in scenario.selected] == [
                "cogproc",
                "function",
                "ppron",
                "pronoun",
                "social",
                "tentat",
                "you",
            ]
            assert all(r.aligned == "Y" for r in scenario.selected)
            assert len(scenario.features) == len(lexicon.ids())

    def test_feature_rows(
        self, corpus: Corpus, lexicon: Lexicon, directions: ExpectedDirections
    ) -> None:
        section = analyze_verbal(corpus, lexicon, directions)
        rows = {r.feature: r for r in section.scenarios[0].features}
        you = rows["you"]
        assert you.mean_ext == pytest.approx(37.5)
        assert you.mean_int == 0.0
        assert you.p == pytest.approx(0.01384, abs=1e-4)
        assert you.d == pytest.approx(3.674, abs=1e-3)
        assert rows["tentat"].direction == EXT_LESS
        posemo = rows["posemo"]
        assert posemo.direction == EXT_EQUAL
        assert posemo.p == 1.0
        assert not posemo.selected
        assert posemo.aligned == "-"

    def test_icebreaking_rows(
        self, corpus: Corpus, lexicon: Lexicon, directions: ExpectedDirections
    ) -> None:
        section = analyze_verbal(corpus, lexicon, directions)
        rows = {r.feature: r for r in section.scenarios[1].features}
        you = rows["you"]
        assert you.mean_ext == pytest.approx(37.5)
        assert you.result is not None
        assert you.result.t == pytest.approx(6.7082, abs=1e-4)
        assert you.result.df == pytest.approx(5.0)
        assert you.p == pytest.approx(0.001114, abs=1e-5)
        assert you.d == pytest.approx(3.873, abs=1e-3)

    def test_counts(
        self, corpus: Corpus, lexicon: Lexicon, directions: ExpectedDirections
    ) -> None:
        section = analyze_verbal(corpus, lexicon, directions)
        counts = section.scenarios[0].counts
        assert [r.feature for r in counts] == ["word_count", "sentence_count"]
        assert counts[0].mean_ext == counts[0].mean_int == 4.0
        assert counts[0].direction == EXT_EQUAL

    def test_thresholds(
        self, corpus: Corpus, lexicon: Lexicon, directions: ExpectedDirections
    ) -> None:
        strict = analyze_verbal(
            corpus, lexicon, directions, AnalysisOptions(d_min=4.0)
        )
        assert strict.scenarios[0].selected == []
        student = analyze_verbal(
            corpus, lexicon, directions, AnalysisOptions(student=True)
        )
        assert student.test == "student"
        assert student.scenarios[0].selected[0].result.variant == "student"

    def test_missing_personality(
        self, corpus: Corpus, lexicon: Lexicon, directions: ExpectedDirections
    ) -> None:
        corpus.trials = [t for t in corpus.trials if t.personality is EXT]
        with pytest.raises(EmptyGroup):
            analyze_verbal(corpus, lexicon, directions)


class TestLexiconBaseline:
    """Tests for the offline classifier."""

    def test_labels(self, lexicon: Lexicon) -> None:
        baseline = LexiconBaseline(lexicon)
        assert baseline.descriptor == "lexicon:posemo+social>=10"
        assert baseline.rate("Your parcel receipt today.") == pytest.approx(25.0)
        assert baseline.label("Your parcel receipt today.") == 1
        assert baseline.label("Maybe parcel receipt today.") == 0
        assert baseline.label("42 !") is None

    def test_unknown_category(self, lexicon: Lexicon) -> None:
        with pytest.raises(ConfigError):
            LexiconBaseline(lexicon, categories=("posemo", "joy"))


class TestClassification:
    """Tests for labelling and the chi-square comparison."""

    def test_fixture_corpus(self, corpus: Corpus, lexicon: Lexicon) -> None:
        section = classify_extraversion(corpus, LexiconBaseline(lexicon))
        assert section.available
        negotiation, icebreaking = section.scenarios
        assert negotiation.proportions[EXT].value == 1.0
        assert negotiation.proportions[INT].value == 0.0
        assert negotiation.test.chi2 == pytest.approx(4.5)
        assert negotiation.test.p == pytest.approx(0.0339, abs=1e-4)
        assert icebreaking.test.chi2 == pytest.approx(25 / 3)
        assert icebreaking.test.p == pytest.approx(0.00389, abs=1e-4)
        assert section.pooled is not None
        assert section.pooled.chi2 == pytest.approx(16.2)
        assert section.interaction is not None
        assert section.interaction.df == 3
        assert section.interaction.chi2 == pytest.approx(20.0)
        assert len(section.labels) == 20

    def test_http_classifier(self, corpus: Corpus) -> None:
        seen: list[dict[str, Any]] = []

        def handler(request: httpx.Request) -> httpx.Response:
            seen.append(json.loads(request.content))
            return httpx.Response(200, json={"extravert": 1})

        section = classify_extraversion(corpus, _classifier(handler))
        assert len(seen) == 20
        assert "text" in seen[0]
        outcome = section.scenarios[0]
        assert outcome.test.chi2 == 0.0
        assert outcome.test.p == 1.0
        assert section.classifier == f"http:{CLASSIFIER_URL}"

    def test_classifier_down(self, corpus: Corpus) -> None:
        def handler(request: httpx.Request) -> httpx.Response:
            return httpx.Response(503)

        section = classify_extraversion(corpus, _classifier(handler))
        assert not section.available
        assert "labelled none of 20" in section.reason
        assert section.scenarios == []
        assert section.missing == 20

    def test_invalid_endpoint(self, corpus: Corpus) -> None:
        classifier = HttpClassifier.for_endpoint(
            "http://localhost:9n", BackendConfig(max_attempts=3, backoff_base=0)
        )
        section = classify_extraversion(corpus, classifier)
        assert not section.available
        assert section.missing == 20
        assert section.classifier == "http:http://localhost:9n"

    @pytest.mark.parametrize("reply", [{"extravert": True}, {"label": 1}, [1]])
    def test_bad_reply(self, reply: Any) -> None:
        classifier = _classifier(lambda request: httpx.Response(200, json=reply))
        assert classifier.label("Hello there.") is None

    def test_proportions_from_labels(self, corpus: Corpus, lexicon: Lexicon) -> None:
        section = classify_extraversion(corpus, LexiconBaseline(lexicon))
        persisted = [r.to_dict() for r in section.labels]
        assert proportions_from_labels(persisted) == {
            (NEG, EXT): 1.0,
            (NEG, INT): 0.0,
            (ICE, EXT): 1.0,
            (ICE, INT): 0.0,
        }

    def test_tally_counts_missing(self) -> None:
        records = [
            LabelRecord("t", 0, NEG, EXT, 1),
            LabelRecord("t", 2, NEG, EXT, None),
            LabelRecord("t", 4, NEG, EXT, 0),
        ]
        cell = tally(records)[(NEG, EXT)]
        assert (cell.positive, cell.labelled, cell.missing) == (1, 2, 1)
        assert cell.value == 0.5

    def test_independence_test(self) -> None:
        assert independence_test([[3, 0], [5, 0]]).p == 1.0
        with pytest.raises(ZeroMarginal):
            independence_test([[0, 0], [5, 1]])


class TestNonverbal:
    """Tests for selection frequencies and polarity contrasts."""

    def test_fixture_frequencies(self, corpus: Corpus, schema: ActionSchema) -> None:
        section = analyze_nonverbal(corpus, schema)
        ext = section.cell(NEG, EXT)
        intro = section.cell(NEG, INT)
        assert ext.utterances == intro.utterances == 4
        assert len(ext.actions) == 29
        assert ext.frequency("Make Eye Contact") == 0.75
        assert ext.frequency("Avert Gaze") == 0.0
        assert intro.frequency("Avert Gaze") == 0.75
        assert ext.frequency("Nod") == intro.frequency("Nod") == 0.25
        assert ext.actions["Loud Volume"].count == 3

    def test_contrasts(self, corpus: Corpus, schema: ActionSchema) -> None:
        section = analyze_nonverbal(corpus, schema)
        assert len(section.contrasts) == 20
        first = section.contrasts[0]
        assert (first.extrovert_action, first.introvert_action) == (
            "Make Eye Contact",
            "Avert Gaze",
        )
        assert first.lean_extrovert == pytest.approx(0.75)
        assert first.lean_introvert == pytest.approx(-0.75)
        assert first.difference == pytest.approx(1.5)
        ice = [c for c in section.contrasts if c.scenario is ICE]
        assert ice[0].lean_introvert == pytest.approx(-4 / 6)
        assert ice[0].difference == pytest.approx(7 / 6)

    def test_csv_rows(self, corpus: Corpus, schema: ActionSchema) -> None:
        rows = analyze_nonverbal(corpus, schema).csv_rows()
        assert len(rows) == 116
        assert rows[0][2:4] == ("negotiation", "extrovert")

    def test_trial_unit_averages_trials(self, schema: ActionSchema) -> None:
        nod = frozenset({"Nod"})
        none: frozenset[str] = frozenset()
        corpus = _in_memory(
            _trial(EXT, 0, nod),
            _trial(EXT, 1, none, none, none),
            _trial(INT, 0, none),
        )
        by_utterance = analyze_nonverbal(corpus, schema).cell(NEG, EXT)
        by_trial = analyze_nonverbal(corpus, schema, DocumentUnit.TRIAL).cell(NEG, EXT)
        assert by_utterance.frequency("Nod") == 0.25
        assert by_trial.frequency("Nod") == 0.5
        assert by_trial.trials == 2

    def test_empty_cell(self, schema: ActionSchema) -> None:
        corpus = _in_memory(_trial(EXT, 0, frozenset()), _trial(INT, 0))
        with pytest.raises(EmptyGroup):
            analyze_nonverbal(corpus, schema)

    def test_failed_trials_ignored(self, schema: ActionSchema) -> None:
        failed = _trial(EXT, 1, frozenset({"Nod"}))
        failed.status = TrialStatus.FAILED
        corpus = _in_memory(
            _trial(EXT, 0, frozenset()), failed, _trial(INT, 0, frozenset())
        )
        assert analyze_nonverbal(corpus, schema).cell(NEG, EXT).frequency("Nod") == 0.0

    def test_unknown_action(self, schema: ActionSchema) -> None:
        corpus = _in_memory(
            _trial(EXT, 0, frozenset({"Dance Wildly"})), _trial(INT, 0, frozenset())
        )
        with pytest.raises(CorpusError, match="Dance Wildly"):
            analyze_nonverbal(corpus, schema)
