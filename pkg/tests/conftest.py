"""Shared fixtures for the nvpersona test suite."""

from __future__ import annotations

from pathlib import Path

import pytest

from nvpersona.analysis.verbal import ExpectedDirections, load_expected_directions
from nvpersona.behavior.schema import ActionSchema, load_schema
from nvpersona.linguistics.lexicon import Lexicon, load_lexicon
from nvpersona.persona.catalog import DescriptionCatalog, load_catalog
from nvpersona.simulation.config import CONFIG_DIR
from nvpersona.simulation.experiment import Corpus, load_corpus

TESTS_DIR = Path(__file__).resolve().parent
FIXTURE_RUN = TESTS_DIR / "fixtures" / "fixture_run"


@pytest.fixture
def schema() -> ActionSchema:
    """The shared 29-action schema."""
    return load_schema()


@pytest.fixture
def catalog() -> DescriptionCatalog:
    """The shipped description catalog (three descriptions per action)."""
    return load_catalog(CONFIG_DIR / "descriptions.jsonl")[0]


@pytest.fixture
def lexicon() -> Lexicon:
    """The demo lexicon."""
    return load_lexicon(CONFIG_DIR / "demo_lexicon.dic")


@pytest.fixture
def directions() -> ExpectedDirections:
    """The shipped expected-direction map."""
    return load_expected_directions(CONFIG_DIR / "expected_directions.yaml")


@pytest.fixture
def fixture_run() -> Path:
    """Hand-written, read-only run: four negotiation, four ice-breaking trials."""
    return FIXTURE_RUN


@pytest.fixture
def corpus(fixture_run: Path) -> Corpus:
    """The fixture run, loaded."""
    return load_corpus(fixture_run)
