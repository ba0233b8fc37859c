"""Config — load run parameters from YAML files.

All tunable inputs (seed, trial count, scenario and persona text, backend
settings, analysis thresholds, data-file paths) live in YAML and are
parsed into typed dataclasses here.  ``RunConfig`` is the merged view the
CLI hands to the simulation and analysis stages; it serializes completely
into the run manifest.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from nvpersona.behavior.markup import PayloadFormat
from nvpersona.behavior.schema import load_schema
from nvpersona.errors import ConfigError
from nvpersona.linguistics.scoring import DocumentUnit
from nvpersona.llm.backends import BackendConfig, BackendKind
from nvpersona.persona.profiles import (
    Personality,
    PersonalityProfile,
    default_profiles,
    profiles_from_dict,
)
from nvpersona.persona.scenarios import (
    DEFAULT_TRIALS,
    ScenarioConfig,
    ScenarioKind,
    default_scenarios,
    scenarios_from_dict,
)

CONFIG_DIR = Path(__file__).resolve().parent.parent.parent / "config"
DEFAULT_CONFIG = CONFIG_DIR / "default.yaml"

TURN_UNIT = "utterance"


@dataclass
class AnalysisOptions:
    """Thresholds and switches for ``nvpersona analyze``.

    Attributes:
        alpha: Significance level of the feature filter.
        d_min: Minimum absolute Cohen's d of the feature filter.
        unit: Document unit for lexical scores and nonverbal frequencies.
        yates: Continuity correction on 2x2 chi-square tests.
        student: Use Student's pooled t-test instead of Welch's.
        classifier: ``"lexicon"`` or the URL of an external classifier.
        classifier_threshold: Lexicon-baseline cut-off on the summed
            positive-emotion and social word percentages.
        classifier_categories: Categories the baseline sums.
    """

    alpha: float = 0.05
    d_min: float = 0.5
    unit: DocumentUnit = DocumentUnit.UTTERANCE
    yates: bool = True
    student: bool = False
    classifier: str = "lexicon"
    classifier_threshold: float = 10.0
    classifier_categories: tuple[str, ...] = ("posemo", "social")

    @classmethod
    def from_dict(cls, data: dict[str, Any] | None) -> AnalysisOptions:
        """Build from the config file's ``analysis`` mapping."""
        data = data or {}
        try:
            unit = DocumentUnit(data.get("unit", cls.unit.value))
        except ValueError:
            msg = f"unknown analysis unit {data.get('unit')!r}"
            raise ConfigError(msg) from None
        return cls(
            alpha=float(data.get("alpha", cls.alpha)),
            d_min=float(data.get("d_min", cls.d_min)),
            unit=unit,
            yates=bool(data.get("yates", cls.yates)),
            student=bool(data.get("student", cls.student)),
            classifier=str(data.get("classifier", cls.classifier)),
            classifier_threshold=float(
                data.get("classifier_threshold", cls.classifier_threshold)
            ),
            classifier_categories=tuple(
                data.get("classifier_categories", cls.classifier_categories)
            ),
        )

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form for report metadata."""
        return {
            "alpha": self.alpha,
            "d_min": self.d_min,
            "unit": self.unit.value,
            "yates": self.yates,
            "student": self.student,
            "classifier": self.classifier,
            "classifier_threshold": self.classifier_threshold,
            "classifier_categories": list(self.classifier_categories),
        }


def _resolve(path: str | Path, base: Path) -> Path:
    path = Path(path)
    return path if path.is_absolute() else (base / path).resolve()


def _hashed_scenario(scenario: ScenarioConfig) -> dict[str, Any]:
    # excluded so a resume can extend the trial count
    data = scenario.to_dict()
    data.pop("trials")
    return data


def _backend_from_dict(data: dict[str, Any] | None, base: Path) -> BackendConfig:
    data = dict(data or {})
    for key in ("script", "replay_dir"):
        if data.get(key):
            data[key] = str(_resolve(data[key], base))
    return BackendConfig.from_dict(data)


@dataclass
class RunConfig:
    """Merged configuration of one simulation run.

    Attributes:
        seed: Root of all randomness in the run.
        trials: Trials per (scenario, personality) cell.
        scenarios: Scenario settings keyed by kind.
        profiles: Persona conditioning keyed by personality.
        backend: Chat-completion backend settings.
        analysis: Analysis thresholds and switches.
        payload_format: Syntax the personality agent is asked to use.
        annotate_generic: Give the generic agent the action list too.
        swap_roles: Let the personality agent play the other role.
        lenient: Downgrade unknown nonverbal tags to warnings.
        max_consecutive_failures: Failed turns in a row before a trial
            is aborted.
        jobs: Trials executed in parallel.
        record_timestamps: Stamp trials with wall-clock times; ``None``
            means only for the HTTP backend, keeping offline corpora
            byte-reproducible.
        catalog_path: Description catalog file.
        lexicon_path: Lexicon file.
        directions_path: Expected-direction map.
        only_scenarios: Scenario kinds to simulate.
        only_personalities: Personalities of the conditioned agent to
            simulate.
        clip_manifest_path: Clip metadata for ``describe-clips``.
    """

    seed: int = 42
    trials: int = DEFAULT_TRIALS
    scenarios: dict[ScenarioKind, ScenarioConfig] = field(
        default_factory=default_scenarios
    )
    profiles: dict[Personality, PersonalityProfile] = field(
        default_factory=default_profiles
    )
    backend: BackendConfig = field(default_factory=BackendConfig)
    analysis: AnalysisOptions = field(default_factory=AnalysisOptions)
    payload_format: PayloadFormat = PayloadFormat.STRUCTURED_JSON
    annotate_generic: bool = False
    swap_roles: bool = False
    lenient: bool = False
    max_consecutive_failures: int = 3
    jobs: int = 1
    record_timestamps: bool | None = None
    catalog_path: Path = CONFIG_DIR / "descriptions.jsonl"
    lexicon_path: Path = CONFIG_DIR / "demo_lexicon.dic"
    directions_path: Path = CONFIG_DIR / "expected_directions.yaml"
    clip_manifest_path: Path = CONFIG_DIR / "clip_manifest.yaml"
    only_scenarios: tuple[ScenarioKind, ...] = tuple(ScenarioKind)
    only_personalities: tuple[Personality, ...] = (
        Personality.EXTROVERT,
        Personality.INTROVERT,
    )

    def __post_init__(self) -> None:
        """Validate cross-field constraints."""
        if self.trials < 1:
            msg = f"trials must be >= 1, got {self.trials}"
            raise ConfigError(msg)
        if self.max_consecutive_failures < 1:
            msg = "max_consecutive_failures must be >= 1"
            raise ConfigError(msg)
        if self.jobs < 1:
            msg = f"jobs must be >= 1, got {self.jobs}"
            raise ConfigError(msg)
        if Personality.GENERIC in self.only_personalities:
            msg = "the conditioned agent must be extrovert or introvert"
            raise ConfigError(msg)
        if not self.only_scenarios or not self.only_personalities:
            msg = "nothing to simulate: no scenario or personality selected"
            raise ConfigError(msg)

    @classmethod
    def from_yaml(cls, path: str | Path) -> RunConfig:
        """Load configuration from a YAML file.

        Relative data-file paths are resolved against the file's folder.

        Args:
            path: Path to the YAML config file.

        Returns:
            A populated RunConfig instance.

        Raises:
            FileNotFoundError: If the config file does not exist.
            ConfigError: If a value is invalid.
        """
        path = Path(path)
        with path.open("r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
        if not isinstance(data, dict):
            msg = f"{path}: top level must be a mapping"
            raise ConfigError(msg)
        return cls.from_dict(data, base=path.resolve().parent)

    @classmethod
    def from_dict(cls, data: dict[str, Any], base: Path = CONFIG_DIR) -> RunConfig:
        """Build from an already-parsed mapping."""
        trials = int(data.get("trials", DEFAULT_TRIALS))
        paths = data.get("paths") or {}
        try:
            payload_format = PayloadFormat(
                data.get("payload_format", PayloadFormat.STRUCTURED_JSON.value)
            )
        except ValueError:
            msg = f"unknown payload_format {data.get('payload_format')!r}"
            raise ConfigError(msg) from None
        if trials < 1:
            msg = f"trials must be >= 1, got {trials}"
            raise ConfigError(msg)
        return cls(
            seed=int(data.get("seed", cls.seed)),
            trials=trials,
            scenarios=scenarios_from_dict(data.get("scenarios"), trials=trials),
            profiles=profiles_from_dict(data.get("personas")),
            backend=_backend_from_dict(data.get("backend"), base),
            analysis=AnalysisOptions.from_dict(data.get("analysis")),
            payload_format=payload_format,
            annotate_generic=bool(data.get("annotate_generic", False)),
            swap_roles=bool(data.get("swap_roles", False)),
            lenient=bool(data.get("lenient", False)),
            max_consecutive_failures=int(
                data.get("max_consecutive_failures", cls.max_consecutive_failures)
            ),
            jobs=int(data.get("jobs", cls.jobs)),
            record_timestamps=data.get("record_timestamps"),
            catalog_path=_resolve(
                paths.get("catalog", CONFIG_DIR / "descriptions.jsonl"), base
            ),
            lexicon_path=_resolve(
                paths.get("lexicon", CONFIG_DIR / "demo_lexicon.dic"), base
            ),
            directions_path=_resolve(
                paths.get("directions", CONFIG_DIR / "expected_directions.yaml"), base
            ),
            clip_manifest_path=_resolve(
                paths.get("clip_manifest", CONFIG_DIR / "clip_manifest.yaml"), base
            ),
        )

    @property
    def stamps_time(self) -> bool:
        """Whether trials get wall-clock timestamps."""
        if self.record_timestamps is None:
            return self.backend.kind is BackendKind.HTTP
        return self.record_timestamps

    def effective_scenarios(self) -> dict[ScenarioKind, ScenarioConfig]:
        """Scenarios as the agents see them (roles swapped if requested)."""
        if self.swap_roles:
            return {k: s.swapped() for k, s in self.scenarios.items()}
        return dict(self.scenarios)

    def hash_inputs(self, catalog_digest: str = "") -> dict[str, Any]:
        """Everything that shapes the prompts, scenarios and schema.

        Args:
            catalog_digest: SHA-256 of the description catalog file.
        """
        schema = load_schema()
        return {
            "turn_unit": TURN_UNIT,
            "schema": [
                {
                    "name": a.name,
                    "modality": a.modality.value,
                    "polarity": a.polarity.value,
                    "pair": a.intensity_pair,
                    "group": a.exclusion_group,
                }
                for a in schema.actions
            ],
            "scenarios": {
                k.value: _hashed_scenario(s)
                for k, s in self.effective_scenarios().items()
            },
            "profiles": {p.value: prof.to_dict() for p, prof in self.profiles.items()},
            "payload_format": self.payload_format.value,
            "annotate_generic": self.annotate_generic,
            "catalog_digest": catalog_digest,
        }

    def to_dict(self) -> dict[str, Any]:
        """Full plain-data form recorded in the run manifest."""
        return {
            "seed": self.seed,
            "trials": self.trials,
            "backend": self.backend.to_dict(),
            "analysis": self.analysis.to_dict(),
            "payload_format": self.payload_format.value,
            "annotate_generic": self.annotate_generic,
            "swap_roles": self.swap_roles,
            "lenient": self.lenient,
            "max_consecutive_failures": self.max_consecutive_failures,
            "scenarios": {
                k.value: s.to_dict() for k, s in self.effective_scenarios().items()
            },
            "profiles": {p.value: prof.to_dict() for p, prof in self.profiles.items()},
            "catalog": self.catalog_path.name,
            "only_scenarios": [k.value for k in self.only_scenarios],
            "only_personalities": [p.value for p in self.only_personalities],
        }


def config_hash(hash_inputs: dict[str, Any]) -> str:
    """Short SHA-256 over the canonical JSON of ``hash_inputs``."""
    canonical = json.dumps(hash_inputs, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def file_digest(path: str | Path) -> str:
    """SHA-256 hex digest of a file's bytes."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
