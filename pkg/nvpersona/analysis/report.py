"""Report — assemble the analysis sections and render them to files.

A report directory holds::

    report.md       tables for reading
    report.json     every number, sorted keys
    features.csv    unfiltered lexicon comparison, one row per (scenario, feature)
    nonverbal.csv   plot-ready selection frequencies
    labels.jsonl    raw classifier labels (classification section only)

Rendering is a pure function of the report; the directory is written
next to its destination and swapped in, so a failed analysis leaves any
earlier report untouched.
"""

from __future__ import annotations

import csv
import io
import logging
import shutil
import tempfile
from collections.abc import Iterable
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any

from nvpersona.analysis.classification import (
    PERSONALITIES,
    ClassificationSection,
    Classifier,
    classify_extraversion,
)
from nvpersona.analysis.nonverbal import (
    CSV_COLUMNS,
    NonverbalSection,
    analyze_nonverbal,
)
from nvpersona.analysis.verbal import (
    ExpectedDirections,
    FeatureRow,
    VerbalSection,
    analyze_verbal,
)
from nvpersona.behavior.schema import ActionSchema, Modality
from nvpersona.fileio import dump_json, jsonl_line
from nvpersona.linguistics.lexicon import Lexicon
from nvpersona.simulation.config import AnalysisOptions
from nvpersona.simulation.experiment import Corpus
from nvpersona.stats.filtering import EXT_EQUAL, significance_stars

logger = logging.getLogger(__name__)

SECTIONS = ("verbal", "classification", "nonverbal")
REPORT_FILES = (
    "report.md",
    "report.json",
    "features.csv",
    "nonverbal.csv",
    "labels.jsonl",
)
FEATURE_COLUMNS = (
    "scenario",
    "feature",
    "label",
    "mean_ext",
    "mean_int",
    "t",
    "df",
    "p",
    "d",
    "direction",
    "aligned",
    "selected",
)


@dataclass
class ComparisonReport:
    """All analysis results of one run.

    Attributes:
        run: Name of the run directory.
        config_hash: The run's configuration hash.
        lexicon: File name of the lexicon used.
        verbal: Verbal section, if requested.
        classification: Classification section, if requested.
        nonverbal: Nonverbal section, if requested.
    """

    run: str
    config_hash: str
    lexicon: str
    verbal: VerbalSection | None = None
    classification: ClassificationSection | None = None
    nonverbal: NonverbalSection | None = None

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form; ``report.json`` decodes back to exactly this."""
        return {
            "run": self.run,
            "config_hash": self.config_hash,
            "lexicon": self.lexicon,
            "verbal": None if self.verbal is None else self.verbal.to_dict(),
            "classification": (
                None if self.classification is None else self.classification.to_dict()
            ),
            "nonverbal": None if self.nonverbal is None else self.nonverbal.to_dict(),
        }


def build_report(
    corpus: Corpus,
    *,
    lexicon: Lexicon,
    directions: ExpectedDirections,
    classifier: Classifier | None = None,
    options: AnalysisOptions | None = None,
    schema: ActionSchema | None = None,
    sections: Iterable[str] = SECTIONS,
) -> ComparisonReport:
    """Run the requested analyses over a corpus.

    Raises:
        ValueError: On an unknown section name, or classification
            without a classifier.
        EmptyGroup: If a scenario lacks one of the personalities.
    """
    options = options or AnalysisOptions()
    wanted = set(sections)
    unknown = wanted - set(SECTIONS)
    if unknown:
        msg = f"unknown report sections: {', '.join(sorted(unknown))}"
        raise ValueError(msg)
    report = ComparisonReport(
        run=corpus.run_dir.name,
        config_hash=corpus.config_hash,
        lexicon=Path(lexicon.source).name,
    )
    if "verbal" in wanted:
        report.verbal = analyze_verbal(corpus, lexicon, directions, options)
    if "classification" in wanted:
        if classifier is None:
            msg = "the classification section needs a classifier"
            raise ValueError(msg)
        report.classification = classify_extraversion(corpus, classifier, options.yates)
    if "nonverbal" in wanted:
        report.nonverbal = analyze_nonverbal(corpus, schema, options.unit)
    return report


# -- formatting --------------------------------------------------------------


def format_p(p: float) -> str:
    """APA-style p-value: ``<.001``, ``.034``, ``1.000``."""
    if p < 0.001:
        return "<.001"
    text = f"{p:.3f}"
    return text[1:] if text.startswith("0") else text


def _test_cell(row: FeatureRow) -> str:
    if row.result is None:
        return f"{_spaced(row.direction)} (constant)"
    if row.direction == EXT_EQUAL:
        return _spaced(row.direction)
    stars = significance_stars(row.result.p_two_sided)
    return f"{_spaced(row.direction)} {stars}".rstrip()


def _spaced(direction: str) -> str:
    return direction.replace(">", " > ").replace("<", " < ").replace("=", " = ")


def _table(header: Iterable[str], rows: Iterable[Iterable[str]]) -> list[str]:
    header = list(header)
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return lines


def _verbal_markdown(section: VerbalSection) -> list[str]:
    test_name = "Welch" if section.test == "welch" else "Student"
    lines = [
        "## Verbal",
        "",
        f"Unit: {section.unit}. {test_name} t-tests, extrovert against introvert. "
        f"Selected: p < {section.alpha:g}, |d| > {section.d_min:g}.",
    ]
    for scenario in section.scenarios:
        ext, intro = PERSONALITIES
        lines += [
            "",
            f"### {scenario.scenario.title}",
            "",
            f"Documents: EXT {scenario.documents[ext]}, "
            f"INT {scenario.documents[intro]}.",
            "",
        ]
        lines += _table(
            ("Count", "EXT", "INT", "test"),
            (
                (r.label, f"{r.mean_ext:.2f}", f"{r.mean_int:.2f}", _test_cell(r))
                for r in scenario.counts
            ),
        )
        lines.append("")
        if not scenario.selected:
            lines.append("_No feature passes the filter._")
            continue
        lines += _table(
            ("Feature", "EXT", "INT", "test", "Aligned"),
            (
                (
                    r.label,
                    f"{r.mean_ext:.2f}",
                    f"{r.mean_int:.2f}",
                    _test_cell(r),
                    r.aligned,
                )
                for r in scenario.selected
            ),
        )
    return lines


def _classification_markdown(section: ClassificationSection) -> list[str]:
    lines = ["## Classification", "", f"Classifier: `{section.classifier}`."]
    if not section.available:
        lines += ["", f"_Unavailable: {section.reason}._"]
        return lines
    if section.missing:
        lines.append(f"Unlabelled utterances: {section.missing}.")
    lines.append("")
    lines += _table(
        ("Scenario", "EXT", "INT", "χ²(1)", "p"),
        (
            (
                s.scenario.title,
                f"{100 * s.proportions[PERSONALITIES[0]].value:.1f}%",
                f"{100 * s.proportions[PERSONALITIES[1]].value:.1f}%",
                f"{s.test.chi2:.2f}",
                format_p(s.test.p),
            )
            for s in section.scenarios
        ),
    )
    extra = (("Pooled", section.pooled), ("Interaction", section.interaction))
    for name, result in extra:
        if result is not None:
            lines += [
                "",
                f"{name}: χ²({result.df}) = {result.chi2:.2f}, "
                f"p = {format_p(result.p)}.",
            ]
    return lines


def _nonverbal_markdown(section: NonverbalSection) -> list[str]:
    lines = [
        "## Nonverbal",
        "",
        f"Selection frequency per {section.unit}, personality agent only.",
    ]
    scenarios = list(dict.fromkeys(d.scenario for d in section.distributions))
    for scenario in scenarios:
        ext = section.cell(scenario, PERSONALITIES[0])
        intro = section.cell(scenario, PERSONALITIES[1])
        lines += [
            "",
            f"### {scenario.title}",
            "",
            f"Utterances: EXT {ext.utterances}, INT {intro.utterances}.",
        ]
        for modality in Modality:
            lines += ["", f"#### {modality.label}", ""]
            lines += _table(
                ("Action", "EXT", "INT"),
                (
                    (a.action, f"{a.frequency:.2f}", f"{intro.frequency(a.action):.2f}")
                    for a in ext.by_modality(modality)
                ),
            )
        lines += ["", "#### Polarity contrasts", ""]
        lines += _table(
            ("Pair", "EXT lean", "INT lean", "Difference"),
            (
                (
                    f"{c.extrovert_action} / {c.introvert_action}",
                    f"{c.lean_extrovert:+.2f}",
                    f"{c.lean_introvert:+.2f}",
                    f"{c.difference:+.2f}",
                )
                for c in section.contrasts
                if c.scenario is scenario
            ),
        )
    return lines


def render_markdown(report: ComparisonReport) -> str:
    """Markdown tables for every present section."""
    lines = [
        "# Personality comparison report",
        "",
        f"- Run: `{report.run}`",
        f"- Config hash: `{report.config_hash}`",
        f"- Lexicon: `{report.lexicon}`",
    ]
    if report.verbal is not None:
        lines += ["", *_verbal_markdown(report.verbal)]
    if report.classification is not None:
        lines += ["", *_classification_markdown(report.classification)]
    if report.nonverbal is not None:
        lines += ["", *_nonverbal_markdown(report.nonverbal)]
    return "\n".join(lines) + "\n"


def render_json(report: ComparisonReport) -> str:
    """Canonical JSON of :meth:`ComparisonReport.to_dict`."""
    return dump_json(report.to_dict())


def _csv(header: Iterable[str], rows: Iterable[Iterable[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def render_features_csv(section: VerbalSection) -> str:
    """Every lexicon feature of every scenario, filtered or not."""
    rows = []
    for scenario in section.scenarios:
        for r in scenario.features:
            result = r.result
            rows.append(
                (
                    scenario.scenario.value,
                    r.feature,
                    r.label,
                    r.mean_ext,
                    r.mean_int,
                    "" if result is None else result.t,
                    "" if result is None else result.df,
                    "" if result is None else result.p_two_sided,
                    "" if result is None else result.cohens_d,
                    r.direction,
                    r.aligned,
                    int(r.selected),
                )
            )
    return _csv(FEATURE_COLUMNS, rows)


def render_nonverbal_csv(section: NonverbalSection) -> str:
    """Plot-ready selection frequencies."""
    return _csv(CSV_COLUMNS, section.csv_rows())


def render_labels(section: ClassificationSection) -> str:
    """One JSON record per labelled utterance."""
    return "".join(jsonl_line(r.to_dict()) for r in section.labels)


class ReportFormat(Enum):
    """Output format of the report files."""

    MARKDOWN = "md"
    JSON = "json"
    CSV = "csv"


def render_report(report: ComparisonReport, fmt: ReportFormat) -> dict[str, str]:
    """File name to content for the files of one format.

    CSV covers every table file: ``features.csv``, ``nonverbal.csv`` and the
    ``labels.jsonl`` records, each present only when its section is.
    """
    match fmt:
        case ReportFormat.MARKDOWN:
            return {"report.md": render_markdown(report)}
        case ReportFormat.JSON:
            return {"report.json": render_json(report)}
    files: dict[str, str] = {}
    if report.verbal is not None:
        files["features.csv"] = render_features_csv(report.verbal)
    if report.nonverbal is not None:
        files["nonverbal.csv"] = render_nonverbal_csv(report.nonverbal)
    if report.classification is not None:
        files["labels.jsonl"] = render_labels(report.classification)
    return files


def render_files(report: ComparisonReport) -> dict[str, str]:
    """File name to content for every file the report produces."""
    files: dict[str, str] = {}
    for fmt in ReportFormat:
        files.update(render_report(report, fmt))
    return files


def write_report(report: ComparisonReport, out_dir: str | Path) -> Path:
    """Write the report files, replacing ``out_dir`` as a whole.

    Returns:
        The report directory.
    """
    out_dir = Path(out_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(dir=out_dir.parent, prefix=f".{out_dir.name}."))
    try:
        for name, text in render_files(report).items():
            (staging / name).write_text(text, encoding="utf-8", newline="\n")
        if out_dir.exists():
            retired = staging.with_name(staging.name + ".old")
            out_dir.rename(retired)
            staging.rename(out_dir)
            shutil.rmtree(retired)
        else:
            staging.rename(out_dir)
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    logger.info("report written to %s", out_dir)
    return out_dir
