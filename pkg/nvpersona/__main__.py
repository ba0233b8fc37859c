"""Entry point for ``python -m nvpersona`` and the ``nvpersona`` script.

Subcommands mirror the pipeline stages, so each stage can be re-run on
the artifacts of the previous one::

    nvpersona simulate --scenario both --personality both --trials 10
    nvpersona analyze runs/<run> --all
    nvpersona describe-clips --backend http --k 3
    nvpersona validate runs/<run>
    nvpersona schema

Exit codes: 0 success, 1 runtime failure (including failed trials and
corpus violations), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import pathlib
import sys
from collections.abc import Sequence
from dataclasses import replace

from nvpersona.analysis.classification import HttpClassifier, LexiconBaseline
from nvpersona.analysis.report import SECTIONS, build_report, write_report
from nvpersona.analysis.verbal import load_expected_directions
from nvpersona.behavior.schema import load_schema
from nvpersona.errors import ConfigError, NvPersonaError
from nvpersona.linguistics.lexicon import load_lexicon
from nvpersona.linguistics.scoring import DocumentUnit
from nvpersona.llm.backends import build_backend
from nvpersona.llm.describe import DEFAULT_K, generate_descriptions, load_clip_manifest
from nvpersona.persona.profiles import Personality
from nvpersona.persona.scenarios import ScenarioKind
from nvpersona.simulation.config import DEFAULT_CONFIG, RunConfig
from nvpersona.simulation.experiment import load_corpus, run_experiment
from nvpersona.simulation.transcript import TrialStatus
from nvpersona.simulation.validate import validate_corpus

logger = logging.getLogger("nvpersona")

_SCENARIO_CHOICES = {
    "negotiation": (ScenarioKind.NEGOTIATION,),
    "icebreaking": (ScenarioKind.ICE_BREAKING,),
    "both": tuple(ScenarioKind),
}
_PERSONALITY_CHOICES = {
    "extrovert": (Personality.EXTROVERT,),
    "introvert": (Personality.INTROVERT,),
    "both": (Personality.EXTROVERT, Personality.INTROVERT),
}


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        msg = f"expected an integer, got {text!r}"
        raise argparse.ArgumentTypeError(msg) from None
    if value < 1:
        msg = f"must be >= 1, got {value}"
        raise argparse.ArgumentTypeError(msg)
    return value


def _load_config(args: argparse.Namespace) -> RunConfig:
    if not args.config.is_file():
        msg = f"config file not found: {args.config}"
        raise ConfigError(msg)
    config = RunConfig.from_yaml(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    return config


# -- simulate ----------------------------------------------------------------


def cmd_simulate(args: argparse.Namespace) -> int:
    """Run the agent-to-agent trials and print the run directory."""
    config = _load_config(args)
    overrides = {
        "only_scenarios": _SCENARIO_CHOICES[args.scenario],
        "only_personalities": _PERSONALITY_CHOICES[args.personality],
    }
    if args.trials is not None:
        overrides["trials"] = args.trials
        overrides["scenarios"] = {
            kind: replace(scenario, trials=args.trials)
            for kind, scenario in config.scenarios.items()
        }
    if args.backend:
        overrides["backend"] = config.backend.with_spec(args.backend)
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    for flag in ("annotate_generic", "swap_roles", "lenient"):
        if getattr(args, flag):
            overrides[flag] = True
    config = replace(config, **overrides)

    corpus = run_experiment(
        config,
        out_dir=args.out,
        run_dir=args.resume,
        resume=args.resume is not None,
    )
    print(corpus.run_dir)
    failed = [t for t in corpus.trials if t.status is TrialStatus.FAILED]
    for trial in failed:
        print(f"FAILED {trial.trial_id}: {trial.failure}", file=sys.stderr)
    return 1 if failed else 0


# -- analyze -----------------------------------------------------------------


def cmd_analyze(args: argparse.Namespace) -> int:
    """Analyse a run directory and write the report files."""
    config = _load_config(args)
    options = config.analysis
    if args.unit:
        options = replace(options, unit=DocumentUnit(args.unit))
    if args.student:
        options = replace(options, student=True)
    if args.classifier:
        options = replace(options, classifier=args.classifier)

    sections = [s for s in SECTIONS if getattr(args, s)]
    if args.all or not sections:
        sections = list(SECTIONS)

    corpus = load_corpus(args.run_dir)
    lexicon = load_lexicon(args.lexicon or config.lexicon_path)
    directions = load_expected_directions(config.directions_path)

    classifier = None
    if "classification" in sections:
        if options.classifier == "lexicon":
            classifier = LexiconBaseline(
                lexicon,
                threshold=options.classifier_threshold,
                categories=options.classifier_categories,
            )
        elif options.classifier.startswith(("http://", "https://")):
            classifier = HttpClassifier.for_endpoint(options.classifier, config.backend)
        else:
            msg = f"--classifier must be 'lexicon' or a URL, got {options.classifier!r}"
            raise ConfigError(msg)

    try:
        report = build_report(
            corpus,
            lexicon=lexicon,
            directions=directions,
            classifier=classifier,
            options=options,
            sections=sections,
        )
    finally:
        if isinstance(classifier, HttpClassifier):
            classifier.close()
    out = write_report(report, args.out or pathlib.Path(args.run_dir) / "report")
    print(out)
    return 0


# -- describe-clips ----------------------------------------------------------


def cmd_describe_clips(args: argparse.Namespace) -> int:
    """Generate the action description catalog from clip metadata."""
    config = _load_config(args)
    settings = config.backend
    if args.backend:
        settings = settings.with_spec(args.backend)
    manifest = load_clip_manifest(args.manifest or config.clip_manifest_path)
    out = args.out or config.catalog_path
    backend = build_backend(settings)
    try:
        catalog = generate_descriptions(
            manifest,
            backend,
            args.k,
            out,
            force=args.force,
            model=settings.model,
        )
    finally:
        if hasattr(backend, "close"):
            backend.close()
    print(f"{out}: {catalog.total()} descriptions")
    return 0


# -- validate / schema -------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    """Re-check every corpus invariant; list the violations."""
    violations = validate_corpus(args.run_dir)
    for violation in violations:
        print(violation)
    if violations:
        print(f"{len(violations)} violations", file=sys.stderr)
        return 1
    print(f"{args.run_dir}: ok")
    return 0


def cmd_schema(args: argparse.Namespace) -> int:
    """Print the nonverbal action list."""
    schema = load_schema()
    header = ("Action", "Modality", "Polarity", "Pair", "Group")
    rows = [
        (
            a.name,
            a.modality.label,
            a.polarity.value,
            a.intensity_pair or "-",
            a.exclusion_group or "-",
        )
        for a in schema.actions
    ]
    widths = [max(len(str(r[i])) for r in (header, *rows)) for i in range(len(header))]
    for row in (header, *rows):
        print("  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip())
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser with every subcommand."""
    parser = argparse.ArgumentParser(
        prog="nvpersona",
        description="Personality-conditioned verbal and nonverbal agent behavior",
    )
    parser.add_argument(
        "-c",
        "--config",
        type=pathlib.Path,
        default=DEFAULT_CONFIG,
        help="Path to YAML config file (default: config/default.yaml)",
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="Log debug messages"
    )
    parser.add_argument(
        "-q", "--quiet", action="store_true", help="Log warnings and errors only"
    )
    parser.add_argument(
        "--seed", type=int, default=None, help="Override the run seed"
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sim = sub.add_parser("simulate", help="Run agent-to-agent trials")
    sim.add_argument(
        "--scenario",
        choices=sorted(_SCENARIO_CHOICES),
        default="both",
        help="Scenario(s) to simulate (default: both)",
    )
    sim.add_argument(
        "--personality",
        choices=sorted(_PERSONALITY_CHOICES),
        default="both",
        help="Personality of the conditioned agent (default: both)",
    )
    sim.add_argument(
        "--trials",
        type=_positive_int,
        default=None,
        help="Trials per scenario and personality (default: from config)",
    )
    sim.add_argument(
        "--backend",
        default=None,
        help="http[:URL], scripted:FILE or replay:DIR (default: from config)",
    )
    sim.add_argument(
        "--out",
        type=pathlib.Path,
        default=pathlib.Path("runs"),
        help="Parent folder of new run directories (default: runs)",
    )
    sim.add_argument(
        "--jobs", type=_positive_int, default=None, help="Trials run in parallel"
    )
    sim.add_argument(
        "--resume",
        type=pathlib.Path,
        default=None,
        metavar="RUN_DIR",
        help="Finish the missing and failed trials of an existing run",
    )
    sim.add_argument(
        "--annotate-generic",
        action="store_true",
        help="Let the generic agent select nonverbal actions too",
    )
    sim.add_argument(
        "--swap-roles",
        action="store_true",
        help="Give the personality agent the other scenario role",
    )
    sim.add_argument(
        "--lenient",
        action="store_true",
        help="Warn on unknown nonverbal tags instead of failing the turn",
    )
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="Write the comparison report of a run")
    ana.add_argument("run_dir", type=pathlib.Path, help="Run directory")
    ana.add_argument("--all", action="store_true", help="All sections (default)")
    ana.add_argument("--verbal", action="store_true", help="Lexical comparison")
    ana.add_argument(
        "--classification", action="store_true", help="Extraversion classification"
    )
    ana.add_argument(
        "--nonverbal", action="store_true", help="Nonverbal action frequencies"
    )
    ana.add_argument(
        "--lexicon", type=pathlib.Path, default=None, help="Lexicon file (.dic)"
    )
    ana.add_argument(
        "--classifier",
        default=None,
        help="'lexicon' for the built-in baseline or the URL of a classifier",
    )
    ana.add_argument(
        "--unit",
        choices=[u.value for u in DocumentUnit],
        default=None,
        help="Score each utterance or each trial as one document",
    )
    ana.add_argument(
        "--student", action="store_true", help="Pooled-variance t-tests"
    )
    ana.add_argument(
        "--out",
        type=pathlib.Path,
        default=None,
        help="Report directory (default: RUN_DIR/report)",
    )
    ana.set_defaults(func=cmd_analyze)

    desc = sub.add_parser("describe-clips", help="Build the description catalog")
    desc.add_argument(
        "--manifest", type=pathlib.Path, default=None, help="Clip manifest (YAML)"
    )
    desc.add_argument(
        "--backend",
        default=None,
        help="http[:URL], scripted:FILE or replay:DIR (default: from config)",
    )
    desc.add_argument(
        "--k",
        type=_positive_int,
        default=DEFAULT_K,
        help=f"Descriptions per action (default: {DEFAULT_K})",
    )
    desc.add_argument(
        "--force", action="store_true", help="Regenerate a complete catalog"
    )
    desc.add_argument(
        "--out", type=pathlib.Path, default=None, help="Catalog file to write"
    )
    desc.set_defaults(func=cmd_describe_clips)

    val = sub.add_parser("validate", help="Check a run against the corpus rules")
    val.add_argument("run_dir", type=pathlib.Path, help="Run directory")
    val.set_defaults(func=cmd_validate)

    sch = sub.add_parser("schema", help="Print the nonverbal action list")
    sch.set_defaults(func=cmd_schema)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Parse CLI args and dispatch to the subcommand."""
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(
        level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        logger.error("%s", exc)
        return 2
    except FileNotFoundError as exc:
        logger.error("file not found: %s", exc.filename or exc)
        return 1
    except NvPersonaError as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
