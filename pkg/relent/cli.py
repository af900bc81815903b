"""Command-line interface: ``relent <command> ...``.

Exit codes: 0 on success, 1 when an object fails validation or a suite fails,
2 for unreadable documents and usage errors.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .archive import ReportArchive
from .document import Document, load, serialize
from .errors import ArchiveError, DocumentError, UnknownSuite, ValidationError
from .finstat import compose_stat, re
from .finstat2 import ce, ce_closed_form, hcompose, re2, re2_joint, vcompose
from .harness import (
    DEFAULT_MAX_SIZE,
    DEFAULT_SEED,
    DEFAULT_TOL,
    DEFAULT_TRIALS,
    SUITES,
    reports_bytes,
    run_suite,
    suite_names,
)
from .prob_core import compose_channels, kl
from .randgen import GenConfig, InstanceGenerator
from .serializer import format_ext

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

ENTROPY_KINDS = ("kl", "re", "ce", "ce-closed", "re2", "re2-joint")
COMPOSE_MODES = ("channel", "morphism", "vertical", "horizontal")
GENERATE_KINDS = ("dist", "channel", "morphism", "two-morphism", "stacked-pair")


def _base(value: str) -> float | str:
    return "e" if value == "e" else 2.0


def _emit(text: str, out: Path | None = None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")
        logger.info("wrote %s", out)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    doc = load(args.file)
    failed = 0
    print(f"{'section':<14} {'name':<28} {'status':<6} max_violation")
    for row in doc.validate(args.tol):
        status = "ok" if row.ok else "FAIL"
        failed += not row.ok
        print(f"{row.section:<14} {row.name:<28} {status:<6} {format_ext(row.violation, 3)}")
        if row.message:
            print(f"    {row.message}")
    if failed:
        logger.warning("%d object(s) failed validation", failed)
        return EXIT_FAILED
    return EXIT_OK


def cmd_entropy(args) -> int:
    doc = load(args.file)
    base = _base(args.base)
    if args.kind == "kl":
        if args.other is None:
            raise UsageError("kind 'kl' needs two distributions")
        value = kl(doc.dist(args.target), doc.dist(args.other), base=base)
    elif args.kind == "re":
        value = re(doc.morphism(args.target), base=base)
    else:
        spade = doc.two_morphism(args.target)
        entropy = {"ce": ce, "ce-closed": ce_closed_form, "re2": re2, "re2-joint": re2_joint}[args.kind]
        value = entropy(spade, base=base)
    print(format_ext(value))
    return EXIT_OK


def cmd_compose(args) -> int:
    doc = load(args.file)
    name = args.name or f"{args.left}∘{args.right}"
    match args.mode:
        case "channel":
            doc.add_channel(name, compose_channels(doc.channel(args.left), doc.channel(args.right)))
        case "morphism":
            doc.add_morphism(name, compose_stat(doc.morphism(args.left), doc.morphism(args.right)))
        case "vertical":
            doc.add_two_morphism(name, vcompose(doc.two_morphism(args.left), doc.two_morphism(args.right)))
        case "horizontal":
            doc.add_two_morphism(name, hcompose(doc.two_morphism(args.left), doc.two_morphism(args.right)))
    _emit(serialize(doc), args.out)
    return EXIT_OK


def _config(args) -> GenConfig:
    return GenConfig(
        seed=args.seed,
        max_size=args.max_size,
        full_support=not args.sparse,
        dirichlet_like=not args.uniform,
    )


def cmd_check(args) -> int:
    if args.list:
        for name, spec in SUITES.items():
            print(f"{name:<16} {'probe' if spec.probe else 'law':<6} {spec.description}")
        return EXIT_OK
    if args.suite is None:
        raise UsageError("check needs a suite name, 'all', or --list")
    cfg = _config(args)
    archive = ReportArchive(args.archive) if args.archive else None
    reports = []
    try:
        for name in suite_names(args.suite):
            report = archive.lookup(name, args.trials, cfg, args.tol) if archive else None
            if report is None:
                report = run_suite(name, args.trials, cfg, args.tol, workers=args.workers)
                if archive:
                    archive.put(report)
            reports.append(report)
    finally:
        if archive:
            archive.close()
    _emit(reports_bytes(reports, timings=args.timings).decode("utf-8"))
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAILED


def cmd_generate(args) -> int:
    gen = InstanceGenerator(_config(args))
    name = args.name
    match args.kind:
        case "dist":
            doc = Document.of(**{name: gen.random_dist(gen.space(gen.draw_size(), "x"))})
        case "channel":
            dom, cod = gen.space(gen.draw_size(), "x"), gen.space(gen.draw_size(), "y")
            doc = Document.of(**{name: gen.random_channel(dom, cod)})
        case "morphism":
            doc = Document.of(**{name: gen.random_stat_morphism()})
        case "two-morphism":
            doc = Document.of(**{name: gen.random_two_morphism()})
        case "stacked-pair":
            spade, club = gen.stacked_pair()
            doc = Document.of(spade=spade, club=club)
    _emit(serialize(doc), args.out)
    return EXIT_OK


def cmd_reports(args) -> int:
    with ReportArchive(args.archive, flag="r") as archive:
        print(f"{'suite':<16} {'seed':>6} {'trials':>7} {'passes':>7} max_violation")
        for report in archive.reports():
            print(
                f"{report.suite:<16} {report.seed:>6} {report.trials:>7} {report.passes:>7} "
                f"{format_ext(report.max_violation, 3)}"
            )
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class UsageError(Exception):
    pass


def _common(suppress: bool) -> argparse.ArgumentParser:
    """Global flags; sub-parsers accept them too without resetting the defaults."""
    default = (lambda value: argparse.SUPPRESS) if suppress else (lambda value: value)
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--tol", type=float, default=default(DEFAULT_TOL), help="comparison tolerance")
    parser.add_argument("--base", choices=("e", "2"), default=default("e"), help="logarithm base")
    parser.add_argument("-v", "--verbose", action="count", default=default(0), help="-v for INFO, -vv for DEBUG")
    return parser


def _generator_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--max-size", type=int, default=DEFAULT_MAX_SIZE)
    parser.add_argument("--sparse", action="store_true", help="allow zero entries in drawn distributions")
    parser.add_argument("--uniform", action="store_true", help="normalised uniforms instead of Dirichlet draws")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relent",
        description="Relative entropy on FinStat and FinStat₂: evaluate, compose and check the laws.",
        parents=[_common(suppress=False)],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_common(suppress=True)]

    p = sub.add_parser("validate", parents=common, help="validate every object in a document")
    p.add_argument("file", type=Path)
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("entropy", parents=common, help="evaluate KL, RE, CE or RE₂")
    p.add_argument("file", type=Path)
    p.add_argument("target")
    p.add_argument("other", nargs="?", help="second distribution for --kind kl")
    p.add_argument("--kind", choices=ENTROPY_KINDS, default="re")
    p.set_defaults(handler=cmd_entropy)

    p = sub.add_parser("compose", parents=common, help="compose two objects and write the extended document")
    p.add_argument("file", type=Path)
    p.add_argument("left", help="outer channel/morphism, or ♣ (vertical) / ♥ (horizontal)")
    p.add_argument("right", help="inner channel/morphism, or ♠")
    p.add_argument("--mode", choices=COMPOSE_MODES, default="channel")
    p.add_argument("--name", help="name of the composite (default LEFT∘RIGHT)")
    p.add_argument("--out", type=Path)
    p.set_defaults(handler=cmd_compose)

    p = sub.add_parser("check", parents=common, help="run property suites")
    p.add_argument("suite", nargs="?", help="suite name or 'all'")
    p.add_argument("--list", action="store_true", help="list the registered suites")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    _generator_flags(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--archive", type=Path, help="SQLite report archive to read and extend")
    p.add_argument("--timings", action="store_true", help="include elapsed seconds in reports")
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("generate", parents=common, help="write a random instance document")
    p.add_argument("kind", choices=GENERATE_KINDS)
    _generator_flags(p)
    p.add_argument("--name", default="g")
    p.add_argument("--out", type=Path)
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("reports", parents=common, help="list reports stored in an archive")
    p.add_argument("--archive", type=Path, required=True)
    p.set_defaults(handler=cmd_reports)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True)
    if not math.isfinite(args.tol) or args.tol < 0:
        parser.error(f"--tol must be a non-negative number, got {args.tol!r}")
    try:
        return args.handler(args)
    except (ValidationError, ArchiveError) as exc:
        print(f"relent: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (DocumentError, UnknownSuite, UsageError, OSError, ValueError) as exc:
        print(f"relent: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
