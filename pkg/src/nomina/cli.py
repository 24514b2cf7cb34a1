"""Command-line pipeline driver: segment, tag, align, merge, classify,
report, review."""

from __future__ import annotations

import argparse
import sys

from .config import load_config
from .errors import NominaError
from .workspace import (
    Workspace,
    run_align,
    run_classify,
    run_merge,
    run_report,
    run_segment,
    run_tag,
)

_STAGE_RUNNERS = {
    "segment": run_segment,
    "tag": run_tag,
    "align": run_align,
    "merge": run_merge,
    "classify": run_classify,
    "report": run_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nomina",
        description="Track proper names across aligned translations of one text.",
    )
    parser.add_argument("--config", required=True, help="project config file")
    parser.add_argument("--workspace", help="override the workspace directory")
    sub = parser.add_subparsers(dest="command", required=True)
    for stage in _STAGE_RUNNERS:
        sub.add_parser(stage, help=f"run the {stage} stage")
    review = sub.add_parser("review", help="serve the local review API and UI")
    review.add_argument("--port", type=int, default=7878)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, workspace_override=args.workspace)
        ws = Workspace(config.workspace)
        if args.command == "review":
            from .review import serve_review

            ws.require_stage("align")  # reviewing needs aligned bitexts
            serve_review(config, ws, port=args.port)
            return 0
        written = _STAGE_RUNNERS[args.command](config, ws)
        for name in written:
            print(f"wrote {ws.path(name)}")
        if args.command == "tag":
            from .cascade import coverage_stats
            from .workspace import load_annotated_pivot

            stats = coverage_stats(load_annotated_pivot(config, ws))
            print(
                f"tagged {stats.occurrences_total} name occurrences "
                f"({stats.occurrences_distinct} distinct); "
                f"{stats.np_char_fraction:.1%} of characters, "
                f"{stats.np_word_fraction:.1%} of words"
            )
        return 0
    except NominaError as exc:
        print(f"error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
