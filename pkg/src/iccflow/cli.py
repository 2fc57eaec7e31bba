"""Command-line front end for the whole pipeline.

Subcommands: check, links, instrument, combine, analyze, bench. Reports go
to standard output (byte-identical across runs and --jobs settings);
diagnostics and timings go to standard error. Exit status 0 on success, 1
when analysis-level diagnostics were produced, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional

from .bench import render_bench, run_bench
from .combine import build_iac_graph, split_graph
from .icc import (
    LinkDb,
    LinkDbError,
    LinkResult,
    app_text_hash,
    match_links,
    resolve_intent_values,
)
from .instrument import InstrumentError, instrument_model
from .ir import AppModel, Diagnostic, error
from .parser import corpus_files, load_corpus, serialize_app
from .taint import analyze, load_config, render_report


def _print_diags(diags: list[Diagnostic]) -> None:
    for d in diags:
        print(str(d), file=sys.stderr)


def _load_models(paths: list[str]) -> tuple[list[AppModel], list[Diagnostic]]:
    files: list[str] = []
    for p in paths:
        if os.path.isdir(p):
            files.extend(corpus_files(p))
        else:
            files.append(p)
    files = sorted(dict.fromkeys(files))
    apps, diags = load_corpus(files)
    seen: dict[str, str] = {}
    unique: list[AppModel] = []
    for app in apps:
        if app.app_id in seen:
            diags.append(
                error(
                    f"duplicate app id {app.app_id!r} "
                    f"(already defined in {seen[app.app_id]})",
                    app.source_path,
                )
            )
        else:
            seen[app.app_id] = app.source_path or "<input>"
            unique.append(app)
    return unique, diags


def _resolve_links(apps: list[AppModel], db_path: Optional[str]) -> LinkResult:
    """Resolve intent values (reusing a database cache when the app text is
    unchanged), match links corpus-wide, and refresh the database."""
    db = LinkDb()
    if db_path and os.path.exists(db_path):
        db = LinkDb.load(db_path)
    values_by_app = {}
    hashes: dict[str, str] = {}
    for app in apps:
        text_hash = ""
        if app.source_path and os.path.exists(app.source_path):
            text_hash = app_text_hash(Path(app.source_path).read_text(encoding="utf-8"))
        hashes[app.app_id] = text_hash
        cached = db.cached_values(app.app_id, text_hash) if text_hash else None
        values_by_app[app.app_id] = (
            cached if cached is not None else resolve_intent_values(app)
        )
    result = match_links(values_by_app, apps)
    if db_path:
        by_app: dict[str, list] = {}
        for link in result.links:
            by_app.setdefault(link.from_stmt.app, []).append(link)
        for app in apps:
            db.put(app.app_id, hashes[app.app_id], values_by_app[app.app_id], by_app.get(app.app_id, []))
        db.save(db_path)
    return result


def _cmd_check(args) -> int:
    apps, diags = _load_models(args.paths)
    _print_diags(diags)
    if any(d.severity == "error" for d in diags):
        return 1
    components = sum(len(a.components) for a in apps)
    print(f"ok: {len(apps)} app(s), {components} component(s)")
    return 0


def _cmd_links(args) -> int:
    apps, diags = _load_models(args.paths)
    _print_diags(diags)
    if any(d.severity == "error" for d in diags):
        return 1
    result = _resolve_links(apps, args.db)
    for link in result.links:
        flavor = "exact" if link.exact else "fuzzy"
        scope = "cross-app" if link.cross_app else "in-app"
        print(f"{link.from_stmt}\t{link.kind}\t{link.to}\t{flavor}\t{scope}")
    _print_diags(result.diagnostics)
    return 1 if result.diagnostics else 0


def _cmd_instrument(args) -> int:
    apps, diags = _load_models(args.paths)
    _print_diags(diags)
    if any(d.severity == "error" for d in diags):
        return 1
    result = _resolve_links(apps, args.db)
    _print_diags(result.diagnostics)
    status = 1 if result.diagnostics else 0
    outputs = []
    for app in sorted(apps, key=lambda a: a.app_id):
        try:
            outputs.append(instrument_model(app, result.links))
        except InstrumentError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    if args.output:
        os.makedirs(args.output, exist_ok=True)
        for app in outputs:
            dest = os.path.join(args.output, f"{app.app_id}.cir")
            with open(dest, "w", encoding="utf-8") as fh:
                fh.write(serialize_app(app))
    else:
        print("\n".join(serialize_app(app) for app in outputs), end="")
    return status


def _cmd_combine(args) -> int:
    apps, diags = _load_models(args.paths)
    _print_diags(diags)
    if any(d.severity == "error" for d in diags):
        return 1
    result = _resolve_links(apps, args.db)
    _print_diags(result.diagnostics)
    graph = build_iac_graph([a.app_id for a in apps], result.links)
    for group in split_graph(graph, args.max_len):
        print("+".join(sorted(group)))
    return 1 if result.diagnostics else 0


def _cmd_analyze(args) -> int:
    apps, diags = _load_models(args.paths)
    _print_diags(diags)
    if any(d.severity == "error" for d in diags):
        return 1
    try:
        config = load_config(args.config)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    result = _resolve_links(apps, args.db)
    _print_diags(result.diagnostics)
    report = analyze(apps, result.links, config, max_len=args.max_len, jobs=args.jobs)
    _print_diags(report.diagnostics)
    for name, seconds in report.timings:
        print(f"[time] {name}: {seconds:.3f}s", file=sys.stderr)
    sys.stdout.write(render_report(report, args.format))
    return 1 if (result.diagnostics or report.diagnostics) else 0


def _cmd_bench(args) -> int:
    try:
        config = load_config(args.config)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report = run_bench(args.root, config, jobs=args.jobs)
    _print_diags(report.diagnostics)
    sys.stdout.write(render_bench(report, args.format))
    return 1 if any(not c.valid for c in report.cases) else 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iccflow",
        description="Inter-component privacy-leak analysis over .cir programs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_inputs(p):
        p.add_argument("paths", nargs="+", help=".cir files or directories")

    p = sub.add_parser("check", help="parse and validate models")
    add_inputs(p)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("links", help="resolve ICC links")
    add_inputs(p)
    p.add_argument("--db", help="link database to reuse and refresh")
    p.set_defaults(func=_cmd_links)

    p = sub.add_parser("instrument", help="rewrite ICC calls into direct calls")
    add_inputs(p)
    p.add_argument("--db", help="link database to reuse and refresh")
    p.add_argument("-o", "--output", help="directory for instrumented .cir files")
    p.set_defaults(func=_cmd_instrument)

    p = sub.add_parser("combine", help="print the combined-analysis plan")
    add_inputs(p)
    p.add_argument("--db", help="link database to reuse and refresh")
    p.add_argument("--max-len", type=int, default=2, help="max apps per analyzed set")
    p.set_defaults(func=_cmd_combine)

    p = sub.add_parser("analyze", help="run the full leak analysis")
    add_inputs(p)
    p.add_argument("--db", help="link database to reuse and refresh")
    p.add_argument("--config", required=True, help="source/sink configuration file")
    p.add_argument("--max-len", type=int, default=2, help="max apps per analyzed set")
    p.add_argument("--format", choices=("text", "tsv"), default="text")
    p.add_argument("--jobs", type=int, default=1, help="concurrent app sets")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("bench", help="run a labeled corpus and score it")
    p.add_argument("root", help="corpus root containing case directories")
    p.add_argument("--config", required=True, help="source/sink configuration file")
    p.add_argument("--format", choices=("text", "tsv"), default="text")
    p.add_argument("--jobs", type=int, default=1, help="concurrent cases")
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LinkDbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
