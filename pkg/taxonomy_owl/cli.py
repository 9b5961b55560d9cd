"""Command-line interface: ``taxonomy-owl convert|check|merge|axioms|cache``.

Exit status is 0 when every name resolved, 2 when some names failed but
output was produced, and 1 on fatal errors (unreadable input, unwritable
output, bad configuration, a GBIF API that answered no lookup).
"""

from __future__ import annotations

import functools
import logging
import sys
from collections.abc import Callable
from datetime import timedelta
from pathlib import Path
from typing import Any, TypeVar

import click

from taxonomy_owl.axioms import name_resolver, parse_axiom_spec, resolve_axioms
from taxonomy_owl.builder import ConversionReport, TaxonomyBuilder, TaxonomyGraph
from taxonomy_owl.cache import CacheStore
from taxonomy_owl.client import GbifClient
from taxonomy_owl.config import RunConfig, load_config
from taxonomy_owl.emitter import emit, emit_axioms, serialize
from taxonomy_owl.exceptions import GbifTransportError, TaxonomyOwlError
from taxonomy_owl.merger import merge, parse_files
from taxonomy_owl.names import RawNameEntry, parse_names
from taxonomy_owl.report import format_table, summarize, write_csv
from taxonomy_owl.transports import CachingTransport, FixtureTransport

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2

F = TypeVar("F", bound=Callable[..., Any])


class FatalError(click.ClickException):
    """Aborts a command with exit status 1."""

    exit_code = EXIT_FATAL


# ----------------------------------------------------------------------
# Shared options
# ----------------------------------------------------------------------


def input_options(func: F) -> F:
    options = [
        click.option("--names", "names", multiple=True, help="Scientific name to convert (repeatable)."),
        click.option(
            "--names-file",
            type=click.Path(dir_okay=False, path_type=Path),
            help="File with one name per line, '#' comments, optional tab + rank.",
        ),
    ]
    return functools.reduce(lambda f, option: option(f), reversed(options), func)


def pipeline_options(func: F) -> F:
    options = [
        click.option("--iri-base", default=None, help="Prefix of class IRIs."),
        click.option("--lang-tag", default=None, help="Language tag of labels."),
        click.option("--allow-fuzzy", is_flag=True, default=None, help="Accept fuzzy matches of any confidence."),
        click.option("--fuzzy-threshold", type=click.IntRange(0, 100), default=None,
                     help="Minimum confidence of an accepted fuzzy match."),
        click.option("--fixtures", "fixtures_dir", type=click.Path(file_okay=False, path_type=Path), default=None,
                     help="Replay recorded responses from this directory."),
        click.option("--cache-dir", type=click.Path(file_okay=False, path_type=Path), default=None,
                     help="Cache responses in this directory."),
        click.option("--refresh", is_flag=True, default=None, help="Ignore cached answers (still write them)."),
        click.option("--max-age", type=click.FloatRange(min=0), default=None,
                     help="Seconds after which cached answers are stale."),
        click.option("--parallelism", type=click.IntRange(min=1), default=None, help="Concurrent name lookups."),
        click.option("--no-normalize", "normalize", flag_value=False, default=None,
                     help="Send names exactly as given (trimmed)."),
        click.option("--timeout", type=float, default=None, help="HTTP timeout in seconds."),
    ]
    return functools.reduce(lambda f, option: option(f), reversed(options), func)


def _config(ctx: click.Context, **overrides: Any) -> RunConfig:
    if overrides.get("names") == ():
        overrides["names"] = None
    if overrides.get("max_age") is not None:
        overrides["max_age"] = timedelta(seconds=overrides["max_age"])
    try:
        return load_config(ctx.obj.get("config_file"), overrides)
    except TaxonomyOwlError as exc:
        raise FatalError(str(exc)) from exc


def _read_names(config: RunConfig) -> list[RawNameEntry]:
    if config.names and config.names_file is not None:
        raise FatalError("give either --names or --names-file, not both")
    if config.names_file is not None:
        try:
            with open(config.names_file, encoding="utf-8") as fh:
                entries = parse_names(fh)
        except (OSError, ValueError) as exc:
            raise FatalError(f"cannot read names from {config.names_file}: {exc}") from exc
    else:
        entries = [RawNameEntry(name) for name in config.names if name.strip()]
    if not entries:
        raise FatalError("no names given")
    return entries


def _client(config: RunConfig) -> GbifClient:
    try:
        return config.make_client()
    except TaxonomyOwlError as exc:
        raise FatalError(str(exc)) from exc


def _build(builder: TaxonomyBuilder, entries: list[RawNameEntry]) -> tuple[TaxonomyGraph, ConversionReport]:
    try:
        return builder.build(entries)
    except GbifTransportError as exc:
        raise FatalError(f"GBIF API unusable: {exc}") from exc


def _store_of(client: GbifClient) -> CacheStore | None:
    transport = client.transport
    if isinstance(transport, (CachingTransport, FixtureTransport)):
        return transport.store
    return None


def _write_text(path: Path, text: str, mode: str = "w") -> None:
    try:
        with open(path, mode, encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise FatalError(f"cannot write {path}: {exc}") from exc
    logger.info("wrote %s", path)


def _write_report(report: ConversionReport, path: Path | None, **kwargs: Any) -> None:
    if path is None:
        return
    try:
        write_csv(report, path, **kwargs)
    except OSError as exc:
        raise FatalError(f"cannot write {path}: {exc}") from exc


def _status(report: ConversionReport) -> int:
    return EXIT_OK if report.ok else EXIT_PARTIAL


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------


@click.group()
@click.option("--config", "config_file", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="key = value file with default settings.")
@click.option("-v", "--verbose", count=True, help="More logging (repeatable).")
@click.option("-q", "--quiet", is_flag=True, help="Only log errors.")
@click.version_option(package_name="taxonomy-owl")
@click.pass_context
def cli(ctx: click.Context, config_file: Path | None, verbose: int, quiet: bool) -> None:
    """Convert species names into an OWL class hierarchy using the GBIF backbone."""
    level = logging.ERROR if quiet else (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbose, 2)]
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    ctx.ensure_object(dict)
    ctx.obj["config_file"] = config_file


@cli.command()
@input_options
@pipeline_options
@click.option("--out", "-o", "output", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="OWL output file (standard output when omitted).")
@click.option("--report", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="CSV report (default: next to --out).")
@click.option("--comments", "emit_comments", is_flag=True, default=None, help="Write rank/label comment banners.")
@click.pass_context
def convert(ctx: click.Context, **options: Any) -> None:
    """Resolve names and write one deduplicated OWL taxonomy."""
    config = _config(ctx, **options)
    entries = _read_names(config)
    with _client(config) as client:
        builder = TaxonomyBuilder(client, config.policy(), parallelism=config.parallelism,
                                  normalize_names=config.normalize)
        graph, report = _build(builder, entries)
        store = _store_of(client)

    document = emit(graph, config.emit_config())
    if config.output is not None:
        _write_text(config.output, document)
    else:
        click.echo(document, nl=False)
    _write_report(report, config.report_path)
    click.echo(summarize(report, store), nl=False, err=config.output is None)
    ctx.exit(_status(report))


@cli.command()
@input_options
@pipeline_options
@click.option("--report", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Also write the table as CSV.")
@click.option("--synonyms", "list_synonyms", is_flag=True, help="List the recorded synonyms of each accepted name.")
@click.pass_context
def check(ctx: click.Context, list_synonyms: bool, **options: Any) -> None:
    """Print the backbone status of each name without writing OWL."""
    config = _config(ctx, **options)
    entries = _read_names(config)
    with _client(config) as client:
        builder = TaxonomyBuilder(client, config.policy(), parallelism=config.parallelism,
                                  normalize_names=config.normalize)
        _, report = _build(builder, entries)
        extra: dict[int, dict[str, str]] = {}
        if list_synonyms:
            for index, entry in enumerate(report.entries):
                if entry.accepted_key is None:
                    extra[index] = {"synonyms": ""}
                    continue
                try:
                    records = client.get_synonyms(entry.accepted_key)
                except TaxonomyOwlError as exc:
                    logger.warning("cannot list synonyms of %s: %s", entry.accepted_name, exc)
                    records = []
                extra[index] = {"synonyms": "; ".join(r.canonical_name for r in records)}

    click.echo(format_table(report, extra=extra), nl=False)
    _write_report(report, config.report, extra=extra)
    ctx.exit(_status(report))


@cli.command("merge")
@click.argument("paths", nargs=-1, required=True, type=click.Path(dir_okay=False, path_type=Path))
@click.option("--out", "-o", "output", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Merged OWL file (standard output when omitted).")
@click.option("--parallelism", type=click.IntRange(min=1), default=4, help="Files parsed concurrently.")
def merge_cmd(paths: tuple[Path, ...], output: Path | None, parallelism: int) -> None:
    """Merge OWL files into one document with one class per IRI."""
    try:
        document = merge(parse_files(paths, parallelism))
    except OSError as exc:
        raise FatalError(f"cannot read {exc.filename}: {exc.strerror}") from exc
    except TaxonomyOwlError as exc:
        raise FatalError(str(exc)) from exc

    text = serialize(document)
    if output is not None:
        _write_text(output, text)
        click.echo(f"merged {len(paths)} files into {len(document.classes)} classes")
    else:
        click.echo(text, nl=False)


@cli.command("axioms")
@click.argument("spec_file", type=click.Path(dir_okay=False, path_type=Path))
@pipeline_options
@click.option("--property-iri-base", default=None, help="Prefix of object property IRIs.")
@click.option("--out", "-o", "output", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Write the fragment to this file.")
@click.option("--append", "append_to", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Append the fragment to this existing file.")
@click.pass_context
def axioms_cmd(ctx: click.Context, spec_file: Path, append_to: Path | None, **options: Any) -> None:
    """Emit restriction axioms (e.g. hybrid parentage) from a spec file."""
    if options.get("output") is not None and append_to is not None:
        raise FatalError("give either --out or --append, not both")
    config = _config(ctx, **options)
    try:
        with open(spec_file, encoding="utf-8") as fh:
            specs = parse_axiom_spec(fh)
    except (OSError, ValueError) as exc:
        raise FatalError(f"{spec_file}: {exc}") from exc

    fragment = ""
    if specs:
        with _client(config) as client:
            builder = TaxonomyBuilder(client, config.policy(), parallelism=config.parallelism,
                                      normalize_names=config.normalize)
            emit_config = config.emit_config()
            try:
                fragment = emit_axioms(resolve_axioms(specs, name_resolver(builder, emit_config)), emit_config)
            except TaxonomyOwlError as exc:
                raise FatalError(f"{spec_file}: {exc}") from exc

    if append_to is not None:
        if not append_to.is_file():
            raise FatalError(f"cannot append to {append_to}: no such file")
        _write_text(append_to, fragment, mode="a")
    elif config.output is not None:
        _write_text(config.output, fragment)
    else:
        click.echo(fragment, nl=False)


@cli.group()
def cache() -> None:
    """Inspect or clear a response cache directory."""


def _existing_store(directory: Path) -> CacheStore:
    if not directory.is_dir():
        raise FatalError(f"{directory} is not a cache directory")
    try:
        return CacheStore(directory)
    except TaxonomyOwlError as exc:
        raise FatalError(str(exc)) from exc


@cache.command("inspect")
@click.argument("directory", type=click.Path(file_okay=False, path_type=Path))
@click.option("--keys", "show_keys", is_flag=True, help="List every request key.")
def cache_inspect(directory: Path, show_keys: bool) -> None:
    """Show entry count and fetch-time range of a cache directory."""
    store = _existing_store(directory)
    oldest, newest = store.oldest_fetched_at(), store.newest_fetched_at()
    click.echo(f"entries: {len(store)}")
    if oldest is not None and newest is not None:
        click.echo(f"oldest: {oldest.isoformat()}")
        click.echo(f"newest: {newest.isoformat()}")
    if show_keys:
        for key in store.keys():
            click.echo(key)


@cache.command("clear")
@click.argument("directory", type=click.Path(file_okay=False, path_type=Path))
def cache_clear(directory: Path) -> None:
    """Remove every entry of a cache directory."""
    store = _existing_store(directory)
    try:
        removed = store.clear()
    except TaxonomyOwlError as exc:
        raise FatalError(str(exc)) from exc
    click.echo(f"removed {removed} entries")


def main(argv: list[str] | None = None) -> int:
    """Console-script entry point; returns the exit status."""
    try:
        result = cli.main(args=argv, prog_name="taxonomy-owl", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_FATAL
    except click.ClickException as exc:
        exc.show()
        return EXIT_FATAL
    return result if isinstance(result, int) else EXIT_OK


__all__ = ["EXIT_FATAL", "EXIT_OK", "EXIT_PARTIAL", "FatalError", "cli", "main"]
