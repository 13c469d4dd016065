"""Command-line interface.

Exit codes: 0 success / no error findings, 1 validation errors or failed
`fmt --check`, 2 usage or I/O errors. `--format json` output is
byte-identical to the HTTP service's payload for the same input.
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Optional

import click

from ppmkit import analysis, jsonio, parser, payloads, printer, rules, store as store_mod
from ppmkit.model import PolicyInstance
from ppmkit.store import PolicyKey, PolicyStore, StoreError


def _fail(message: str) -> "click.exceptions.Exit":
    click.echo(f"error: {message}", err=True)
    return click.exceptions.Exit(2)


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise _fail(str(exc))
    except UnicodeDecodeError:
        raise _fail(f"{path}: not valid UTF-8")


def _parse_file(path: Path) -> parser.ParseResult:
    return parser.parse(_read_text(path), source_name=str(path))


def _require_instance(path: Path) -> tuple[PolicyInstance, dict]:
    result = _parse_file(path)
    if result.instance is None:
        for diag in result.diagnostics:
            click.echo(_render_parse_diag(path, diag), err=True)
        raise click.exceptions.Exit(1)
    return result.instance, result.spans


def _render_parse_diag(path: Path, diag: parser.ParseDiagnostic) -> str:
    span = diag.span
    return f"{path}:{span.start_line}:{span.start_col}: {diag.code}: {diag.message}"


def _render_finding(path: Path, diag: rules.Diagnostic) -> str:
    location = str(path)
    if diag.span is not None:
        location += f":{diag.span.start_line}:{diag.span.start_col}"
    return f"{location}: {diag.severity.value}: {diag.rule_id}: {diag.message} [{diag.path}]"


@click.group()
def main() -> None:
    """Tools for machine-readable privacy policy documents (.ppm)."""


@main.command()
@click.argument("files", nargs=-1, required=True, type=click.Path(path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def validate(files: tuple[Path, ...], fmt: str) -> None:
    """Parse and validate one or more .ppm files."""
    worst = 0
    for path in files:
        result = _parse_file(path)
        if fmt == "json":
            click.echo(payloads.dumps(payloads.validation_obj(result)), nl=False)
        else:
            for diag in result.diagnostics:
                click.echo(_render_parse_diag(path, diag))
        if result.instance is None:
            worst = max(worst, 1)
            continue
        report = rules.validate(result.instance, result.spans)
        if fmt == "text":
            for diag in report.diagnostics:
                click.echo(_render_finding(path, diag))
            counts = report.counts
            click.echo(
                f"{path}: {counts['error']} errors, {counts['warning']} warnings, "
                f"{counts['info']} notes"
            )
        if report.error_count:
            worst = max(worst, 1)
    raise click.exceptions.Exit(worst)


@main.command()
@click.argument("file", type=click.Path(path_type=Path))
@click.option("--write", is_flag=True, help="Rewrite the file in place.")
@click.option("--check", is_flag=True, help="Exit 1 if the file is not canonical.")
def fmt(file: Path, write: bool, check: bool) -> None:
    """Print (or apply) the canonical form of a .ppm file."""
    original = _read_text(file)
    result = parser.parse(original, source_name=str(file))
    if result.instance is None:
        for diag in result.diagnostics:
            click.echo(_render_parse_diag(file, diag), err=True)
        raise click.exceptions.Exit(2)
    canonical = printer.print_canonical(result.instance)
    if check:
        raise click.exceptions.Exit(0 if canonical == original else 1)
    if write:
        file.write_text(canonical, encoding="utf-8", newline="")
        return
    click.echo(canonical, nl=False)


@main.command()
@click.argument("file_a", type=click.Path(path_type=Path))
@click.argument("file_b", type=click.Path(path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def diff(file_a: Path, file_b: Path, fmt: str) -> None:
    """Compare two policy documents."""
    instance_a, _ = _require_instance(file_a)
    instance_b, _ = _require_instance(file_b)
    obj = payloads.compare_obj(instance_a, instance_b, str(file_a), str(file_b))
    if fmt == "json":
        click.echo(payloads.dumps(obj), nl=False)
        return
    result = analysis.compare(instance_a, instance_b)
    if result.is_empty():
        click.echo("no differences")
        return
    rows = [
        ("data entries", result.entries_only_in_a, result.entries_only_in_b),
        ("data categories", result.categories_only_in_a, result.categories_only_in_b),
        ("rights", {r.value for r in result.rights_only_in_a}, {r.value for r in result.rights_only_in_b}),
        ("lawful bases", {b.value for b in result.lawful_bases_only_in_a}, {b.value for b in result.lawful_bases_only_in_b}),
    ]
    for label, only_a, only_b in rows:
        for value in sorted(only_a):
            click.echo(f"{label}: {value!r} only in {file_a}")
        for value in sorted(only_b):
            click.echo(f"{label}: {value!r} only in {file_b}")
    if result.processing_count_by_kind_a != result.processing_count_by_kind_b:
        for kind in sorted(result.processing_count_by_kind_a):
            count_a = result.processing_count_by_kind_a[kind]
            count_b = result.processing_count_by_kind_b[kind]
            if count_a != count_b:
                click.echo(f"processings ({kind}): {count_a} vs {count_b}")
    if result.agreement_distribution_a != result.agreement_distribution_b:
        for form in sorted(result.agreement_distribution_a):
            count_a = result.agreement_distribution_a[form]
            count_b = result.agreement_distribution_b[form]
            if count_a != count_b:
                click.echo(f"purposes ({form}): {count_a} vs {count_b}")


@main.command()
@click.option("--taxonomy", is_flag=True, required=True, help="Taxonomy coverage report.")
@click.argument("file", type=click.Path(path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def report(taxonomy: bool, file: Path, fmt: str) -> None:
    """Analysis reports for a single policy document."""
    instance, _spans = _require_instance(file)
    obj = payloads.taxonomy_obj(instance)
    if fmt == "json":
        click.echo(payloads.dumps(obj), nl=False)
        return
    coverage = analysis.taxonomy_coverage(instance)
    for item in analysis.TaxonomyItem:
        entry = coverage.items[item]
        click.echo(f"{item.value}: {entry.status.value}")


@main.command()
@click.argument("directory", type=click.Path(path_type=Path, file_okay=False))
@click.option("--csv", "as_csv", is_flag=True, help="CSV output, one row per value.")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def stats(directory: Path, as_csv: bool, fmt: str) -> None:
    """Corpus statistics over every .ppm file under DIRECTORY."""
    if not directory.is_dir():
        raise _fail(f"{directory}: not a directory")
    instances: list[PolicyInstance] = []
    for path in sorted(directory.rglob("*.ppm")):
        result = _parse_file(path)
        if result.instance is None:
            for diag in result.diagnostics:
                click.echo(_render_parse_diag(path, diag), err=True)
            raise click.exceptions.Exit(2)
        instances.append(result.instance)
    corpus = analysis.corpus_stats(instances)
    if as_csv:
        click.echo(corpus.to_csv(), nl=False)
        return
    if fmt == "json":
        click.echo(payloads.dumps(payloads.stats_obj(corpus, len(instances))), nl=False)
        return
    for category in analysis.STAT_CATEGORIES:
        click.echo(f"{category}: {len(corpus.values[category])}")


@main.command()
@click.option("--listen", default=None, help="host:port (default 127.0.0.1:8642).")
@click.option("--store", "store_path", default=None, type=click.Path(path_type=Path))
def serve(listen: Optional[str], store_path: Optional[Path]) -> None:
    """Run the HTTP service."""
    from ppmkit import service

    try:
        service.serve(listen, str(store_path) if store_path else None)
    except ValueError as exc:
        raise _fail(str(exc))


def _open_store(store_path: Optional[Path]) -> PolicyStore:
    import os

    return PolicyStore(store_path or Path(os.environ.get("PPM_STORE", "store")))


def _parse_key(text: str) -> PolicyKey:
    vendor, sep, policy = text.partition("/")
    if not sep:
        raise _fail(f"key must be vendor/policy, got {text!r}")
    try:
        return PolicyKey(vendor, policy)
    except StoreError as exc:
        raise _fail(str(exc))


@main.command()
@click.argument("key")
@click.argument("file", type=click.Path(path_type=Path))
@click.option("--store", "store_path", default=None, type=click.Path(path_type=Path))
def put(key: str, file: Path, store_path: Optional[Path]) -> None:
    """Store FILE as a new version of vendor/policy KEY."""
    policy_key = _parse_key(key)
    instance, _spans = _require_instance(file)
    try:
        info = _open_store(store_path).put(policy_key, instance)
    except StoreError as exc:
        raise _fail(str(exc))
    click.echo(f"{policy_key} version {info.version} ({info.digest[:12]})")


@main.command()
@click.argument("key")
@click.option("--version", type=int, default=None)
@click.option("--store", "store_path", default=None, type=click.Path(path_type=Path))
def get(key: str, version: Optional[int], store_path: Optional[Path]) -> None:
    """Print a stored policy's canonical text."""
    policy_key = _parse_key(key)
    try:
        stored = _open_store(store_path).get(policy_key, version)
    except StoreError as exc:
        raise _fail(str(exc))
    click.echo(stored.text, nl=False)


@main.command(name="list")
@click.option("--store", "store_path", default=None, type=click.Path(path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def list_cmd(store_path: Optional[Path], fmt: str) -> None:
    """List stored policies with their latest versions."""
    entries = _open_store(store_path).list_policies()
    if fmt == "json":
        obj = payloads.listing_obj([(str(key), info) for key, info in entries])
        click.echo(payloads.dumps(obj), nl=False)
        return
    for key, info in entries:
        click.echo(f"{key}\t{info.version}\t{info.timestamp}")


if __name__ == "__main__":
    main()
