"""Command-line front end.

Exit codes: 0 success, 1 user error, 2 I/O error, 3 internal invariant
violation.  Results go to standard output, diagnostics to standard error.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .alignment import compose
from .engine import EngineParams, ScoredAlignment, build_alignments, score_alignment
from .errors import (
    EmptyReferenceSetError,
    ICMAUSError,
    KBParseError,
    KBValidationError,
    ScenarioError,
)
from .knowledge import KnowledgeBase, compute_frequency_table, new_pattern, parse_kb_text
from .pairwise import SearchParams
from .probability import probability_report
from .render import render_alignment_ascii
from .scenarios import SCENARIO_DIR, load_scenario, run_scenario

EXIT_OK, EXIT_USER, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3


class Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise Failure(EXIT_IO, f"cannot read {path}: {exc}") from None


def _load_kb(path: str) -> KnowledgeBase:
    text = _read(path)
    try:
        return parse_kb_text(text)
    except (KBParseError, KBValidationError) as exc:
        raise Failure(EXIT_USER, f"{path}: {exc}") from None


def _new(text, new_file):
    if (text is None) == (new_file is None):
        raise Failure(EXIT_USER, "give New either as an argument or with --new-file")
    if new_file is not None:
        text = _read(new_file)
    symbols = text.split()
    if not symbols:
        raise Failure(EXIT_USER, "New is empty")
    return new_pattern(symbols)


def _params(beam, max_alts, iterations, workers=1) -> EngineParams:
    try:
        search = SearchParams(beam_width=beam, max_alternatives=max_alts)
        return EngineParams(search=search, max_iterations=iterations, workers=workers)
    except ValueError as exc:
        raise Failure(EXIT_USER, f"invalid parameters: {exc}") from None


def _name(sa: ScoredAlignment) -> str:
    return " | ".join(p.text for p in sa.alignment.rows[1:])


def _emit_tabular(rows):
    for kind, name, value in rows:
        click.echo(f"{kind}\t{name}\t{value:.5f}")


def _show(sa: ScoredAlignment, rank: int, extra: str = ""):
    click.echo(f"#{rank}  CD {sa.CD:.2f}  L {sa.L:.2f}{extra}")
    click.echo(render_alignment_ascii(sa.alignment))


def search_options(f):
    f = click.option("--iterations", default=EngineParams.max_iterations, show_default=True,
                     help="Maximum number of build stages.")(f)
    f = click.option("--max-alts", default=SearchParams.max_alternatives, show_default=True,
                     help="Alternatives kept per search state.")(f)
    f = click.option("--beam", default=SearchParams.beam_width, show_default=True,
                     help="Beam width of the pairwise search.")(f)
    f = click.option("--new-file", type=str, default=None, help="Read New from a file.")(f)
    f = click.option("--format", "fmt", type=click.Choice(["human", "tabular"]),
                     default="human", show_default=True)(f)
    f = click.argument("new", required=False)(f)
    return click.argument("kb")(f)


@click.group()
def cli():
    """Multiple alignment, compression and probability over pattern knowledge bases."""


@cli.command()
@click.argument("kb")
def validate(kb):
    """Check that a knowledge-base file parses and is well formed."""
    k = _load_kb(kb)
    click.echo(f"{len(k)} patterns, {len(k.symbol_types())} symbol types")


@cli.command()
@search_options
@click.option("--top", default=5, show_default=True, help="How many alignments to show.")
def align(kb, new, fmt, new_file, beam, max_alts, iterations, top):
    """Build and rank alignments without probabilities."""
    k = _load_kb(kb)
    found = build_alignments(_new(new, new_file), k, _params(beam, max_alts, iterations))
    if not found:
        click.echo("no alignments")
        return
    if fmt == "tabular":
        _emit_tabular(("cd", _name(sa), sa.CD) for sa in found[:top])
        return
    for i, sa in enumerate(found[:top], start=1):
        _show(sa, i)


@cli.command()
@search_options
@click.option("--refine", is_flag=True, help="Apply the containment refinement.")
@click.option("--focus", default=None, help='Reference symbols, e.g. "sym1 sym2".')
def infer(kb, new, fmt, new_file, beam, max_alts, iterations, refine, focus):
    """Rank alignments and report alignment, pattern and symbol probabilities."""
    k = _load_kb(kb)
    found = build_alignments(_new(new, new_file), k, _params(beam, max_alts, iterations))
    if not found:
        click.echo("no alignments")
        return
    try:
        rs, report = probability_report(found, k, focus.split() if focus else None, refine)
    except EmptyReferenceSetError as exc:
        raise Failure(EXIT_USER, str(exc)) from None
    if fmt == "tabular":
        rows = [("alignment", _name(sa), p) for sa, p in zip(rs.members, report.p_rel)]
        if report.refined is not None:
            rows += [("refined", _name(sa), p) for sa, p in zip(rs.members, report.refined)]
        rows += [("pattern", t, p) for t, p in report.patterns.items()]
        rows += [("symbol", s, p) for s, p in report.symbols.items()]
        _emit_tabular(rows)
        return
    click.echo(f"reference symbols: {' '.join(rs.reference_symbols)}\n")
    for i, sa in enumerate(rs.members):
        extra = f"  p_ABS {report.p_abs[i]:.5g}  p_REL {report.p_rel[i]:.5f}"
        if report.refined is not None:
            extra += f"  refined {report.refined[i]:.5f}"
        _show(sa, i + 1, extra)
    click.echo("patterns")
    for t, p in report.patterns.items():
        click.echo(f"  {t} {p:.5f}")
    click.echo("symbols")
    for s, p in report.symbols.items():
        click.echo(f"  {s} {p:.5f}")


@cli.command("compose")
@click.argument("kb")
@click.argument("new")
@click.option("--row", "rows", multiple=True, required=True,
              help="An Old pattern's symbols; repeat to add rows in order.")
def compose_cmd(kb, new, rows):
    """Score an alignment built from the given rows."""
    k = _load_kb(kb)
    n = _new(new, None)
    patterns = []
    for text in rows:
        p = k.find(text.split())
        if p is None:
            raise Failure(EXIT_USER, f"row {text!r} is not in the knowledge base")
        patterns.append(p)
    a = compose(n, patterns, compute_frequency_table(k, n))
    if not a.is_legal():
        raise Failure(EXIT_USER, "the rows do not form a legal alignment")
    _show(score_alignment(a, k), 1)


@cli.group()
def scenarios():
    """The corpus of worked examples."""


@scenarios.command("run")
@click.argument("paths", nargs=-1)
def scenarios_run(paths):
    """Run scenario files (default: the shipped corpus)."""
    files = [Path(p) for p in paths] or sorted(SCENARIO_DIR.glob("*.scn"))
    failed = 0
    for f in files:
        if not f.is_file():
            raise Failure(EXIT_IO, f"cannot read {f}")
        try:
            s = load_scenario(f)
        except ScenarioError as exc:
            raise Failure(EXIT_USER, str(exc)) from None
        r = run_scenario(s)
        status = "ERROR" if r.errored else "PASS" if r.passed else "FAIL"
        click.echo(f"{status}  {r.name}  ({r.seconds:.2f}s)")
        if r.errored:
            click.echo(f"    {r.error}")
        for c in r.checks:
            if not c.passed:
                click.echo(f"    {c.kind} {c.args}: expected {c.expected}, got {c.actual}")
        failed += not r.passed
    click.echo(f"{len(files) - failed}/{len(files)} scenarios passed")
    if failed:
        raise Failure(EXIT_USER, f"{failed} scenario(s) did not pass")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="icmaus", standalone_mode=False)
    except Failure as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.code
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        return EXIT_USER
    except click.ClickException as exc:
        exc.show()
        return EXIT_USER
    except ICMAUSError as exc:
        # user input was validated up front, so anything left is ours
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        return EXIT_INTERNAL
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
