"""Worked examples stored as data files with expectations, and their runner.

A scenario file is UTF-8 text in sections::

    [kb]        knowledge-base text, as accepted by ``parse_kb_text``
    [new]       the New pattern, one line
    [compose]   optional; one Old pattern per line, added as rows in order
    [params]    optional ``key = value`` lines
    [expect]    one check per line: kind TAB arguments TAB tolerance TAB tag

Outside ``[kb]``, lines starting with ``;`` are comments.  A tolerance of
``-`` means exact comparison.  The tag records where the expected value
comes from (``golden``, ``derived``, ``trivial`` or ``ordering``).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

from .alignment import compose
from .encoding import decode_code, matched_region
from .engine import EngineParams, ScoredAlignment, build_alignments, score_alignment
from .errors import ICMAUSError, ScenarioError
from .knowledge import (
    KnowledgeBase,
    Pattern,
    compute_frequency_table,
    new_pattern,
    parse_kb_text,
    symbol_min_cost,
)
from .pairwise import SearchParams
from .probability import probability_report

SECTIONS = ("kb", "new", "compose", "params", "expect")
TAGS = ("golden", "derived", "trivial", "ordering")
PARAMS = {"beam", "max_alts", "iterations", "retained", "workers", "focus", "refine"}
SCENARIO_DIR = Path(__file__).with_name("scenarios")


@dataclass(frozen=True)
class Expectation:
    kind: str
    args: str
    tolerance: float | None
    tag: str
    line: int


@dataclass(frozen=True)
class Scenario:
    name: str
    kb_text: str
    new_text: str
    params: dict
    expectations: tuple[Expectation, ...]
    compose_rows: tuple[str, ...] = ()
    path: str | None = None

    @cached_property
    def kb(self) -> KnowledgeBase:
        return parse_kb_text(self.kb_text)

    @cached_property
    def new(self) -> Pattern:
        return new_pattern(self.new_text)

    def engine_params(self) -> EngineParams:
        p = self.params
        try:
            search = SearchParams(
                beam_width=int(p.get("beam", SearchParams.beam_width)),
                max_alternatives=int(p.get("max_alts", SearchParams.max_alternatives)),
            )
            return EngineParams(
                search=search,
                max_iterations=int(p.get("iterations", EngineParams.max_iterations)),
                max_retained=int(p.get("retained", EngineParams.max_retained)),
                workers=int(p.get("workers", 1)),
            )
        except ValueError as exc:
            raise ScenarioError(f"bad [params]: {exc}", self.path) from None

    @property
    def focus(self) -> list[str] | None:
        f = self.params.get("focus")
        return f.split() if f else None

    @property
    def refine(self) -> bool:
        return self.params.get("refine", "false").lower() in ("1", "true", "yes")


@dataclass(frozen=True)
class CheckResult:
    kind: str
    args: str
    tag: str
    passed: bool
    expected: str
    actual: str


@dataclass
class ScenarioResult:
    name: str
    checks: list[CheckResult] = field(default_factory=list)
    error: str | None = None
    seconds: float = 0.0

    @property
    def errored(self) -> bool:
        return self.error is not None

    @property
    def passed(self) -> bool:
        return not self.errored and all(c.passed for c in self.checks)


def _split_sections(text: str, path):
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]") and " " not in stripped:
            current = stripped[1:-1].lower()
            if current not in SECTIONS:
                raise ScenarioError(f"unknown section [{current}]", path, lineno)
            if current in sections:
                raise ScenarioError(f"section [{current}] repeated", path, lineno)
            sections[current] = []
            continue
        if current is None:
            if stripped and not stripped.startswith(";"):
                raise ScenarioError("text before the first section", path, lineno)
            continue
        sections[current].append((lineno, line))
    return sections


def _content(lines):
    return [(n, l.strip()) for n, l in lines if l.strip() and not l.strip().startswith(";")]


def parse_scenario(text: str, name: str = "scenario", path=None) -> Scenario:
    sections = _split_sections(text, path)
    for required in ("kb", "new"):
        if required not in sections:
            raise ScenarioError(f"missing [{required}] section", path, None)
    kb_text = "\n".join(l for _, l in sections["kb"])
    try:
        parse_kb_text(kb_text)
    except ICMAUSError as exc:
        raise ScenarioError(f"bad [kb]: {exc}", path, None) from exc
    new_lines = _content(sections["new"])
    if len(new_lines) != 1:
        raise ScenarioError("[new] must hold exactly one line", path, None)
    params = {}
    for lineno, line in _content(sections.get("params", [])):
        key, sep, value = line.partition("=")
        if not sep:
            raise ScenarioError(f"expected 'key = value', got {line!r}", path, lineno)
        params[key.strip()] = value.strip()
    expectations = []
    for lineno, line in sections.get("expect", []):
        if not line.strip() or line.strip().startswith(";"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ScenarioError("an expectation needs four tab-separated fields", path, lineno)
        kind, args, tol, tag = (p.strip() for p in parts)
        if kind not in CHECKS:
            raise ScenarioError(f"unknown check {kind!r}", path, lineno)
        if tag not in TAGS:
            raise ScenarioError(f"unknown provenance tag {tag!r}", path, lineno)
        try:
            tolerance = None if tol == "-" else float(tol)
        except ValueError:
            raise ScenarioError(f"bad tolerance {tol!r}", path, lineno) from None
        expectations.append(Expectation(kind, args, tolerance, tag, lineno))
    unknown = set(params) - PARAMS
    if unknown:
        raise ScenarioError(f"unknown parameter {sorted(unknown)[0]!r}", path, None)
    compose_rows = tuple(l for _, l in _content(sections.get("compose", [])))
    s = Scenario(
        name, kb_text, new_lines[0][1], params, tuple(expectations), compose_rows,
        str(path) if path else None,
    )
    s.engine_params()
    return s


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}", path, None) from exc
    return parse_scenario(text, path.stem, path)


def corpus_paths(directory=SCENARIO_DIR) -> list[Path]:
    return sorted(Path(directory).glob("*.scn"))


# checks


class _Context:
    """Lazily computed results shared by the checks of one scenario."""

    def __init__(self, s: Scenario):
        self.s = s
        self.kb = s.kb
        self.new = s.new
        self._alignments = None
        self._report = None
        self._composed = None

    @property
    def alignments(self) -> list[ScoredAlignment]:
        if self._alignments is None:
            self._alignments = build_alignments(self.new, self.kb, self.s.engine_params())
        return self._alignments

    @property
    def best(self) -> ScoredAlignment:
        if not self.alignments:
            raise ScenarioError("no alignments were formed")
        return self.alignments[0]

    @property
    def report(self):
        if self._report is None:
            self._report = probability_report(
                self.alignments, self.kb, self.s.focus, refine=self.s.refine
            )
        return self._report

    @property
    def composed(self) -> ScoredAlignment:
        if self._composed is None:
            rows = []
            for text in self.s.compose_rows:
                p = self.kb.find(text.split())
                if p is None:
                    raise ScenarioError(f"[compose] row {text!r} is not in the knowledge base")
                rows.append(p)
            table = compute_frequency_table(self.kb, self.new)
            a = compose(self.new, rows, table, self.s.engine_params().search)
            self._composed = score_alignment(a, self.kb)
        return self._composed


def _rows(sa: ScoredAlignment) -> list[str]:
    return sorted(p.text for p in sa.alignment.rows[1:])


def _row_list(args: str) -> list[str]:
    return sorted(" ".join(r.split()) for r in args.split("|"))


def _kv(args: str) -> tuple[str, float]:
    key, sep, value = args.rpartition("=")
    if not sep:
        raise ScenarioError(f"expected 'name = value', got {args!r}")
    return " ".join(key.split()), float(value)


def _close(actual: float, expected: float, tol) -> bool:
    if tol is None:
        return actual == expected
    return math.isclose(actual, expected, rel_tol=0.0, abs_tol=tol)


def _fmt(x) -> str:
    return f"{x:.5f}" if isinstance(x, float) else str(x)


def _numeric(actual, expected, tol):
    return _close(actual, expected, tol), _fmt(expected), _fmt(actual)


def _member(ctx, rank: int):
    rs, _ = ctx.report
    if not 1 <= rank <= len(rs.members):
        raise ScenarioError(f"reference set has {len(rs.members)} members, no rank {rank}")
    return rs.members[rank - 1]


def check_best_rows(ctx, args, tol):
    want = _row_list(args)
    got = _rows(ctx.best)
    return want == got, " | ".join(want), " | ".join(got)


def check_best_has_row(ctx, args, tol):
    want = " ".join(args.split())
    got = _rows(ctx.best)
    return want in got, want, " | ".join(got)


def check_ranked_rows(ctx, args, tol):
    rank, _, rows = args.partition("=")
    rank = int(rank)
    want = _row_list(rows)
    if rank > len(ctx.alignments):
        return False, " | ".join(want), f"only {len(ctx.alignments)} alignments"
    got = _rows(ctx.alignments[rank - 1])
    return want == got, " | ".join(want), " | ".join(got)


def check_best_projection(ctx, args, tol):
    want = " ".join(args.split())
    got = " ".join(ctx.best.projection())
    return want == got, want, got


def check_best_code(ctx, args, tol):
    want = " ".join(args.split())
    got = ctx.best.code.code_text
    return want == got, want, got


def check_best_contains(ctx, args, tol):
    syms = {s for p in ctx.best.alignment.rows[1:] for s in p.symbols}
    want = args.split()
    missing = [s for s in want if s not in syms]
    return not missing, " ".join(want), "missing " + " ".join(missing) if missing else "all present"


def check_decode_roundtrip(ctx, args, tol):
    sa = ctx.best
    want = " ".join(matched_region(sa.alignment))
    got = " ".join(decode_code(sa.code, ctx.kb))
    return want == got, want, got


def check_refset_size(ctx, args, tol):
    rs, _ = ctx.report
    return len(rs.members) == int(args), args, str(len(rs.members))


def check_refset_min_size(ctx, args, tol):
    rs, _ = ctx.report
    return len(rs.members) >= int(args), f">= {args}", str(len(rs.members))


def check_p_rel(ctx, args, tol):
    rank, value = _kv(args)
    _, report = ctx.report
    _member(ctx, int(rank))
    return _numeric(report.p_rel[int(rank) - 1], value, tol)


def check_p_abs(ctx, args, tol):
    rank, value = _kv(args)
    _, report = ctx.report
    _member(ctx, int(rank))
    return _numeric(report.p_abs[int(rank) - 1], value, tol)


def check_refined(ctx, args, tol):
    rank, value = _kv(args)
    _, report = ctx.report
    if report.refined is None:
        return False, _fmt(value), "no containment structure"
    _member(ctx, int(rank))
    return _numeric(report.refined[int(rank) - 1], value, tol)


def check_member_rows(ctx, args, tol):
    rank, _, rows = args.partition("=")
    want = _row_list(rows)
    got = _rows(_member(ctx, int(rank)))
    return want == got, " | ".join(want), " | ".join(got)


def check_member_has_row(ctx, args, tol):
    rank, _, row = args.partition("=")
    want = " ".join(row.split())
    got = _rows(_member(ctx, int(rank)))
    return want in got, want, " | ".join(got)


def check_members_have_row(ctx, args, tol):
    want = " ".join(args.split())
    rs, _ = ctx.report
    lacking = [i + 1 for i, m in enumerate(rs.members) if want not in _rows(m)]
    return not lacking, want, f"absent from members {lacking}" if lacking else "in every member"


def check_member_lacks(ctx, args, tol):
    rank, _, syms = args.partition("=")
    member = _member(ctx, int(rank))
    have = {s for p in member.alignment.rows[1:] for s in p.symbols}
    present = [s for s in syms.split() if s in have]
    return not present, "none of " + syms.strip(), "has " + " ".join(present) if present else "none"


def check_p_rel_decreasing(ctx, args, tol):
    _, report = ctx.report
    p = report.p_rel
    ok = all(a > b for a, b in zip(p, p[1:]))
    return ok, "strictly decreasing", " ".join(_fmt(x) for x in p)


def check_p_rel_sum(ctx, args, tol):
    _, report = ctx.report
    return _numeric(sum(report.p_rel), float(args), tol)


def check_symbol_prob(ctx, args, tol):
    sym, value = _kv(args)
    _, report = ctx.report
    return _numeric(report.symbols.get(sym, 0.0), value, tol)


def check_pattern_prob(ctx, args, tol):
    text, value = _kv(args)
    _, report = ctx.report
    return _numeric(report.patterns.get(text, 0.0), value, tol)


def check_symbol_greater(ctx, args, tol):
    a, _, b = args.partition(">")
    a, b = a.strip(), b.strip()
    _, report = ctx.report
    pa, pb = report.symbols.get(a, 0.0), report.symbols.get(b, 0.0)
    return pa > pb, f"p({a}) > p({b})", f"{_fmt(pa)} vs {_fmt(pb)}"


def check_min_cost(ctx, args, tol):
    sym, value = _kv(args)
    table = compute_frequency_table(ctx.kb, ctx.new)
    return _numeric(symbol_min_cost(table, sym), value, tol)


def check_best_cd_at_least(ctx, args, tol):
    return ctx.best.CD >= float(args), f">= {args}", _fmt(ctx.best.CD)


def check_composed_rows(ctx, args, tol):
    want = _row_list(args)
    got = _rows(ctx.composed)
    return want == got, " | ".join(want), " | ".join(got)


def check_composed_legal(ctx, args, tol):
    legal = ctx.composed.alignment.is_legal()
    want = args.strip().lower() == "true"
    return legal == want, str(want), str(legal)


def check_composed_vs_best(ctx, args, tol):
    """Relation between the composed alignment's CD and the engine's best."""
    c, b = ctx.composed.CD, ctx.best.CD
    op = args.strip()
    ok = {"<=": c <= b + 1e-9, ">=": c >= b - 1e-9, "==": abs(c - b) <= (tol or 1e-9)}[op]
    return ok, f"composed {op} best", f"{_fmt(c)} vs {_fmt(b)}"


def check_runs(ctx, args, tol):
    n = len(ctx.alignments)
    return True, "runs", f"{n} alignments"


CHECKS = {
    "best_rows": check_best_rows,
    "best_has_row": check_best_has_row,
    "ranked_rows": check_ranked_rows,
    "best_projection": check_best_projection,
    "best_code": check_best_code,
    "best_contains": check_best_contains,
    "decode_roundtrip": check_decode_roundtrip,
    "refset_size": check_refset_size,
    "refset_min_size": check_refset_min_size,
    "p_rel": check_p_rel,
    "p_abs": check_p_abs,
    "refined": check_refined,
    "member_rows": check_member_rows,
    "member_has_row": check_member_has_row,
    "members_have_row": check_members_have_row,
    "member_lacks": check_member_lacks,
    "p_rel_decreasing": check_p_rel_decreasing,
    "p_rel_sum": check_p_rel_sum,
    "symbol_prob": check_symbol_prob,
    "pattern_prob": check_pattern_prob,
    "symbol_greater": check_symbol_greater,
    "min_cost": check_min_cost,
    "best_cd_at_least": check_best_cd_at_least,
    "composed_rows": check_composed_rows,
    "composed_legal": check_composed_legal,
    "composed_vs_best": check_composed_vs_best,
    "runs": check_runs,
}


def run_scenario(s: Scenario) -> ScenarioResult:
    """Evaluate every expectation.

    An engine failure marks the scenario as errored rather than failed.
    """
    result = ScenarioResult(s.name)
    start = time.perf_counter()
    try:
        ctx = _Context(s)
        ctx.alignments  # build once so errors surface here
        for e in s.expectations:
            try:
                ok, expected, actual = CHECKS[e.kind](ctx, e.args, e.tolerance)
            except ScenarioError as exc:
                ok, expected, actual = False, e.args, f"check failed: {exc}"
            result.checks.append(CheckResult(e.kind, e.args, e.tag, bool(ok), expected, actual))
    except ICMAUSError as exc:
        result.error = f"{type(exc).__name__}: {exc}"
    result.seconds = time.perf_counter() - start
    return result


def run_corpus(directory=SCENARIO_DIR, workers: int = 1) -> list[ScenarioResult]:
    scenarios = [load_scenario(p) for p in corpus_paths(directory)]
    if workers <= 1:
        return [run_scenario(s) for s in scenarios]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_scenario, scenarios))


__all__ = [
    "Scenario",
    "Expectation",
    "CheckResult",
    "ScenarioResult",
    "CHECKS",
    "parse_scenario",
    "load_scenario",
    "run_scenario",
    "run_corpus",
    "corpus_paths",
    "SCENARIO_DIR",
]
