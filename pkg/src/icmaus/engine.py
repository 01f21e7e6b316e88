"""The build cycle: grow multiple alignments one Old row at a time.

Stage one aligns New with every Old pattern.  Each later stage takes the
best alignments found so far, treats each as a partially ordered driver and
aligns it with every Old pattern again, adding one row.  An added row must
earn its place (see ``_earns_keep``).  Only legal alignments are kept.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from dataclasses import dataclass, field

from .alignment import Alignment, extension_candidates, project_alignment
from .encoding import AlignmentCode, containers, encode_alignment
from .errors import ContractError, LegalityError
from .knowledge import KnowledgeBase, Pattern, compute_frequency_table
from .pairwise import SearchParams

_EPS = 1e-9


@dataclass(frozen=True)
class EngineParams:
    search: SearchParams = field(default_factory=SearchParams)
    max_iterations: int = 6
    max_retained: int = 16
    workers: int = 1

    def __post_init__(self):
        if self.max_iterations < 1 or self.max_retained < 1 or self.workers < 1:
            raise ValueError("engine parameters must be positive")


@dataclass(frozen=True)
class ScoredAlignment:
    alignment: Alignment
    code: AlignmentCode

    @property
    def CD(self) -> float:
        return self.code.CD

    @property
    def L(self) -> float:
        return self.code.L

    def projection(self) -> tuple[str, ...]:
        return self.alignment.column_symbols


def _rank_key(sa: ScoredAlignment):
    return (-round(sa.CD, 9), sa.projection(), sa.alignment.key())


def _links(a: Alignment, q: int) -> tuple[int, int]:
    """Hits of row ``q`` on columns holding New, and on the others."""
    to_new = to_old = 0
    for c in a.row_columns(q):
        cells = a.columns[c]
        if len(cells) < 2:
            continue
        if any(r == 0 for r, _ in cells):
            to_new += 1
        else:
            to_old += 1
    return to_new, to_old


def _is_inference(a: Alignment, q: int) -> bool:
    """Row ``q`` adds knowledge rather than another reading of New.

    Such a row is joined more to Old rows than to New, and either touches
    no New symbol at all or specializes a row it sits inside.
    """
    to_new, to_old = _links(a, q)
    return to_new <= to_old and (to_new == 0 or bool(containers(a, q)))


def _rival_rows(a: Alignment) -> bool:
    """Two rows claim the same New symbol without one refining the other.

    Rows sharing a New column must nest: one lies inside the other, or both
    lie inside a common row.  A nested row must also be joined more to Old
    rows than to New, as a refinement is.
    """
    inside = {}
    for q in range(1, len(a.rows)):
        to_new, to_old = _links(a, q)
        inside[q] = set(containers(a, q)) if to_new <= to_old else set()
    for c in a.row_columns(0):
        rows = sorted(r for r, _ in a.columns[c] if r != 0)
        for i, q in enumerate(rows):
            for r in rows[i + 1 :]:
                if q in inside[r] or r in inside[q] or inside[q] & inside[r]:
                    continue
                return True
    return False


def _core_cd(child: ScoredAlignment, kb, table) -> float:
    """CD of ``child`` without the inference rows that explain no New symbol.

    Such rows cost bits by design, so they should not make the rows that do
    explain New look unprofitable.
    """
    a = child.alignment
    covered = a.matched_new_positions()
    core = a
    for q in range(len(a.rows) - 1, 0, -1):
        if not _is_inference(a, q):
            continue
        try:
            rest = core.without_row(q)
        except (ContractError, LegalityError):
            continue
        if rest.is_legal() and rest.matched_new_positions() == covered:
            core = rest
    if core is a:
        return child.CD
    return encode_alignment(core, kb, table).CD


def _rest_summary(a: Alignment, rows, kb, table):
    """Coverage and CD of ``a`` without ``rows``, or None if that is unusable."""
    if rows:
        try:
            a = a.without_rows(rows)
        except (ContractError, LegalityError):
            return None
    if not a.is_legal() or not a.matched_new_positions():
        return None
    return a.matched_new_positions(), encode_alignment(a, kb, table).CD


def _earns_keep(
    child: ScoredAlignment, kb, table, core_cd: float, parent: Alignment | None = None
) -> bool:
    """Whether every group of Old rows in ``child`` pays its way.

    Dropping rows gives a smaller alignment.  If that explains less of New
    and still compresses at least as well, the dropped rows bought coverage
    at a loss.  If it explains the same and compresses at least as well,
    the dropped rows must be inferences (see ``_is_inference``).  Coverage
    is priced against ``core_cd`` (see ``_core_cd``).  Rows that compete
    for New symbols (see ``_rival_rows``) are never kept.
    """
    a = child.alignment
    n = len(a.rows) - 1
    if n < 2:
        return True
    if _rival_rows(a):
        return False
    covered = a.matched_new_positions()
    inference = [False] + [_is_inference(a, q) for q in range(1, n + 1)]
    for drop in range(1, n):
        for rows in combinations(range(1, n + 1), drop):
            if parent is not None and rows[-1] == n:
                # same as a subset of the parent, shared by its siblings
                memo = parent.__dict__.get("_rest_memo")
                if memo is None:
                    memo = {}
                    object.__setattr__(parent, "_rest_memo", memo)
                key = rows[:-1]
                if key not in memo:
                    memo[key] = _rest_summary(parent, key, kb, table)
                summary = memo[key]
            else:
                summary = _rest_summary(a, rows, kb, table)
            if summary is None:
                continue
            rest_covered, cd = summary
            if rest_covered != covered:
                if cd >= core_cd - _EPS:
                    return False
            elif cd >= child.CD - _EPS and not all(inference[q] for q in rows):
                return False
    return True


def admissible(sa: ScoredAlignment, kb: KnowledgeBase, table) -> bool:
    """Whether the engine may report ``sa``: every Old row earns its keep."""
    return _earns_keep(sa, kb, table, _core_cd(sa, kb, table))


def _dominated(sa: ScoredAlignment, core_cd: float, seen: dict) -> bool:
    """Whether an alignment of fewer patterns already does at least as well.

    ``seen`` maps sorted pattern ids to (New coverage, CD) pairs.  The test
    mirrors ``_earns_keep`` but compares with the best placement found for
    the smaller set of patterns, not only with rows removed in place.
    """
    a = sa.alignment
    n = len(a.rows) - 1
    ids = [a.rows[q].id for q in range(1, n + 1)]
    covered = frozenset(a.matched_new_positions())
    inference = [_is_inference(a, q) for q in range(1, n + 1)]
    tried = set()
    for size in range(1, n):
        for keep in combinations(range(n), size):
            sub = tuple(sorted(ids[i] for i in keep))
            if sub in tried:
                continue
            tried.add(sub)
            dropped_ok = all(inference[i] for i in range(n) if i not in keep)
            for cov, cd in seen.get(sub, ()):
                if not cov <= covered:
                    continue
                if cov != covered:
                    if cd >= core_cd - _EPS:
                        return True
                elif cd >= sa.CD - _EPS and not dropped_ok:
                    return True
    return False


def _extend_one(parent, pattern, kb, table, search):
    out = []
    a = parent.alignment
    for hits in extension_candidates(a, pattern, table, search):
        if not hits:
            continue
        try:
            child = a.extend(pattern, hits)
        except ContractError:
            continue
        if not child.is_legal():
            continue
        if not any(child.is_matched(c) for c in child.row_columns(len(a.rows))):
            continue
        sa = ScoredAlignment(child, encode_alignment(child, kb, table))
        core_cd = _core_cd(sa, kb, table)
        if parent.alignment.rows[1:] and not _earns_keep(sa, kb, table, core_cd, a):
            continue
        out.append((sa, core_cd))
    return out


def build_alignments(
    new: Pattern, kb: KnowledgeBase, params: EngineParams = EngineParams()
) -> list[ScoredAlignment]:
    """All legal alignments found for ``new``, best compression first."""
    if len(new) == 0:
        raise ContractError("New is empty")
    table = compute_frequency_table(kb, new)
    root = ScoredAlignment(Alignment.single(new), encode_alignment(Alignment.single(new), kb, table))
    found: dict[tuple, ScoredAlignment] = {}
    seen: dict[tuple, list] = {}
    expanded: set[tuple] = set()
    frontier = [root]
    retained_keys = None
    with ThreadPoolExecutor(max_workers=params.workers) if params.workers > 1 else _Serial() as pool:
        for _ in range(params.max_iterations):
            jobs = [(parent, p) for parent in frontier for p in kb.patterns]
            results = pool.map(
                lambda job: _extend_one(job[0], job[1], kb, table, params.search), jobs
            )
            # merge in job order so the outcome does not depend on scheduling
            for batch in results:
                for sa, core_cd in batch:
                    k = sa.alignment.key()
                    if k in found or _dominated(sa, core_cd, seen):
                        continue
                    found[k] = sa
                    ids = tuple(sorted(sa.alignment.row_pattern_ids()))
                    cover = frozenset(sa.alignment.matched_new_positions())
                    seen.setdefault(ids, []).append((cover, sa.CD))
            for parent in frontier:
                expanded.add(parent.alignment.key())
            ranked = sorted(found.values(), key=_rank_key)
            retained = ranked[: params.max_retained]
            keys = tuple(sa.alignment.key() for sa in retained)
            if keys == retained_keys:
                break
            retained_keys = keys
            frontier = [sa for sa in retained if sa.alignment.key() not in expanded]
            if not frontier:
                break
    return sorted(found.values(), key=_rank_key)


class _Serial:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False

    def map(self, fn, items):
        return map(fn, items)


def best_alignment(new, kb, params=EngineParams()) -> ScoredAlignment | None:
    result = build_alignments(new, kb, params)
    return result[0] if result else None


def score_alignment(a: Alignment, kb: KnowledgeBase) -> ScoredAlignment:
    table = compute_frequency_table(kb, a.new)
    return ScoredAlignment(a, encode_alignment(a, kb, table))


__all__ = [
    "EngineParams",
    "admissible",
    "ScoredAlignment",
    "build_alignments",
    "best_alignment",
    "score_alignment",
    "project_alignment",
]
