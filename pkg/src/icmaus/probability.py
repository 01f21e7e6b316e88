"""Absolute and relative probabilities of alignments, patterns and symbols.

An alignment whose code is L bits long has absolute probability 2^-L.
Alignments are compared only with others that encode exactly the same New
symbols (the reference set); relative probabilities normalize within it.
"""

from __future__ import annotations

import math

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .alignment import Alignment
from .encoding import encode_alignment
from .engine import ScoredAlignment
from .errors import EmptyReferenceSetError, LegalityError
from .knowledge import ALPHABET_SIZE, KnowledgeBase, compute_frequency_table, is_subsequence


def absolute_probability(code_or_L) -> float:
    L = getattr(code_or_L, "L", code_or_L)
    if L < 0:
        raise ValueError("code length must be non-negative")
    return float(ALPHABET_SIZE) ** (-L)


@dataclass(frozen=True)
class ReferenceSet:
    reference_positions: tuple[int, ...]
    members: tuple[ScoredAlignment, ...]

    @property
    def reference_symbols(self) -> tuple[str, ...]:
        if not self.members:
            return ()
        new = self.members[0].alignment.new
        return tuple(new[i] for i in self.reference_positions)

    @property
    def p_abs(self) -> tuple[float, ...]:
        return tuple(absolute_probability(m.code) for m in self.members)

    @property
    def p_sum(self) -> float:
        return sum(self.p_abs)

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class ProbabilityReport:
    p_abs: tuple[float, ...]
    p_rel: tuple[float, ...]
    # keyed by pattern text, then by symbol
    patterns: dict = field(default_factory=dict)
    symbols: dict = field(default_factory=dict)
    refined: tuple[float, ...] | None = None


def _redundant_rows(a: Alignment) -> list[int]:
    out = []
    for r in range(1, len(a.rows)):
        for q in range(1, len(a.rows)):
            if q != r and is_subsequence(a.rows[r].symbols, a.rows[q].symbols):
                out.append(r)
                break
    return out


def _prune(sa: ScoredAlignment, kb, table) -> ScoredAlignment:
    """Drop rows whose symbols another row already shows, when harmless."""
    a = sa.alignment
    changed = True
    while changed:
        changed = False
        for r in _redundant_rows(a):
            try:
                b = a.without_row(r)
            except LegalityError:
                continue
            if b.matched_new_positions() != a.matched_new_positions() or not b.is_legal():
                continue
            a = b
            changed = True
            break
    if a is sa.alignment:
        return sa
    return ScoredAlignment(a, encode_alignment(a, kb, table))


def build_reference_set(
    alignments: Sequence[ScoredAlignment],
    kb: KnowledgeBase,
    focus: Iterable[str] | None = None,
) -> ReferenceSet:
    """Alignments encoding exactly the reference symbols of New.

    Without ``focus`` the reference symbols are those the first (best)
    alignment encodes.  With ``focus`` they are the New positions holding
    a focus symbol.
    """
    if not alignments:
        raise EmptyReferenceSetError("no alignments to choose from")
    new = alignments[0].alignment.new
    if focus is not None:
        focus = set(focus)
        ref = tuple(i for i, s in enumerate(new) if s in focus)
    else:
        ref = alignments[0].alignment.matched_new_positions()
    table = compute_frequency_table(kb, new)
    members = []
    seen = set()
    for sa in alignments:
        if sa.alignment.matched_new_positions() != ref:
            continue
        sa = _prune(sa, kb, table)
        k = sa.alignment.key()
        if k in seen:
            continue
        seen.add(k)
        members.append(sa)
    if not members:
        raise EmptyReferenceSetError(
            f"no alignment encodes exactly {' '.join(new[i] for i in ref)!r}"
        )
    return ReferenceSet(ref, tuple(members))


def relative_probabilities(rs: ReferenceSet) -> ProbabilityReport:
    p_abs = rs.p_abs
    total = sum(p_abs)
    return ProbabilityReport(p_abs, tuple(p / total for p in p_abs))


def _old_patterns(sa):
    return {p.text for p in sa.alignment.rows[1:]}


def _old_symbols(sa):
    return {s for p in sa.alignment.rows[1:] for s in p.symbols}


def pattern_and_symbol_probabilities(
    rs: ReferenceSet, report: ProbabilityReport
) -> ProbabilityReport:
    """Aggregate alignment probabilities onto patterns and symbol types.

    A pattern or symbol scores the summed relative probability of the
    alignments it appears in, each alignment counted once.  Symbols seen in
    New score 1.0.
    """
    patterns: dict[str, list[float]] = {}
    symbols: dict[str, list[float]] = {}
    for sa, p in zip(rs.members, report.p_rel):
        for t in _old_patterns(sa):
            patterns.setdefault(t, []).append(p)
        for s in _old_symbols(sa):
            symbols.setdefault(s, []).append(p)
    patterns = {t: math.fsum(ps) for t, ps in patterns.items()}
    symbols = {s: math.fsum(ps) for s, ps in symbols.items()}
    if rs.members:
        for s in rs.members[0].alignment.new.symbols:
            symbols[s] = 1.0
    return replace(report, patterns=_clip(patterns), symbols=_clip(symbols))


def _clip(d):
    # float sums may overshoot 1 by an ulp
    return {k: min(v, 1.0) for k, v in sorted(d.items(), key=lambda kv: (-kv[1], kv[0]))}


def _contains(big: ScoredAlignment, small: ScoredAlignment) -> bool:
    """True when ``big`` keeps every row and matched column of ``small``."""
    if len(big.alignment.rows) <= len(small.alignment.rows):
        return False
    bk = set(big.alignment.key())
    small_cols = small.alignment.key()
    pats_big = [p.text for p in big.alignment.rows[1:]]
    for p in small.alignment.rows[1:]:
        if p.text not in pats_big:
            return False
        pats_big.remove(p.text)
    # every matched column of the smaller alignment must survive, possibly
    # with more cells
    for label in small_cols:
        if len(label) < 2:
            continue
        if not any(set(label) <= set(other) for other in bk):
            return False
    return True


def containment_refinement(rs: ReferenceSet, report: ProbabilityReport) -> ProbabilityReport:
    """Share probability only among the extensions of a contained member.

    If some member is contained in others, its extensions are renormalized
    among themselves.  Patterns and symbols of the base keep their
    unrefined values; the rest are re-aggregated over the extensions.
    """
    n = len(rs.members)
    for b in range(n):
        ext = [e for e in range(n) if e != b and _contains(rs.members[e], rs.members[b])]
        if ext:
            break
    else:
        return report
    total = sum(report.p_rel[e] for e in ext)
    refined = [0.0] * n
    for e in ext:
        refined[e] = report.p_rel[e] / total
    base = rs.members[b]
    base_patterns = _old_patterns(base)
    base_symbols = _old_symbols(base) | set(base.alignment.new.symbols)
    patterns = {t: v for t, v in report.patterns.items() if t in base_patterns}
    symbols = {s: v for s, v in report.symbols.items() if s in base_symbols}
    for e in ext:
        sa = rs.members[e]
        for t in _old_patterns(sa) - base_patterns:
            patterns[t] = patterns.get(t, 0.0) + refined[e]
        for s in _old_symbols(sa) - base_symbols:
            symbols[s] = symbols.get(s, 0.0) + refined[e]
    return replace(
        report, patterns=_clip(patterns), symbols=_clip(symbols), refined=tuple(refined)
    )


def probability_report(
    alignments: Sequence[ScoredAlignment],
    kb: KnowledgeBase,
    focus: Iterable[str] | None = None,
    refine: bool = False,
) -> tuple[ReferenceSet, ProbabilityReport]:
    rs = build_reference_set(alignments, kb, focus)
    report = pattern_and_symbol_probabilities(rs, relative_probabilities(rs))
    if refine:
        report = containment_refinement(rs, report)
    return rs, report
