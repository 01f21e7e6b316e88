"""Encoding an alignment as a compressed description of New.

Each Old row is charged for the symbols that identify its pattern, less the
symbols already known from rows decoded before it, plus its first and last
symbols when those are unmatched (they mark where the row starts and ends).
Identifying symbols are drawn from the row's unmatched symbols where
possible, then from symbols not matched against New, then from any.
New symbols inside the matched span that no Old row explains are sent as
literals.  Raw New symbols are priced at ``NEW_COST_FACTOR`` times their
minimum cost, the price of sending them without a model.
"""

from __future__ import annotations

from dataclasses import dataclass

from .alignment import Alignment
from .errors import DecodeError, LegalityError
from .knowledge import FrequencyTable, KnowledgeBase

NEW_COST_FACTOR = 2.5


@dataclass(frozen=True)
class RowKey:
    """What the decoder needs to rebuild one Old row's part of New."""

    symbols: tuple[str, ...]
    # (position in the row's pattern, offset within the New span)
    new_links: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class AlignmentCode:
    symbols: tuple[str, ...]
    L: float
    CD: float
    B_new: float
    span: tuple[int, int] | None
    literals: tuple[tuple[int, str], ...] = ()
    row_costs: tuple[float, ...] = ()
    row_keys: tuple[RowKey, ...] = ()

    @property
    def code_text(self) -> str:
        return " ".join(self.symbols)


def containers(a: Alignment, r: int) -> list[int]:
    """Rows whose matched extent encloses row ``r`` and that share a column.

    With equal extents the longer pattern (then the earlier row) encloses.
    """
    lo, hi = a.row_extent(r)
    out = []
    for q in range(1, len(a.rows)):
        if q == r or not a.shares_column(q, r):
            continue
        qlo, qhi = a.row_extent(q)
        if not (qlo <= lo and hi <= qhi):
            continue
        if (qlo, qhi) == (lo, hi):
            lq, lr = len(a.rows[q]), len(a.rows[r])
            if lq < lr or (lq == lr and q > r):
                continue
        out.append(q)
    return out


def decode_order(a: Alignment) -> list[int]:
    """Old rows in the order a decoder rebuilds them.

    Rows whose extent encloses another come first; otherwise left to right.
    Among rows with equal extents the longer pattern leads.
    """
    def key(r):
        lo, hi = a.row_extent(r)
        return (lo, -hi, -len(a.rows[r]), r)

    return sorted(range(1, len(a.rows)), key=key)


def implied_map(a: Alignment) -> dict[int, frozenset[int]]:
    """Per Old row, positions already known from rows decoded before it."""
    known: set[int] = set()
    out = {}
    for r in decode_order(a):
        cols = a.row_columns(r)
        out[r] = frozenset(i for i, c in enumerate(cols) if c in known)
        known.update(cols)
    return out


def implied_positions(a: Alignment, r: int) -> frozenset[int]:
    return implied_map(a)[r]


def _has_new(a, c):
    return any(r == 0 for r, _ in a.columns[c])


def row_code_positions(a, r, kb, table, implied=None) -> tuple:
    p = a.rows[r]
    if implied is None:
        implied = implied_positions(a, r)
    cols = a.row_columns(r)
    unmatched = [i for i, c in enumerate(cols) if not a.is_matched(c)]
    unlinked = [i for i, c in enumerate(cols) if not _has_new(a, c)]
    ident = kb.identification_code(p, table, (), (unmatched, unlinked))
    positions = set(ident.positions) - implied
    if not positions:
        # the context gives the whole code away; still send one symbol
        pool = [i for i in range(len(p)) if i not in implied] or range(len(p))
        positions = {min(pool, key=lambda i: (round(table.cost(p[i]), 9), i))}
    for end in (0, len(p) - 1):
        if not a.is_matched(cols[end]):
            positions.add(end)
    return tuple(sorted(positions)), implied


def encode_alignment(
    a: Alignment,
    kb: KnowledgeBase,
    table: FrequencyTable,
    new_cost_factor: float = NEW_COST_FACTOR,
) -> AlignmentCode:
    span = a.new_span()
    placed = []  # (column, symbol, cost)
    row_costs = []
    row_keys = []
    lo = span[0] if span else 0
    implied_of = implied_map(a)
    for r in range(1, len(a.rows)):
        p = a.rows[r]
        code_pos, implied = row_code_positions(a, r, kb, table, implied_of[r])
        cols = a.row_columns(r)
        cost = 0.0
        for i in code_pos:
            c = table.cost(p[i])
            cost += c
            placed.append((cols[i], p[i], c))
        row_costs.append(cost)
        key_pos = sorted(set(code_pos) | implied)
        links = []
        for i, c in enumerate(cols):
            for rr, pos in a.columns[c]:
                if rr == 0:
                    links.append((i, pos - lo))
        row_keys.append(RowKey(tuple(p[i] for i in key_pos), tuple(links)))

    literals = []
    literal_cost = 0.0
    b_new = 0.0
    if span:
        new = a.new
        for i in range(span[0], span[1] + 1):
            raw = new_cost_factor * table.cost(new[i])
            b_new += raw
            if not a.is_matched(a.column_of(0, i)):
                literals.append((i - lo, new[i]))
                literal_cost += raw
    placed.sort(key=lambda t: t[0])
    L = sum(t[2] for t in placed) + literal_cost
    return AlignmentCode(
        symbols=tuple(t[1] for t in placed),
        L=L,
        CD=b_new - L,
        B_new=b_new,
        span=span,
        literals=tuple(literals),
        row_costs=tuple(row_costs),
        row_keys=tuple(row_keys),
    )


def decode_code(code: AlignmentCode, kb: KnowledgeBase) -> tuple[str, ...]:
    """Rebuild the matched region of New from a code."""
    size = 0
    if code.span is not None:
        size = code.span[1] - code.span[0] + 1
    for off, _ in code.literals:
        size = max(size, off + 1)
    out: list[str | None] = [None] * size
    for off, s in code.literals:
        out[off] = s
    for key in code.row_keys:
        p = kb.identify(key.symbols)
        if p is None:
            raise DecodeError(f"key {' '.join(key.symbols)!r} does not identify a pattern")
        for pos, off in key.new_links:
            if not (0 <= pos < len(p) and 0 <= off < size):
                raise DecodeError(f"link {(pos, off)} out of range")
            if out[off] is not None and out[off] != p[pos]:
                raise DecodeError(f"conflicting symbols at offset {off}")
            out[off] = p[pos]
    if any(s is None for s in out):
        raise DecodeError("code leaves part of the span undetermined")
    return tuple(out)


def matched_region(a: Alignment) -> tuple[str, ...]:
    span = a.new_span()
    if span is None:
        return ()
    return a.new.symbols[span[0] : span[1] + 1]


def check_encodable(a: Alignment) -> None:
    if not a.is_legal():
        raise LegalityError("alignment is not legal")
