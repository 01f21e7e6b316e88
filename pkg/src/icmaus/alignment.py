"""Multiple alignments: rows of pattern appearances over ordered columns.

Row 0 is always New.  A column holds one symbol instance from each of a
subset of rows, all carrying the same symbol.  Each row's own order induces
a precedence relation between columns; a well-formed alignment has an
acyclic precedence and is stored with its columns in a canonical
topological order.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ContractError, LegalityError
from .knowledge import NEW_ID, Pattern

Cell = tuple[int, int]  # (row, position in that row's pattern)


@dataclass(frozen=True, eq=False)
class Alignment:
    rows: tuple[Pattern, ...]
    columns: tuple[tuple[Cell, ...], ...]
    # patterns added, in order, starting from New
    provenance: tuple[str, ...] = ()
    _col_of: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    _down: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        rows = tuple(self.rows)
        if not rows or rows[0].id != NEW_ID:
            raise ContractError("row 0 of an alignment must be New")
        if any(p.id == NEW_ID for p in rows[1:]):
            raise ContractError("only row 0 may be New")
        syms = [p.symbols for p in rows]
        ids = [p.id for p in rows]
        nrows = len(rows)
        col_of = [[-1] * len(x) for x in syms]
        for c, cells in enumerate(self.columns):
            if not cells:
                raise ContractError("empty column")
            sym = None
            seen_rows = set()
            seen_self = set()
            for r, pos in cells:
                if not (0 <= r < nrows and 0 <= pos < len(syms[r])):
                    raise ContractError(f"cell {(r, pos)} out of bounds")
                placed = col_of[r]
                if placed[pos] != -1:
                    raise ContractError(f"cell {(r, pos)} placed twice")
                if r in seen_rows:
                    raise ContractError(f"row {r} appears twice in one column")
                seen_rows.add(r)
                label = (ids[r], pos)
                if label in seen_self:
                    raise ContractError(f"column aligns {ids[r]}[{pos}] with itself")
                seen_self.add(label)
                s = syms[r][pos]
                if sym is None:
                    sym = s
                elif s != sym:
                    raise ContractError(f"column mixes symbols {sym!r} and {s!r}")
                placed[pos] = c
        for r, cols in enumerate(col_of):
            if -1 in cols:
                raise ContractError(f"row {r} has unplaced symbols")
        order = _topological_order(self.columns, col_of)
        if order is None:
            raise LegalityError("column precedence has a cycle")
        columns = tuple(tuple(sorted(self.columns[c])) for c in order)
        remap = [0] * len(order)
        for new, old in enumerate(order):
            remap[old] = new
        col_of = tuple(tuple([remap[c] for c in cols]) for cols in col_of)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "columns", columns)
        object.__setattr__(self, "provenance", tuple(self.provenance) or (NEW_ID,))
        object.__setattr__(self, "_col_of", col_of)
        object.__setattr__(self, "_down", _down_sets(columns, col_of))

    # construction

    @classmethod
    def single(cls, new: Pattern) -> "Alignment":
        return cls((new,), tuple(((0, i),) for i in range(len(new))))

    def extend(self, pattern: Pattern, hits: Iterable[tuple[int, int]]) -> "Alignment":
        """Add ``pattern`` as a new row, placing ``hits`` (column, position).

        Unhit positions of ``pattern`` become singleton columns.
        """
        r = len(self.rows)
        columns = [list(cells) for cells in self.columns]
        placed = set()
        for c, j in hits:
            if not (0 <= c < len(columns) and 0 <= j < len(pattern)):
                raise ContractError(f"hit {(c, j)} out of bounds")
            if j in placed:
                raise ContractError(f"position {j} hit twice")
            placed.add(j)
            columns[c].append((r, j))
        for j in range(len(pattern)):
            if j not in placed:
                columns.append([(r, j)])
        return Alignment(
            self.rows + (pattern,),
            tuple(tuple(c) for c in columns),
            self.provenance + (pattern.id,),
        )

    def without_row(self, r: int) -> "Alignment":
        return self.without_rows((r,))

    def without_rows(self, drop: Iterable[int]) -> "Alignment":
        """The alignment with the given Old rows removed."""
        drop = set(drop)
        if any(not (0 < r < len(self.rows)) for r in drop):
            raise ContractError("only Old rows can be removed")
        renum = {}
        for r in range(len(self.rows)):
            if r not in drop:
                renum[r] = len(renum)
        columns = []
        for cells in self.columns:
            kept = tuple((renum[q], pos) for q, pos in cells if q in renum)
            if kept:
                columns.append(kept)
        rows = tuple(p for r, p in enumerate(self.rows) if r in renum)
        prov = tuple(p for r, p in enumerate(self.provenance) if r in renum)
        return Alignment(rows, tuple(columns), prov)

    # structure

    @property
    def new(self) -> Pattern:
        return self.rows[0]

    def __len__(self):
        return len(self.rows)

    def column_of(self, row: int, pos: int) -> int:
        return self._col_of[row][pos]

    def row_columns(self, row: int) -> tuple[int, ...]:
        return self._col_of[row]

    def symbol(self, c: int) -> str:
        r, pos = self.columns[c][0]
        return self.rows[r][pos]

    @property
    def column_symbols(self) -> tuple[str, ...]:
        return tuple(self.symbol(c) for c in range(len(self.columns)))

    @property
    def down_sets(self) -> tuple[int, ...]:
        """Bitmask per column of the columns at or before it."""
        return self._down

    def precedes(self, a: int, b: int) -> bool:
        return a != b and bool((self._down[b] >> a) & 1)

    def comparable(self, a: int, b: int) -> bool:
        return a == b or self.precedes(a, b) or self.precedes(b, a)

    def is_new_only(self, c: int) -> bool:
        cells = self.columns[c]
        return len(cells) == 1 and cells[0][0] == 0

    def is_matched(self, c: int) -> bool:
        return len(self.columns[c]) > 1

    def matched_new_positions(self) -> tuple[int, ...]:
        m = self.__dict__.get("_matched")
        if m is None:
            cols = self.columns
            m = tuple(i for i, c in enumerate(self._col_of[0]) if len(cols[c]) > 1)
            object.__setattr__(self, "_matched", m)
        return m

    def new_span(self) -> tuple[int, int] | None:
        """First and last matched New positions, or None."""
        m = self.matched_new_positions()
        return (m[0], m[-1]) if m else None

    def row_extent(self, r: int) -> tuple[int, int]:
        cols = self._col_of[r]
        return min(cols), max(cols)

    def shares_column(self, r1: int, r2: int) -> bool:
        return bool(set(self._col_of[r1]) & set(self._col_of[r2]))

    def hit_count(self) -> int:
        return sum(len(c) - 1 for c in self.columns)

    # legality

    def illegal_pairs(self) -> list[tuple[int, int]]:
        """Incomparable column pairs with no unmatched New symbol between them.

        An unmatched New symbol may sit opposite an unmatched Old symbol
        (a substitution); two Old-only columns with no fixed order make the
        alignment ambiguous.
        """
        n = len(self.columns)
        down = self._down
        up = [0] * n
        for b in range(n):
            m = down[b]
            while m:
                low = m & -m
                up[low.bit_length() - 1] |= 1 << b
                m ^= low
        old = 0
        for c in range(n):
            if not self.is_new_only(c):
                old |= 1 << c
        bad = []
        for a in range(n):
            if not (old >> a) & 1:
                continue
            loose = old & ~(down[a] | up[a]) & ~((1 << (a + 1)) - 1)
            while loose:
                low = loose & -loose
                bad.append((a, low.bit_length() - 1))
                loose ^= low
        return bad

    def is_legal(self) -> bool:
        # Columns that are not New-only must form a chain.  Columns are kept
        # in a topological order, so checking neighbours in it suffices.
        down = self._down
        prev = -1
        for c in range(len(self.columns)):
            if self.is_new_only(c):
                continue
            if prev >= 0 and not (down[c] >> prev) & 1:
                return False
            prev = c
        return True

    def key(self) -> tuple:
        """Identity up to row order: multiset of column labels."""
        labels = []
        for cells in self.columns:
            labels.append(tuple(sorted((self.rows[r].id, pos) for r, pos in cells)))
        return tuple(sorted(labels))

    def row_pattern_ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.rows[1:])

    def __eq__(self, other):
        if not isinstance(other, Alignment):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        rows = ", ".join(p.text for p in self.rows[1:])
        return f"Alignment(new={self.new.text!r}, rows=[{rows}])"


def _topological_order(columns, col_of):
    n = len(columns)
    succ = [set() for _ in range(n)]
    indeg = [0] * n
    for cols in col_of:
        for a, b in zip(cols, cols[1:]):
            if b not in succ[a]:
                succ[a].add(b)
                indeg[b] += 1
    prio = [min(cells) for cells in columns]
    heap = [(prio[c], c) for c in range(n) if indeg[c] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, c = heapq.heappop(heap)
        order.append(c)
        for d in succ[c]:
            indeg[d] -= 1
            if indeg[d] == 0:
                heapq.heappush(heap, (prio[d], d))
    return order if len(order) == n else None


def _down_sets(columns, col_of):
    preds = [[] for _ in columns]
    for cols in col_of:
        for a, b in zip(cols, cols[1:]):
            preds[b].append(a)
    down = [0] * len(columns)
    # columns are in topological order, so predecessors come first
    for c in range(len(columns)):
        m = 1 << c
        for p in preds[c]:
            m |= down[p]
        down[c] = m
    return tuple(down)


def project_alignment(a: Alignment) -> tuple[str, ...]:
    """The alignment flattened to one sequence, one symbol per column."""
    bad = a.illegal_pairs()
    if bad:
        x, y = bad[0]
        raise LegalityError(
            f"order of {a.symbol(x)!r} and {a.symbol(y)!r} is ambiguous"
        )
    return a.column_symbols


def unify_alignment(a: Alignment, pattern_id: str = "unified") -> Pattern:
    return Pattern(pattern_id, project_alignment(a), 1)


def compose(
    new: Pattern,
    patterns: Sequence[Pattern],
    table,
    params=None,
) -> Alignment:
    """Build an alignment by adding ``patterns`` as rows in the given order.

    Each row is placed by the best hit sequence the pairwise kernel finds
    against the alignment built so far.  A pattern with no usable hit is
    added unmatched.
    """
    from .pairwise import SearchParams

    params = params or SearchParams()
    a = Alignment.single(new)
    for p in patterns:
        hits = best_extension_hits(a, p, table, params)
        a = a.extend(p, hits[0] if hits else ())
    return a


def extension_candidates(a: Alignment, p: Pattern, table, params):
    """Alternative hit lists (column, position) for adding ``p`` to ``a``."""
    from .pairwise import search_hits

    forbidden = set()
    for c, cells in enumerate(a.columns):
        for r, pos in cells:
            if a.rows[r].id == p.id:
                forbidden.add((c, pos))
    symbols = a.column_symbols
    weights = [table.cost(s) for s in symbols]
    linear = len(a.rows) == 1
    found = search_hits(
        symbols, p.symbols, weights, params,
        None if linear else a.down_sets, forbidden,
    )
    return [[(h.driver, h.target) for h in hs.hits] for hs in found]


def best_extension_hits(a, p, table, params):
    return extension_candidates(a, p, table, params)
