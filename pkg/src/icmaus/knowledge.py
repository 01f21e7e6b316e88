"""Patterns, the Old knowledge base and the frequency-derived cost model.

A pattern is an ordered sequence of symbols with a frequency of occurrence.
Symbols are plain strings compared byte for byte; a leading ``#`` means
nothing special.  Every bit cost in the package comes from
:class:`FrequencyTable`: ``c(s) = -log2(f(s) / T)`` over token counts.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .errors import (
    DuplicatePatternError,
    IndiscriminablePatternError,
    KBParseError,
    KBValidationError,
    UnknownSymbolError,
)

ALPHABET_SIZE = 2
NEW_ID = "New"

# symbols may not contain whitespace or the frequency brackets
_SYMBOL_RE = re.compile(r"^[^\s()]+$")
_LINE_RE = re.compile(r"^(?P<body>.*?)\s*\(\s*(?P<freq>[+-]?\d+)\s*\)\s*$")


@dataclass(frozen=True)
class Pattern:
    """An ordered, non-empty sequence of symbols with a frequency."""

    id: str
    symbols: tuple[str, ...]
    frequency: int = 1

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if not self.symbols:
            raise KBValidationError(f"pattern {self.id!r} has no symbols")
        for s in self.symbols:
            if not isinstance(s, str) or not _SYMBOL_RE.match(s):
                raise KBValidationError(f"pattern {self.id!r}: bad symbol {s!r}")
        if not isinstance(self.frequency, int) or self.frequency < 1:
            raise KBValidationError(
                f"pattern {self.id!r}: frequency must be a positive integer"
            )

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, i):
        return self.symbols[i]

    @property
    def text(self) -> str:
        return " ".join(self.symbols)

    def __str__(self):
        return self.text


def new_pattern(text: str | Sequence[str]) -> Pattern:
    """Build the New pattern for a query from text or a symbol list."""
    symbols = text.split() if isinstance(text, str) else list(text)
    return Pattern(NEW_ID, tuple(symbols), 1)


@dataclass(frozen=True)
class FrequencyTable:
    """Token frequencies and minimum costs (bits) per symbol type."""

    counts: Mapping[str, int]
    total: int
    alphabet_size: int = ALPHABET_SIZE
    costs: Mapping[str, float] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        total = self.total
        costs = {s: -math.log2(f / total) for s, f in self.counts.items()}
        object.__setattr__(self, "costs", costs)

    def cost(self, s: str) -> float:
        try:
            return self.costs[s]
        except KeyError:
            raise UnknownSymbolError(s) from None

    def frequency(self, s: str) -> int:
        try:
            return self.counts[s]
        except KeyError:
            raise UnknownSymbolError(s) from None

    def __contains__(self, s):
        return s in self.counts

    def __len__(self):
        return len(self.counts)


@dataclass(frozen=True)
class IdentificationCode:
    """Symbols that single out one pattern within Old, and their cost."""

    pattern_id: str
    positions: tuple[int, ...]
    symbols: tuple[str, ...]
    cost: float
    # True when no proper subsequence is unique and the key is the whole
    # pattern, decoded by exact equality
    exact: bool = False


def is_subsequence(key: Sequence[str], seq: Sequence[str]) -> bool:
    it = iter(seq)
    return all(any(s == t for t in it) for s in key)


class KnowledgeBase:
    """Immutable collection of Old patterns plus derived tables.

    Pattern ids must be unique and no two patterns may share a symbol
    sequence.  Identification codes are cached per table and context.
    """

    def __init__(self, patterns: Iterable[Pattern] = ()):
        patterns = tuple(patterns)
        seen_ids = set()
        seen_seqs = {}
        for p in patterns:
            if p.id in seen_ids:
                raise KBValidationError(f"duplicate pattern id {p.id!r}")
            if p.id == NEW_ID:
                raise KBValidationError(f"pattern id {NEW_ID!r} is reserved")
            seen_ids.add(p.id)
            if p.symbols in seen_seqs:
                raise DuplicatePatternError(
                    f"pattern {p.id!r} duplicates {seen_seqs[p.symbols]!r}: "
                    f"{p.text!r}; merge their frequencies instead"
                )
            seen_seqs[p.symbols] = p.id
        self._patterns = patterns
        self._by_id = {p.id: i for i, p in enumerate(patterns)}
        index: dict[str, set[int]] = {}
        for i, p in enumerate(patterns):
            for s in p.symbols:
                index.setdefault(s, set()).add(i)
        self._containing = {s: frozenset(v) for s, v in index.items()}
        self._table = compute_frequency_table(self, None)
        self._id_cache: dict = {}

    @property
    def patterns(self) -> tuple[Pattern, ...]:
        return self._patterns

    @property
    def table(self) -> FrequencyTable:
        """Frequency table of Old alone (no New)."""
        return self._table

    def __len__(self):
        return len(self._patterns)

    def __iter__(self):
        return iter(self._patterns)

    def __contains__(self, p):
        return isinstance(p, Pattern) and self._by_id.get(p.id) is not None and (
            self._patterns[self._by_id[p.id]] == p
        )

    def index_of(self, pattern_id: str) -> int:
        return self._by_id[pattern_id]

    def get(self, pattern_id: str) -> Pattern:
        return self._patterns[self._by_id[pattern_id]]

    def find(self, symbols: Sequence[str]) -> Pattern | None:
        symbols = tuple(symbols)
        for p in self._patterns:
            if p.symbols == symbols:
                return p
        return None

    def symbol_types(self) -> set[str]:
        return set(self._containing)

    def patterns_containing(self, key: Sequence[str]) -> list[int]:
        """Indices of patterns having ``key`` as an ordered subsequence."""
        if not key:
            return list(range(len(self._patterns)))
        sets = []
        for s in set(key):
            found = self._containing.get(s)
            if not found:
                return []
            sets.append(found)
        candidates = sorted(frozenset.intersection(*sets))
        return [i for i in candidates if is_subsequence(key, self._patterns[i].symbols)]

    def identify(self, key: Sequence[str]) -> Pattern | None:
        """The pattern a key decodes to, or None when ambiguous or absent."""
        hits = self.patterns_containing(key)
        if len(hits) == 1:
            return self._patterns[hits[0]]
        exact = [i for i in hits if self._patterns[i].symbols == tuple(key)]
        if len(exact) == 1:
            return self._patterns[exact[0]]
        return None

    def to_text(self) -> str:
        return "".join(f"{p.text} ({p.frequency})\n" for p in self._patterns)

    def identification_code(
        self,
        p: Pattern,
        table: FrequencyTable | None = None,
        implied: Iterable[int] = (),
        pools: Sequence[Iterable[int]] = (),
    ) -> IdentificationCode:
        """Cheapest code that singles out ``p``, given context symbols.

        ``implied`` lists positions of ``p`` whose symbols are already known
        from a containing row; they join the key for free.  ``pools`` are
        candidate position sets tried in order before the whole pattern;
        the first pool that yields a unique key wins.  At least one symbol
        is always charged.
        """
        table = table or self._table
        implied = frozenset(implied)
        pools = tuple(frozenset(pool) - implied for pool in pools)
        key = (p.id, id(table), implied, pools)
        hit = self._id_cache.get(key)
        if hit is not None and hit[0] is table:
            return hit[1]
        if p not in self:
            raise KBValidationError(f"pattern {p.id!r} is not in this knowledge base")
        code = None
        for pool in pools:
            if pool:
                code = _search_identification(self, p, table, implied, pool)
                if code is not None:
                    break
        if code is None:
            code = _search_identification(self, p, table, implied)
        self._id_cache[key] = (table, code)
        return code


def _search_identification(kb, p, table, implied, pool=None):
    """Search codes drawn from ``pool`` (None: every position).

    With a pool, returns None instead of falling back to the whole pattern.
    """
    n = len(p.symbols)
    costs = [table.cost(s) for s in p.symbols]
    free = sorted(implied)
    strict = pool is not None
    if strict:
        open_positions = sorted(pool)
    else:
        open_positions = [i for i in range(n) if i not in implied]
    if not open_positions:
        # every symbol is implied; still charge one symbol
        i = min(range(n), key=lambda j: (round(costs[j], 9), j))
        return _make_code(kb, p, (i,), costs, exact=not _unique(kb, p, range(n)))

    best = None
    for k in (1, 2, 3):
        for combo in combinations(open_positions, k):
            cost = round(sum(costs[i] for i in combo), 9)
            if best is not None and (cost, combo) >= best[:2]:
                continue
            if _unique(kb, p, sorted(free + list(combo))):
                best = (cost, combo)
    if best is not None:
        return _make_code(kb, p, best[1], costs)

    chosen = []
    for i in sorted(open_positions, key=lambda j: (round(costs[j], 9), j)):
        chosen.append(i)
        if _unique(kb, p, sorted(free + chosen)):
            return _make_code(kb, p, tuple(sorted(chosen)), costs)
    if strict:
        return None
    # p is itself a subsequence of another pattern: key is all of p
    if kb.identify(p.symbols) != p:
        raise IndiscriminablePatternError(f"pattern {p.id!r} cannot be identified")
    return _make_code(kb, p, tuple(open_positions), costs, exact=True)


def _unique(kb, p, positions):
    key = [p.symbols[i] for i in positions]
    hits = kb.patterns_containing(key)
    return len(hits) == 1 and kb.patterns[hits[0]] == p


def _make_code(kb, p, positions, costs, exact=False):
    return IdentificationCode(
        pattern_id=p.id,
        positions=tuple(positions),
        symbols=tuple(p.symbols[i] for i in positions),
        cost=sum(costs[i] for i in positions),
        exact=exact,
    )


def compute_frequency_table(kb: KnowledgeBase, new: Pattern | None) -> FrequencyTable:
    """Token counts over Old (weighted by frequency) plus one copy of New."""
    counts: Counter[str] = Counter()
    for p in kb.patterns:
        for s in p.symbols:
            counts[s] += p.frequency
    if new is not None:
        counts.update(new.symbols)
    return FrequencyTable(dict(counts), sum(counts.values()))


def symbol_min_cost(table: FrequencyTable, s: str) -> float:
    return table.cost(s)


def pattern_identification_code(
    kb: KnowledgeBase, p: Pattern, table: FrequencyTable | None = None
) -> IdentificationCode:
    """Minimum-cost subsequence of ``p`` that no other Old pattern contains."""
    return kb.identification_code(p, table)


def parse_kb_text(text: str, prefix: str = "p") -> KnowledgeBase:
    """Parse the line-oriented knowledge-base format.

    One pattern per line, symbols separated by whitespace, frequency in
    trailing parentheses.  Lines starting with ``;`` are comments.
    """
    patterns = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(";"):
            continue
        m = _LINE_RE.match(line)
        if m is None:
            raise KBParseError(f"missing '(frequency)' in {line!r}", lineno)
        symbols = m.group("body").split()
        if not symbols:
            raise KBParseError("empty symbol list", lineno)
        for s in symbols:
            if not _SYMBOL_RE.match(s):
                raise KBParseError(f"bad symbol {s!r}", lineno)
        freq = int(m.group("freq"))
        if freq <= 0:
            raise KBValidationError(f"frequency must be positive, got {freq}", lineno)
        patterns.append(Pattern(f"{prefix}{len(patterns) + 1}", tuple(symbols), freq))
    try:
        return KnowledgeBase(patterns)
    except DuplicatePatternError as exc:
        line = _line_of_duplicate(text, exc)
        raise DuplicatePatternError(str(exc), line) from None


def _line_of_duplicate(text, exc):
    # map the second occurrence back to its source line for diagnostics
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        m = _LINE_RE.match(raw.strip())
        if m is None or raw.strip().startswith(";"):
            continue
        key = tuple(m.group("body").split())
        if key in seen:
            return lineno
        seen.add(key)
    return None


def format_kb_text(kb: KnowledgeBase) -> str:
    return kb.to_text()
