"""Alternative alignments between two patterns, graded by compression.

The kernel is a staged list-processing search: stage one seeds every
single hit, each later stage extends every retained hit sequence by every
legal next hit, and the best ``beam_width`` states survive each stage.
States are keyed by their last hit, so with a beam at least as large as the
number of possible hits the search is exhaustive.

The hot loop lives in a compiled extension (``_ckernel``) when it is
available; ``_kernel_py`` is the pure-Python fallback.  Set
``ICMAUS_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

from . import _kernel_py
from .errors import ContractError
from .knowledge import FrequencyTable, Pattern

try:  # pragma: no cover - depends on the build
    from . import _ckernel
except ImportError:  # pragma: no cover
    _ckernel = None

_BACKENDS = {"python": _kernel_py.staged_search}
if _ckernel is not None:
    _BACKENDS["c"] = _ckernel.staged_search

if os.environ.get("ICMAUS_PURE_PYTHON") or "c" not in _BACKENDS:
    _backend = "python"
else:
    _backend = "c"


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; have {available_backends()}")
    _backend = name


@dataclass(frozen=True, order=True)
class Hit:
    driver: int
    target: int


@dataclass(frozen=True)
class HitSequence:
    hits: tuple[Hit, ...]
    score: float

    def __len__(self):
        return len(self.hits)

    @property
    def driver_indices(self) -> tuple[int, ...]:
        return tuple(h.driver for h in self.hits)

    @property
    def target_indices(self) -> tuple[int, ...]:
        return tuple(h.target for h in self.hits)


@dataclass(frozen=True)
class SearchParams:
    """Thoroughness of the pairwise search.

    ``gap_penalty`` is charged once per maximal run of unmatched driver
    symbols between two hits.  Alternatives whose hits are a subset of a
    better alternative's are dropped unless ``keep_subsets`` is set; with
    that flag and large enough limits the search is exhaustive.
    """

    beam_width: int = 64
    max_alternatives: int = 4
    cost_gap: float = 64.0
    gap_penalty: float = 1.0
    keep_subsets: bool = False

    def __post_init__(self):
        if self.beam_width < 1 or self.max_alternatives < 1:
            raise ValueError("beam_width and max_alternatives must be positive")
        if self.beam_width < self.max_alternatives:
            raise ValueError("beam_width must be >= max_alternatives")
        if not self.cost_gap > 0:
            raise ValueError("cost_gap must be positive")
        if self.gap_penalty < 0:
            raise ValueError("gap_penalty must be non-negative")


def search_hits(
    driver_symbols: Sequence[str],
    target_symbols: Sequence[str],
    weights: Sequence[float],
    params: SearchParams,
    down: Sequence[int] | None = None,
    forbidden: set[tuple[int, int]] = frozenset(),
    backend: str | None = None,
) -> list[HitSequence]:
    """Kernel entry point shared by :func:`align_pair` and the engine.

    ``down`` gives, for a partially ordered driver, the bitmask of driver
    positions that precede-or-equal each position.  ``forbidden`` lists
    (driver, target) pairs that would match a symbol instance with itself.
    """
    positions: dict[str, list[int]] = {}
    for j, s in enumerate(target_symbols):
        positions.setdefault(s, []).append(j)
    pairs = [
        (i, j)
        for i, s in enumerate(driver_symbols)
        for j in positions.get(s, ())
        if (i, j) not in forbidden
    ]
    if not pairs:
        return []
    pairs.sort(key=lambda p: (p[1], p[0]))
    search = _BACKENDS[backend or _backend]
    raw = search(
        pairs,
        [float(w) for w in weights],
        None if down is None else list(down),
        float(params.gap_penalty),
        params.beam_width,
        params.max_alternatives,
    )
    return _select(raw, params)


def _select(raw, params):
    ranked = {}
    for score, hits in raw:
        if hits not in ranked or score > ranked[hits]:
            ranked[hits] = score
    order = sorted(
        ranked.items(),
        key=lambda kv: (-kv[1], tuple(h[0] for h in kv[0]), tuple(h[1] for h in kv[0])),
    )
    best = order[0][1]
    kept: list[tuple[frozenset, HitSequence]] = []
    for hits, score in order:
        if score < best - params.cost_gap:
            break
        hs = frozenset(hits)
        # a subset of a better alternative adds nothing
        if not params.keep_subsets and any(hs < other for other, _ in kept):
            continue
        kept.append((hs, HitSequence(tuple(Hit(i, j) for i, j in hits), score)))
        if len(kept) == params.max_alternatives:
            break
    return [seq for _, seq in kept]


def _same_stored_pattern(driver: Pattern, target: Pattern) -> bool:
    return driver.id == target.id and driver.symbols == target.symbols


def align_pair(
    driver: Pattern,
    target: Pattern,
    table: FrequencyTable,
    params: SearchParams = SearchParams(),
) -> list[HitSequence]:
    """Best alternative hit sequences between two patterns.

    When ``driver`` and ``target`` are two appearances of one stored
    pattern, hits that pair a position with itself are excluded.
    """
    forbidden = set()
    if _same_stored_pattern(driver, target):
        forbidden = {(i, i) for i in range(len(driver))}
    weights = [table.cost(s) for s in driver.symbols]
    return search_hits(driver.symbols, target.symbols, weights, params, None, forbidden)


def hit_sequence_legal(hs: HitSequence | Sequence, driver: Pattern, target: Pattern) -> bool:
    hits = hs.hits if isinstance(hs, HitSequence) else hs
    hits = [h if isinstance(h, Hit) else Hit(*h) for h in hits]
    for h in hits:
        if not (0 <= h.driver < len(driver) and 0 <= h.target < len(target)):
            raise ContractError(f"hit {h} out of bounds")
    for a, b in zip(hits, hits[1:]):
        if not (b.driver > a.driver and b.target > a.target):
            return False
    for h in hits:
        if driver[h.driver] != target[h.target]:
            return False
    if _same_stored_pattern(driver, target) and any(h.driver == h.target for h in hits):
        return False
    return True


def score_hits(hits, weights, gap_penalty) -> float:
    """Score of a hit sequence under the kernel's scoring rule."""
    score = 0.0
    prev = None
    for i, _ in hits:
        score += weights[i]
        if prev is not None and i != prev + 1:
            score -= gap_penalty
        prev = i
    return score
